#include "mia/core/trajectory_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "mia/core/errors.hpp"

namespace mia {

using nlohmann::json;

namespace {

json record_for(const Trajectory& t, std::size_t id, std::int64_t seed) {
  std::vector<float> state, action, reward, next_state;
  std::vector<int> terminal;
  for (const auto& tr : t.transitions()) {
    state.insert(state.end(), tr.state.begin(), tr.state.end());
    action.insert(action.end(), tr.action.begin(), tr.action.end());
    reward.push_back(tr.reward);
    next_state.insert(next_state.end(), tr.next_state.begin(), tr.next_state.end());
    terminal.push_back(tr.terminal ? 1 : 0);
  }
  return {{"id", id},         {"seed", seed},     {"T", t.length()},
          {"synthetic", t.is_synthetic()},        {"state", state},
          {"action", action}, {"reward", reward}, {"next_state", next_state},
          {"terminal", terminal}};
}

std::vector<float> slice(const std::vector<float>& flat, std::size_t i, std::size_t dim) {
  return {flat.begin() + static_cast<std::ptrdiff_t>(i * dim),
          flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim)};
}

Trajectory trajectory_from(const json& rec, const EnvSpec& spec) {
  const auto T = rec.at("T").get<std::size_t>();
  const auto state = rec.at("state").get<std::vector<float>>();
  const auto action = rec.at("action").get<std::vector<float>>();
  const auto reward = rec.at("reward").get<std::vector<float>>();
  const auto next_state = rec.at("next_state").get<std::vector<float>>();
  const auto terminal = rec.at("terminal").get<std::vector<int>>();
  if (T == 0 || state.size() != T * spec.state_dim || next_state.size() != T * spec.state_dim ||
      action.size() != T * spec.action_dim || reward.size() != T || terminal.size() != T)
    throw FormatError("trajectory record " + rec.at("id").dump() +
                      ": array lengths disagree with header dims");
  std::vector<Transition> ts(T);
  for (std::size_t i = 0; i < T; ++i) {
    ts[i].state = slice(state, i, spec.state_dim);
    ts[i].action = slice(action, i, spec.action_dim);
    ts[i].reward = reward[i];
    ts[i].next_state = slice(next_state, i, spec.state_dim);
    ts[i].terminal = terminal[i] != 0;
  }
  if (rec.value("synthetic", false)) return Trajectory::synthetic(std::move(ts));
  return Trajectory(std::move(ts));
}

}  // namespace

void write_trajectory_batch(std::ostream& out, const TrajectoryBatch& batch) {
  batch.validate();
  const json header = {{"format", "mia-trajectories"},
                       {"version", kTrajectoryFormatVersion},
                       {"source", std::string(to_string(batch.source))},
                       {"count", batch.size()},
                       {"env", to_json(batch.spec)}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < batch.size(); ++i)
    out << record_for(batch.trajectories[i], i, batch.seeds[i]).dump() << '\n';
}

void save_trajectory_batch(const std::filesystem::path& path, const TrajectoryBatch& batch) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_trajectory_batch(out, batch);
}

TrajectoryBatch read_trajectory_batch(std::istream& in, const std::optional<EnvSpec>& expected) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trajectory file: missing header");
  TrajectoryBatch batch;
  std::size_t count = 0;
  try {
    const json header = json::parse(line);
    if (header.at("format") != "mia-trajectories")
      throw FormatError("trajectory file: unexpected format tag");
    if (header.at("version").get<int>() != kTrajectoryFormatVersion)
      throw FormatError("trajectory file: unsupported version " + header.at("version").dump());
    batch.spec = env_spec_from_json(header.at("env"));
    batch.source = parse_source_tag(header.at("source").get<std::string>());
    count = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory file header: ") + e.what());
  }
  if (expected && !batch.spec.compatible_with(*expected, true))
    throw FormatError("trajectory file header (" + batch.spec.name +
                      ") does not match the expected environment spec (" + expected->name + ")");

  batch.trajectories.reserve(count);
  batch.seeds.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      batch.trajectories.push_back(trajectory_from(rec, batch.spec));
      batch.seeds.push_back(rec.at("seed").get<std::int64_t>());
    } catch (const json::exception& e) {
      throw FormatError(std::string("trajectory record: ") + e.what());
    } catch (const DomainError& e) {
      throw FormatError(std::string("trajectory record: ") + e.what());
    }
  }
  if (batch.size() != count)
    throw FormatError("trajectory file: header announces " + std::to_string(count) +
                      " records, found " + std::to_string(batch.size()));
  batch.validate();
  return batch;
}

TrajectoryBatch load_trajectory_batch(const std::filesystem::path& path,
                                      const std::optional<EnvSpec>& expected) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_trajectory_batch(in, expected);
}

}  // namespace mia
