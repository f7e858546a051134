#include <bit>
#include <cstring>
#include <fstream>

#include "mia/attack/dataset.hpp"
#include "mia/core/errors.hpp"

namespace mia {

using nlohmann::json;

namespace {

constexpr int kDatasetFormatVersion = 1;

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw FormatError("unknown split '" + s + "'");
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXf& m) {
  static_assert(std::endian::native == std::endian::little, "samples.f32 is little-endian");
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
}

Eigen::MatrixXf read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXf m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  if (!in) throw FormatError("samples.f32: truncated sample data");
  return m;
}

}  // namespace

void save_attack_dataset(const std::filesystem::path& dir, const AttackDataset& ds) {
  ds.validate();
  std::filesystem::create_directories(dir);
  json labels = json::array(), splits = json::array(), seeds = json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    labels.push_back(ds.label(i));
    splits.push_back(std::string(to_string(ds.splits[i])));
    if (ds.mode == AttackMode::individual)
      seeds.push_back(json::array({ds.pairs[i].seed}));
    else
      seeds.push_back(ds.stacks[i].seeds);
  }
  const json manifest = {{"format", "mia-attack-dataset"},
                         {"version", kDatasetFormatVersion},
                         {"mode", std::string(to_string(ds.mode))},
                         {"action_dim", ds.action_dim},
                         {"clip_length", ds.clip_length},
                         {"m", ds.m},
                         {"count", ds.size()},
                         {"labels", labels},
                         {"splits", splits},
                         {"seeds", seeds},
                         {"provenance", ds.provenance}};
  std::ofstream(dir / "manifest.json") << manifest.dump(1) << '\n';
  std::ofstream data(dir / "samples.f32", std::ios::binary);
  if (!data) throw FormatError("cannot write " + (dir / "samples.f32").string());
  for (const auto& p : ds.pairs) write_matrix(data, p.matrix);
  for (const auto& s : ds.stacks)
    for (const auto& p : s.pairs) write_matrix(data, p);
}

AttackDataset load_attack_dataset(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw FormatError("missing " + (dir / "manifest.json").string());
  AttackDataset ds;
  try {
    const json manifest = json::parse(mf);
    if (manifest.at("format") != "mia-attack-dataset" ||
        manifest.at("version").get<int>() != kDatasetFormatVersion)
      throw FormatError("unsupported attack dataset manifest");
    ds.mode = parse_attack_mode(manifest.at("mode").get<std::string>());
    ds.action_dim = manifest.at("action_dim").get<std::size_t>();
    ds.clip_length = manifest.at("clip_length").get<std::size_t>();
    ds.m = manifest.at("m").get<std::size_t>();
    ds.provenance = manifest.at("provenance");
    const auto count = manifest.at("count").get<std::size_t>();
    const auto& labels = manifest.at("labels");
    const auto& splits = manifest.at("splits");
    const auto& seeds = manifest.at("seeds");
    if (labels.size() != count || splits.size() != count || seeds.size() != count)
      throw FormatError("attack dataset manifest: per-sample arrays disagree with count");

    std::ifstream data(dir / "samples.f32", std::ios::binary);
    if (!data) throw FormatError("missing " + (dir / "samples.f32").string());
    const auto rows = static_cast<Eigen::Index>(2 * ds.action_dim);
    const auto cols = static_cast<Eigen::Index>(ds.clip_length);
    for (std::size_t i = 0; i < count; ++i) {
      ds.splits.push_back(parse_split(splits[i].get<std::string>()));
      const int label = labels[i].get<int>();
      const auto sample_seeds = seeds[i].get<std::vector<std::int64_t>>();
      if (ds.mode == AttackMode::individual) {
        if (sample_seeds.size() != 1) throw FormatError("individual sample must carry one seed");
        ds.pairs.push_back({read_matrix(data, rows, cols), label, sample_seeds[0]});
      } else {
        CollectiveSample cs;
        cs.label = label;
        cs.seeds = sample_seeds;
        for (std::size_t k = 0; k < ds.m; ++k) cs.pairs.push_back(read_matrix(data, rows, cols));
        ds.stacks.push_back(std::move(cs));
      }
    }
    if (data.peek() != std::char_traits<char>::eof())
      throw FormatError("samples.f32: trailing data after the last sample");
  } catch (const json::exception& e) {
    throw FormatError(std::string("attack dataset manifest: ") + e.what());
  }
  ds.validate();
  return ds;
}

}  // namespace mia
