#include "mia/core/types.hpp"

#include <string>

#include "mia/core/errors.hpp"

namespace mia {

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::member:
      return "member";
    case SourceTag::nonmember:
      return "nonmember";
    case SourceTag::model_output:
      return "model_output";
  }
  return "unknown";
}

SourceTag parse_source_tag(std::string_view text) {
  if (text == "member") return SourceTag::member;
  if (text == "nonmember") return SourceTag::nonmember;
  if (text == "model_output") return SourceTag::model_output;
  throw FormatError("unknown source tag '" + std::string(text) + "'");
}

Trajectory::Trajectory(std::vector<Transition> transitions)
    : Trajectory(std::move(transitions), false) {}

Trajectory Trajectory::synthetic(std::vector<Transition> transitions) {
  return Trajectory(std::move(transitions), true);
}

Trajectory::Trajectory(std::vector<Transition> transitions, bool synthetic)
    : transitions_(std::move(transitions)), synthetic_(synthetic) {
  if (transitions_.empty()) throw DomainError("trajectory must hold at least one transition");
  const std::size_t ds = transitions_.front().state.size();
  const std::size_t da = transitions_.front().action.size();
  if (ds == 0 || da == 0) throw DomainError("trajectory: zero state or action dimension");
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    const Transition& t = transitions_[i];
    if (t.state.size() != ds || t.next_state.size() != ds || t.action.size() != da)
      throw DomainError("trajectory: transition " + std::to_string(i) + " has inconsistent dims");
  }
  if (synthetic_) return;
  for (std::size_t i = 0; i + 1 < transitions_.size(); ++i) {
    if (transitions_[i].terminal)
      throw DomainError("trajectory: terminal flag on non-final transition " + std::to_string(i));
    if (transitions_[i].next_state != transitions_[i + 1].state)
      throw DomainError("trajectory: chain broken between " + std::to_string(i) + " and " +
                        std::to_string(i + 1));
  }
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> out;
  out.reserve(transitions_.size());
  for (const auto& t : transitions_) out.push_back(t.reward);
  return out;
}

bool chain_consistent(const Trajectory& trajectory) {
  const auto& ts = trajectory.transitions();
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i].next_state != ts[i + 1].state || ts[i].terminal) return false;
  }
  return true;
}

void validate_trajectory(const Trajectory& trajectory, const EnvSpec& spec) {
  if (trajectory.state_dim() != spec.state_dim || trajectory.action_dim() != spec.action_dim)
    throw DomainError("trajectory dims do not match EnvSpec '" + spec.name + "'");
  if (trajectory.length() > spec.t_max)
    throw DomainError("trajectory longer than t_max (" + std::to_string(trajectory.length()) +
                      " > " + std::to_string(spec.t_max) + ")");
  if (!trajectory.is_synthetic() && !chain_consistent(trajectory))
    throw DomainError("trajectory violates chain consistency");
}

void TrajectoryBatch::validate() const {
  spec.validate();
  if (seeds.size() != trajectories.size())
    throw DomainError("batch: seed_record size does not match trajectory count");
  for (const auto& t : trajectories) validate_trajectory(t, spec);
}

}  // namespace mia
