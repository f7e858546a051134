#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mia/env/env_spec.hpp"

namespace mia {

// Where a trajectory batch came from. Members trained the target policy,
// nonmembers did not, model outputs were rolled out by the trained policy.
enum class SourceTag { member, nonmember, model_output };

std::string_view to_string(SourceTag tag);
SourceTag parse_source_tag(std::string_view text);

// One (s, a, r, s') tuple. Stored in single precision.
struct Transition {
  std::vector<float> state;
  std::vector<float> action;
  float reward = 0.0F;
  std::vector<float> next_state;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

// Ordered chain of transitions from reset to termination. Immutable once built.
//
// The regular constructor enforces the chain invariants (matching dims,
// next_state[i] == state[i + 1], terminal only on the last tuple). Synthetic
// trajectories assembled from pooled tuples skip the chain checks; see
// Trajectory::synthetic.
class Trajectory {
 public:
  explicit Trajectory(std::vector<Transition> transitions);

  static Trajectory synthetic(std::vector<Transition> transitions);

  std::size_t length() const { return transitions_.size(); }
  std::size_t state_dim() const { return transitions_.front().state.size(); }
  std::size_t action_dim() const { return transitions_.front().action.size(); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& operator[](std::size_t i) const { return transitions_[i]; }
  bool is_synthetic() const { return synthetic_; }

  std::vector<double> rewards() const;

  bool operator==(const Trajectory& other) const { return transitions_ == other.transitions_; }

 private:
  Trajectory(std::vector<Transition> transitions, bool synthetic);

  std::vector<Transition> transitions_;
  bool synthetic_ = false;
};

// Throws DomainError describing the first violated invariant. Chain checks are
// skipped for synthetic trajectories; dims and T <= t_max are always checked.
void validate_trajectory(const Trajectory& trajectory, const EnvSpec& spec);

// True when every consecutive pair satisfies next_state == state of the successor.
bool chain_consistent(const Trajectory& trajectory);

struct TrajectoryBatch {
  EnvSpec spec;
  SourceTag source = SourceTag::member;
  std::vector<Trajectory> trajectories;
  std::vector<std::int64_t> seeds;  // reset seed of trajectories[i]

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }

  // Checks per-trajectory validity against spec and seeds.size() == size().
  void validate() const;
};

}  // namespace mia
