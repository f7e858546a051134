#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mia/core/types.hpp"

namespace mia {

// Trajectory batches are stored as JSON Lines.
//
// Line 1 (header):
//   {"format":"mia-trajectories","version":1,"source":<tag>,"count":N,
//    "env":{"name","state_dim","action_dim","action_low","action_high","t_max"}}
// Lines 2..N+1 (one record per trajectory, in batch order):
//   {"id":i,"seed":s,"T":T,"synthetic":bool,
//    "state":[T*dS],"action":[T*dA],"reward":[T],"next_state":[T*dS],"terminal":[T]}
// Vectors are flattened tuple-major (tuple 0 first). Values are float32 written
// with round-trip precision, so a reload is bit-exact.
inline constexpr int kTrajectoryFormatVersion = 1;

void write_trajectory_batch(std::ostream& out, const TrajectoryBatch& batch);
void save_trajectory_batch(const std::filesystem::path& path, const TrajectoryBatch& batch);

// When `expected` is given, a header whose dims, bounds or t_max differ is
// rejected with FormatError.
TrajectoryBatch read_trajectory_batch(std::istream& in,
                                      const std::optional<EnvSpec>& expected = std::nullopt);
TrajectoryBatch load_trajectory_batch(const std::filesystem::path& path,
                                      const std::optional<EnvSpec>& expected = std::nullopt);

}  // namespace mia
