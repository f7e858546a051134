#pragma once

// Shared builders for the unit tests and the acceptance binary.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mia/attack/dataset.hpp"

namespace fixture {

inline mia::ActionTrajectory random_actions(std::size_t dim, std::size_t t, std::int64_t seed, mia::SourceTag origin,
                                            std::mt19937_64& rng) {
  mia::ActionTrajectory at;
  at.actions = Eigen::MatrixXf(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(t));
  std::uniform_real_distribution<float> u(-1.0F, 1.0F);
  for (Eigen::Index i = 0; i < at.actions.size(); ++i) at.actions.data()[i] = u(rng);
  at.origin = origin;
  at.seed = seed;
  return at;
}

// Member pairs hold identical halves, nonmember pairs unrelated ones.
inline mia::AttackDataset separable_dataset(std::size_t n, std::size_t dim, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mia::AttackDataset ds;
  ds.action_dim = dim;
  ds.clip_length = length;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const auto s = static_cast<std::int64_t>(i);
    const mia::ActionTrajectory a = random_actions(dim, length, s, mia::SourceTag::member, rng);
    mia::ActionTrajectory out = label ? a : random_actions(dim, length, s, mia::SourceTag::model_output, rng);
    out.origin = mia::SourceTag::model_output;
    ds.pairs.push_back(mia::make_pair(a, out, length, label));
    ds.splits.push_back(mia::split_for_seed(s, mia::SplitRatios{}));
  }
  return ds;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Attack and metrics sources that include trainer or oracle headers or name
// trainer internals. `scanned` receives the number of files read.
inline std::vector<std::filesystem::path> black_box_violations(const std::filesystem::path& root,
                                                               std::size_t* scanned = nullptr) {
  const std::regex forbidden(R"(#include\s+"mia/(trainer|oracle)/|Bcq|ReplayBuffer|replay_buffer)");
  std::vector<std::filesystem::path> out;
  std::size_t n = 0;
  for (const auto& dir : {root / "src" / "attack", root / "include" / "mia" / "attack", root / "src" / "metrics",
                          root / "include" / "mia" / "metrics"})
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      ++n;
      if (std::regex_search(read_file(entry.path()), forbidden)) out.push_back(entry.path());
    }
  if (scanned) *scanned = n;
  return out;
}

}  // namespace fixture
