#pragma once

#include <vector>

#include "mia/core/types.hpp"
#include "mia/nn/tensor.hpp"

namespace mia::nn {

// Column-batched view of sampled transitions (one column per tuple).
struct TupleBatch {
  Mat<double> state, action, reward, next_state, not_done;
};

inline TupleBatch gather(const std::vector<Transition>& ts, std::size_t ds, std::size_t da) {
  const auto n = static_cast<Eigen::Index>(ts.size());
  TupleBatch b{Mat<double>(ds, n), Mat<double>(da, n), Mat<double>(1, n), Mat<double>(ds, n), Mat<double>(1, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = ts[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < ds; ++i) {
      b.state(static_cast<Eigen::Index>(i), j) = t.state[i];
      b.next_state(static_cast<Eigen::Index>(i), j) = t.next_state[i];
    }
    for (std::size_t i = 0; i < da; ++i) b.action(static_cast<Eigen::Index>(i), j) = t.action[i];
    b.reward(0, j) = t.reward;
    b.not_done(0, j) = t.terminal ? 0.0 : 1.0;
  }
  return b;
}

inline Mat<double> vstack(const Mat<double>& top, const Mat<double>& bottom) {
  Mat<double> out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

// {in, hidden..., out}
inline std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace mia::nn
