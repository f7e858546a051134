#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mia::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Trainable tensor with its gradient accumulator.
template <typename S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;
  bool decay = true;  // subject to weight decay (weights yes, biases no)

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols, bool d = true)
      : name(std::move(n)), value(Mat<S>::Zero(rows, cols)), grad(Mat<S>::Zero(rows, cols)), decay(d) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

template <typename S>
using ParamList = std::vector<Param<S>*>;

template <typename S>
void zero_grads(const ParamList<S>& params) {
  for (auto* p : params) p->zero_grad();
}

template <typename S>
std::size_t count_params(const ParamList<S>& params) {
  std::size_t n = 0;
  for (auto* p : params) n += static_cast<std::size_t>(p->size());
  return n;
}

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the usual dense/conv default.
template <typename S, typename R>
void init_uniform_fan_in(Mat<S>& m, std::size_t fan_in, R& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(u(rng));
}

template <typename S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

// grad * 1[pre > 0]
template <typename S>
Mat<S> relu_backward(const Mat<S>& grad, const Mat<S>& pre) {
  return (pre.array() > S(0)).select(grad, S(0));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Numerically stable binary cross-entropy on a logit.
inline double bce_with_logit(double logit, double label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

template <typename S>
bool all_finite(const ParamList<S>& params) {
  for (auto* p : params)
    if (!p->value.allFinite()) return false;
  return true;
}

// Flat copies of parameter values, used for best-epoch snapshots and archives.
template <typename S>
std::vector<Mat<S>> snapshot(const ParamList<S>& params) {
  std::vector<Mat<S>> out;
  out.reserve(params.size());
  for (auto* p : params) out.push_back(p->value);
  return out;
}

template <typename S>
void restore(const ParamList<S>& params, const std::vector<Mat<S>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace mia::nn
