#pragma once

#include <stdexcept>
#include <vector>

#include "mia/nn/tensor.hpp"

namespace mia::nn {

enum class OutputActivation { identity, tanh };

// Fully connected network with ReLU hidden layers. Inputs and outputs are
// column-batched: x is (in_dim x batch).
//
// forward() is const and only writes activations into the caller's Cache, so a
// frozen network can be evaluated concurrently and one network can sit at
// several places of a computation graph (one Cache per use).
template <typename S>
class Mlp {
 public:
  struct Cache {
    std::vector<Mat<S>> inputs;  // input to each layer
    std::vector<Mat<S>> pre;     // pre-activation of each layer
    Mat<S> out;
  };

  Mlp() = default;

  template <typename R>
  Mlp(const std::vector<int>& sizes, OutputActivation out_act, R& rng, const std::string& name = "mlp")
      : out_act_(out_act) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      weights_.emplace_back(name + ".w" + std::to_string(l), sizes[l + 1], sizes[l], true);
      biases_.emplace_back(name + ".b" + std::to_string(l), sizes[l + 1], 1, false);
      init_uniform_fan_in(weights_.back().value, static_cast<std::size_t>(sizes[l]), rng);
      init_uniform_fan_in(biases_.back().value, static_cast<std::size_t>(sizes[l]), rng);
    }
  }

  int in_dim() const { return static_cast<int>(weights_.front().value.cols()); }
  int out_dim() const { return static_cast<int>(weights_.back().value.rows()); }
  std::size_t layers() const { return weights_.size(); }

  Mat<S> forward(const Mat<S>& x, Cache* cache = nullptr) const {
    if (x.rows() != in_dim()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    if (cache) {
      cache->inputs.clear();
      cache->pre.clear();
    }
    Mat<S> h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Mat<S> z = weights_[l].value * h;
      z.colwise() += biases_[l].value.col(0);
      if (cache) {
        cache->inputs.push_back(h);
        cache->pre.push_back(z);
      }
      const bool last = l + 1 == weights_.size();
      if (!last) {
        h = relu(z);
      } else if (out_act_ == OutputActivation::tanh) {
        h = z.array().tanh().matrix();
      } else {
        h = std::move(z);
      }
    }
    if (cache) cache->out = h;
    return h;
  }

  // Backpropagates d(loss)/d(output); returns d(loss)/d(input). Parameter
  // gradients are accumulated unless accumulate == false.
  Mat<S> backward(const Mat<S>& grad_out, const Cache& cache, bool accumulate = true) {
    Mat<S> g = grad_out;
    if (out_act_ == OutputActivation::tanh) g = g.cwiseProduct((S(1) - cache.out.array().square()).matrix());
    for (std::size_t l = weights_.size(); l-- > 0;) {
      if (l + 1 != weights_.size()) g = relu_backward(g, cache.pre[l]);
      if (accumulate) {
        weights_[l].grad.noalias() += g * cache.inputs[l].transpose();
        biases_[l].grad += g.rowwise().sum();
      }
      g = (weights_[l].value.transpose() * g).eval();
    }
    return g;
  }

  ParamList<S> params() {
    ParamList<S> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.push_back(&weights_[l]);
      out.push_back(&biases_[l]);
    }
    return out;
  }

  std::vector<const Param<S>*> params() const {
    std::vector<const Param<S>*> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.push_back(&weights_[l]);
      out.push_back(&biases_[l]);
    }
    return out;
  }

  // Layer widths, input first.
  std::vector<int> sizes() const {
    std::vector<int> out{in_dim()};
    for (const auto& w : weights_) out.push_back(static_cast<int>(w.value.rows()));
    return out;
  }

  // theta <- tau * src + (1 - tau) * theta
  void soft_update_from(const Mlp& src, double tau) {
    const S t = static_cast<S>(tau);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      weights_[l].value = t * src.weights_[l].value + (S(1) - t) * weights_[l].value;
      biases_[l].value = t * src.biases_[l].value + (S(1) - t) * biases_[l].value;
    }
  }

 private:
  std::vector<Param<S>> weights_;
  std::vector<Param<S>> biases_;
  OutputActivation out_act_ = OutputActivation::identity;
};

}  // namespace mia::nn
