#pragma once

#include <cmath>

#include "mia/nn/tensor.hpp"

namespace mia::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled (AdamW-style) decay: w <- w - lr * weight_decay * w, applied to
  // parameters flagged `decay`.
  double weight_decay = 0.0;
};

template <typename S>
class Adam {
 public:
  Adam() = default;
  Adam(ParamList<S> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    for (auto* p : params_) {
      m_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const S lr = static_cast<S>(config_.learning_rate);
    const S b1 = static_cast<S>(config_.beta1), b2 = static_cast<S>(config_.beta2);
    const S eps = static_cast<S>(config_.epsilon);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param<S>& p = *params_[i];
      if (config_.weight_decay != 0.0 && p.decay)
        p.value *= static_cast<S>(1.0 - config_.learning_rate * config_.weight_decay);
      m_[i] = b1 * m_[i] + (S(1) - b1) * p.grad;
      v_[i] = b2 * v_[i] + (S(1) - b2) * p.grad.cwiseProduct(p.grad);
      const auto m_hat = m_[i].array() / static_cast<S>(c1);
      const auto v_hat = v_[i].array() / static_cast<S>(c2);
      p.value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
    }
  }

  void zero_grad() { zero_grads(params_); }
  const AdamConfig& config() const { return config_; }

 private:
  ParamList<S> params_;
  AdamConfig config_;
  std::vector<Mat<S>> m_;
  std::vector<Mat<S>> v_;
  long long t_ = 0;
};

}  // namespace mia::nn
