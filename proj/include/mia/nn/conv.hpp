#pragma once

#include <stdexcept>

#include "mia/nn/tensor.hpp"

namespace mia::nn {

// Dilated causal 1D convolution over a (channels x time) matrix. Output step t
// sees inputs t, t - d, ..., t - (k - 1) d; missing history is zero (left padding),
// so the output has the input's length.
//
// Weight layout: (out_channels x k * in_channels), column j * in_channels + c
// holds tap j (time offset -(k - 1 - j) * d) of input channel c.
template <typename S>
class CausalConv1d {
 public:
  struct Cache {
    Mat<S> cols;
  };

  CausalConv1d() = default;

  template <typename R>
  CausalConv1d(int in_ch, int out_ch, int kernel, int dilation, R& rng, const std::string& name)
      : in_(in_ch), out_(out_ch), k_(kernel), d_(dilation),
        w_(name + ".w", out_ch, kernel * in_ch, true),
        b_(name + ".b", out_ch, 1, false) {
    if (in_ch <= 0 || out_ch <= 0 || kernel <= 0 || dilation <= 0)
      throw std::invalid_argument("CausalConv1d: sizes must be positive");
    init_uniform_fan_in(w_.value, static_cast<std::size_t>(kernel * in_ch), rng);
    init_uniform_fan_in(b_.value, static_cast<std::size_t>(kernel * in_ch), rng);
  }

  Mat<S> forward(const Mat<S>& x, Cache* cache = nullptr) const {
    if (x.rows() != in_) throw std::invalid_argument("CausalConv1d: channel mismatch");
    const Eigen::Index L = x.cols();
    Mat<S> cols = Mat<S>::Zero(static_cast<Eigen::Index>(k_) * in_, L);
    for (int j = 0; j < k_; ++j) {
      const Eigen::Index shift = static_cast<Eigen::Index>(k_ - 1 - j) * d_;
      if (shift >= L) continue;
      cols.block(static_cast<Eigen::Index>(j) * in_, shift, in_, L - shift) = x.leftCols(L - shift);
    }
    Mat<S> y = w_.value * cols;
    y.colwise() += b_.value.col(0);
    if (cache) cache->cols = std::move(cols);
    return y;
  }

  Mat<S> backward(const Mat<S>& gy, const Cache& cache) {
    w_.grad.noalias() += gy * cache.cols.transpose();
    b_.grad += gy.rowwise().sum();
    const Mat<S> gcols = w_.value.transpose() * gy;
    const Eigen::Index L = gy.cols();
    Mat<S> gx = Mat<S>::Zero(in_, L);
    for (int j = 0; j < k_; ++j) {
      const Eigen::Index shift = static_cast<Eigen::Index>(k_ - 1 - j) * d_;
      if (shift >= L) continue;
      gx.leftCols(L - shift) += gcols.block(static_cast<Eigen::Index>(j) * in_, shift, in_, L - shift);
    }
    return gx;
  }

  ParamList<S> params() { return {&w_, &b_}; }
  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }
  const Param<S>& weight() const { return w_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }
  int dilation() const { return d_; }

 private:
  int in_ = 0, out_ = 0, k_ = 1, d_ = 1;
  Param<S> w_, b_;
};

// Spatial size of a feature map stored as (channels x height * width), pixel
// (y, x) in column y * width + x.
struct Extent {
  int height = 0;
  int width = 0;
  int pixels() const { return height * width; }
  bool operator==(const Extent&) const = default;
};

// Square-kernel 2D convolution with zero padding k / 2 and a stride.
// Weight layout: (out_channels x k * k * in_channels), column
// (ky * k + kx) * in_channels + c.
template <typename S>
class Conv2d {
 public:
  struct Cache {
    Mat<S> cols;
    Extent in;
  };

  Conv2d() = default;

  template <typename R>
  Conv2d(int in_ch, int out_ch, int kernel, int stride, R& rng, const std::string& name)
      : in_(in_ch), out_(out_ch), k_(kernel), stride_(stride),
        w_(name + ".w", out_ch, kernel * kernel * in_ch, true),
        b_(name + ".b", out_ch, 1, false) {
    if (in_ch <= 0 || out_ch <= 0 || kernel <= 0 || kernel % 2 == 0 || stride <= 0)
      throw std::invalid_argument("Conv2d: positive sizes and an odd kernel required");
    init_uniform_fan_in(w_.value, static_cast<std::size_t>(kernel * kernel * in_ch), rng);
    init_uniform_fan_in(b_.value, static_cast<std::size_t>(kernel * kernel * in_ch), rng);
  }

  Extent output_extent(Extent in) const {
    const int pad = k_ / 2;
    return {(in.height + 2 * pad - k_) / stride_ + 1, (in.width + 2 * pad - k_) / stride_ + 1};
  }

  Mat<S> forward(const Mat<S>& x, Extent in, Cache* cache = nullptr) const {
    if (x.rows() != in_ || x.cols() != in.pixels())
      throw std::invalid_argument("Conv2d: input shape mismatch");
    const Extent o = output_extent(in);
    const int pad = k_ / 2;
    Mat<S> cols = Mat<S>::Zero(static_cast<Eigen::Index>(k_) * k_ * in_, o.pixels());
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const Eigen::Index row0 = static_cast<Eigen::Index>(ky * k_ + kx) * in_;
        for (int oy = 0; oy < o.height; ++oy) {
          const int iy = oy * stride_ - pad + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int ox = 0; ox < o.width; ++ox) {
            const int ix = ox * stride_ - pad + kx;
            if (ix < 0 || ix >= in.width) continue;
            cols.block(row0, oy * o.width + ox, in_, 1) = x.col(iy * in.width + ix);
          }
        }
      }
    }
    Mat<S> y = w_.value * cols;
    y.colwise() += b_.value.col(0);
    if (cache) {
      cache->cols = std::move(cols);
      cache->in = in;
    }
    return y;
  }

  Mat<S> backward(const Mat<S>& gy, const Cache& cache) {
    w_.grad.noalias() += gy * cache.cols.transpose();
    b_.grad += gy.rowwise().sum();
    const Mat<S> gcols = w_.value.transpose() * gy;
    const Extent in = cache.in;
    const Extent o = output_extent(in);
    const int pad = k_ / 2;
    Mat<S> gx = Mat<S>::Zero(in_, in.pixels());
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const Eigen::Index row0 = static_cast<Eigen::Index>(ky * k_ + kx) * in_;
        for (int oy = 0; oy < o.height; ++oy) {
          const int iy = oy * stride_ - pad + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int ox = 0; ox < o.width; ++ox) {
            const int ix = ox * stride_ - pad + kx;
            if (ix < 0 || ix >= in.width) continue;
            gx.col(iy * in.width + ix) += gcols.block(row0, oy * o.width + ox, in_, 1);
          }
        }
      }
    }
    return gx;
  }

  ParamList<S> params() { return {&w_, &b_}; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

 private:
  int in_ = 0, out_ = 0, k_ = 3, stride_ = 1;
  Param<S> w_, b_;
};

// Affine map from a feature vector to a single logit.
template <typename S>
class LogitHead {
 public:
  LogitHead() = default;

  template <typename R>
  LogitHead(int in_features, R& rng, const std::string& name)
      : w_(name + ".w", 1, in_features, true), b_(name + ".b", 1, 1, false) {
    init_uniform_fan_in(w_.value, static_cast<std::size_t>(in_features), rng);
    init_uniform_fan_in(b_.value, static_cast<std::size_t>(in_features), rng);
  }

  S forward(const Vec<S>& features) const { return (w_.value * features)(0, 0) + b_.value(0, 0); }

  Vec<S> backward(S dlogit, const Vec<S>& features) {
    w_.grad += dlogit * features.transpose();
    b_.grad(0, 0) += dlogit;
    return w_.value.transpose() * dlogit;
  }

  ParamList<S> params() { return {&w_, &b_}; }
  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }

 private:
  Param<S> w_, b_;
};

}  // namespace mia::nn
