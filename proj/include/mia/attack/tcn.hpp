#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "mia/nn/conv.hpp"

namespace mia {

struct TcnConfig {
  int levels = 4;
  int channels = 32;
  int kernel = 3;
  double dropout = 0.5;

  // Two dilated convolutions per level with dilation 2^i.
  std::size_t receptive_field() const {
    return 1 + 2 * static_cast<std::size_t>(kernel - 1) * ((std::size_t{1} << levels) - 1);
  }
};

// Temporal convolutional classifier: `levels` residual blocks of two dilated
// causal convolutions (ReLU + dropout after each), a 1x1 projection on the skip
// path when the channel count changes, global average pooling over time and an
// affine map to one logit.
template <typename S>
class TcnNet {
 public:
  struct BlockCache {
    typename nn::CausalConv1d<S>::Cache conv1, conv2, down;
    nn::Mat<S> z1, z2, mask1, mask2, sum;
  };
  struct Cache {
    std::vector<BlockCache> blocks;
    nn::Mat<S> top;  // output of the last block
    nn::Vec<S> pooled;
  };

  TcnNet() = default;

  template <typename R>
  TcnNet(int in_channels, const TcnConfig& config, R& rng) : config_(config), in_channels_(in_channels) {
    int ch_in = in_channels;
    for (int i = 0; i < config.levels; ++i) {
      Block b;
      const int dilation = 1 << i;
      const std::string name = "tcn.block" + std::to_string(i);
      b.conv1 = nn::CausalConv1d<S>(ch_in, config.channels, config.kernel, dilation, rng, name + ".conv1");
      b.conv2 = nn::CausalConv1d<S>(config.channels, config.channels, config.kernel, dilation, rng,
                                    name + ".conv2");
      if (ch_in != config.channels)
        b.down = nn::CausalConv1d<S>(ch_in, config.channels, 1, 1, rng, name + ".down");
      blocks_.push_back(std::move(b));
      ch_in = config.channels;
    }
    head_ = nn::LogitHead<S>(config.channels, rng, "tcn.head");
  }

  const TcnConfig& config() const { return config_; }
  int in_channels() const { return in_channels_; }

  // Dropout is active iff dropout_rng is non-null.
  template <typename R = std::mt19937_64>
  S forward(const nn::Mat<S>& x, Cache* cache = nullptr, R* dropout_rng = nullptr) const {
    if (cache) cache->blocks.assign(blocks_.size(), BlockCache{});
    nn::Mat<S> h = x;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Block& b = blocks_[i];
      BlockCache* bc = cache ? &cache->blocks[i] : nullptr;
      nn::Mat<S> z1 = b.conv1.forward(h, bc ? &bc->conv1 : nullptr);
      nn::Mat<S> a1 = nn::relu(z1);
      nn::Mat<S> m1 = dropout_mask(a1.rows(), a1.cols(), dropout_rng);
      if (m1.size()) a1 = a1.cwiseProduct(m1);
      nn::Mat<S> z2 = b.conv2.forward(a1, bc ? &bc->conv2 : nullptr);
      nn::Mat<S> a2 = nn::relu(z2);
      nn::Mat<S> m2 = dropout_mask(a2.rows(), a2.cols(), dropout_rng);
      if (m2.size()) a2 = a2.cwiseProduct(m2);
      nn::Mat<S> sum = b.down ? nn::Mat<S>(a2 + b.down->forward(h, bc ? &bc->down : nullptr)) : nn::Mat<S>(a2 + h);
      h = nn::relu(sum);
      if (bc) {
        bc->z1 = std::move(z1);
        bc->z2 = std::move(z2);
        bc->mask1 = std::move(m1);
        bc->mask2 = std::move(m2);
        bc->sum = std::move(sum);
      }
    }
    nn::Vec<S> pooled = h.rowwise().mean();
    const S logit = head_.forward(pooled);
    if (cache) {
      cache->top = std::move(h);
      cache->pooled = std::move(pooled);
    }
    return logit;
  }

  // Accumulates parameter gradients for d(loss)/d(logit) = dlogit; returns d(loss)/d(input).
  nn::Mat<S> backward(S dlogit, const Cache& cache) {
    const nn::Vec<S> g_pooled = head_.backward(dlogit, cache.pooled);
    const Eigen::Index L = cache.top.cols();
    nn::Mat<S> g = g_pooled.replicate(1, L) / static_cast<S>(L);
    for (std::size_t i = blocks_.size(); i-- > 0;) {
      Block& b = blocks_[i];
      const BlockCache& bc = cache.blocks[i];
      const nn::Mat<S> g_sum = nn::relu_backward(g, bc.sum);
      nn::Mat<S> g_a2 = g_sum;
      if (bc.mask2.size()) g_a2 = g_a2.cwiseProduct(bc.mask2);
      const nn::Mat<S> g_h1 = b.conv2.backward(nn::relu_backward(g_a2, bc.z2), bc.conv2);
      nn::Mat<S> g_a1 = g_h1;
      if (bc.mask1.size()) g_a1 = g_a1.cwiseProduct(bc.mask1);
      nn::Mat<S> g_in = b.conv1.backward(nn::relu_backward(g_a1, bc.z1), bc.conv1);
      if (b.down)
        g_in += b.down->backward(g_sum, bc.down);
      else
        g_in += g_sum;
      g = std::move(g_in);
    }
    return g;
  }

  nn::ParamList<S> params() {
    nn::ParamList<S> out;
    for (auto& b : blocks_) {
      for (auto* p : b.conv1.params()) out.push_back(p);
      for (auto* p : b.conv2.params()) out.push_back(p);
      if (b.down)
        for (auto* p : b.down->params()) out.push_back(p);
    }
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }

  nn::LogitHead<S>& head() { return head_; }
  nn::CausalConv1d<S>& conv(std::size_t block, int which) {
    return which == 0 ? blocks_[block].conv1 : blocks_[block].conv2;
  }

 private:
  struct Block {
    nn::CausalConv1d<S> conv1, conv2;
    std::optional<nn::CausalConv1d<S>> down;
  };

  template <typename R>
  nn::Mat<S> dropout_mask(Eigen::Index rows, Eigen::Index cols, R* rng) const {
    if (!rng || config_.dropout <= 0.0) return {};
    std::bernoulli_distribution keep(1.0 - config_.dropout);
    const S scale = static_cast<S>(1.0 / (1.0 - config_.dropout));
    nn::Mat<S> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(*rng) ? scale : S(0);
    return m;
  }

  TcnConfig config_;
  int in_channels_ = 0;
  std::vector<Block> blocks_;
  nn::LogitHead<S> head_;
};

}  // namespace mia
