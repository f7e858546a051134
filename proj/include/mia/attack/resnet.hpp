#pragma once

#include <optional>
#include <vector>

#include "mia/nn/conv.hpp"

namespace mia {

struct ResNetConfig {
  int stages = 3;
  int blocks_per_stage = 2;
  int base_channels = 16;
  // Decoupled weight-decay coefficient used when training this architecture.
  double weight_decay = 1.0;
};

// Residual 2D convolutional classifier over the (L x m) plane with 2d^A input
// channels. A 3x3 stem, then `stages` stages of basic blocks (two 3x3 convs, identity
// or strided 1x1 projection shortcut); stage s has base * 2^s channels and
// halves the plane in its first block when s > 0. Global average pooling and an
// affine map give one logit. No normalization layers.
template <typename S>
class ResNetNet {
 public:
  struct BlockCache {
    typename nn::Conv2d<S>::Cache conv1, conv2, proj;
    nn::Mat<S> z1, sum;
    nn::Extent in, out;
  };
  struct Cache {
    typename nn::Conv2d<S>::Cache stem;
    nn::Mat<S> stem_pre;
    std::vector<BlockCache> blocks;
    nn::Mat<S> top;
    nn::Vec<S> pooled;
  };

  ResNetNet() = default;

  template <typename R>
  ResNetNet(int in_channels, const ResNetConfig& config, R& rng) : config_(config), in_channels_(in_channels) {
    stem_ = nn::Conv2d<S>(in_channels, config.base_channels, 3, 1, rng, "resnet.stem");
    int ch = config.base_channels;
    for (int s = 0; s < config.stages; ++s) {
      const int out_ch = config.base_channels << s;
      for (int k = 0; k < config.blocks_per_stage; ++k) {
        const int stride = (s > 0 && k == 0) ? 2 : 1;
        const std::string name = "resnet.s" + std::to_string(s) + ".b" + std::to_string(k);
        Block b;
        b.conv1 = nn::Conv2d<S>(ch, out_ch, 3, stride, rng, name + ".conv1");
        b.conv2 = nn::Conv2d<S>(out_ch, out_ch, 3, 1, rng, name + ".conv2");
        if (stride != 1 || ch != out_ch) b.proj = nn::Conv2d<S>(ch, out_ch, 1, stride, rng, name + ".proj");
        blocks_.push_back(std::move(b));
        ch = out_ch;
      }
    }
    head_ = nn::LogitHead<S>(ch, rng, "resnet.head");
  }

  const ResNetConfig& config() const { return config_; }
  int in_channels() const { return in_channels_; }

  S forward(const nn::Mat<S>& x, nn::Extent extent, Cache* cache = nullptr) const {
    nn::Mat<S> z = stem_.forward(x, extent, cache ? &cache->stem : nullptr);
    nn::Mat<S> h = nn::relu(z);
    if (cache) {
      cache->stem_pre = std::move(z);
      cache->blocks.assign(blocks_.size(), BlockCache{});
    }
    nn::Extent e = extent;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Block& b = blocks_[i];
      BlockCache* bc = cache ? &cache->blocks[i] : nullptr;
      nn::Mat<S> z1 = b.conv1.forward(h, e, bc ? &bc->conv1 : nullptr);
      const nn::Extent e1 = b.conv1.output_extent(e);
      nn::Mat<S> z2 = b.conv2.forward(nn::relu(z1), e1, bc ? &bc->conv2 : nullptr);
      nn::Mat<S> sum = b.proj ? nn::Mat<S>(z2 + b.proj->forward(h, e, bc ? &bc->proj : nullptr))
                              : nn::Mat<S>(z2 + h);
      h = nn::relu(sum);
      if (bc) {
        bc->z1 = std::move(z1);
        bc->sum = std::move(sum);
        bc->in = e;
        bc->out = e1;
      }
      e = e1;
    }
    nn::Vec<S> pooled = h.rowwise().mean();
    const S logit = head_.forward(pooled);
    if (cache) {
      cache->top = std::move(h);
      cache->pooled = std::move(pooled);
    }
    return logit;
  }

  nn::Mat<S> backward(S dlogit, const Cache& cache) {
    const nn::Vec<S> g_pooled = head_.backward(dlogit, cache.pooled);
    const Eigen::Index P = cache.top.cols();
    nn::Mat<S> g = g_pooled.replicate(1, P) / static_cast<S>(P);
    for (std::size_t i = blocks_.size(); i-- > 0;) {
      Block& b = blocks_[i];
      const BlockCache& bc = cache.blocks[i];
      const nn::Mat<S> g_sum = nn::relu_backward(g, bc.sum);
      const nn::Mat<S> g_a1 = b.conv2.backward(g_sum, bc.conv2);
      nn::Mat<S> g_in = b.conv1.backward(nn::relu_backward(g_a1, bc.z1), bc.conv1);
      if (b.proj)
        g_in += b.proj->backward(g_sum, bc.proj);
      else
        g_in += g_sum;
      g = std::move(g_in);
    }
    return stem_.backward(nn::relu_backward(g, cache.stem_pre), cache.stem);
  }

  nn::ParamList<S> params() {
    nn::ParamList<S> out = stem_.params();
    for (auto& b : blocks_) {
      for (auto* p : b.conv1.params()) out.push_back(p);
      for (auto* p : b.conv2.params()) out.push_back(p);
      if (b.proj)
        for (auto* p : b.proj->params()) out.push_back(p);
    }
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }

  nn::LogitHead<S>& head() { return head_; }

 private:
  struct Block {
    nn::Conv2d<S> conv1, conv2;
    std::optional<nn::Conv2d<S>> proj;
  };

  ResNetConfig config_;
  int in_channels_ = 0;
  nn::Conv2d<S> stem_;
  std::vector<Block> blocks_;
  nn::LogitHead<S> head_;
};

}  // namespace mia
