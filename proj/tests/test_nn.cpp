#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "mia/nn/adam.hpp"
#include "mia/nn/archive.hpp"
#include "mia/nn/conv.hpp"
#include "mia/nn/mlp.hpp"
#include "oracles.hpp"

using namespace mia;
using nn::Mat;

namespace {

// Sum of w .* f(params) for a fixed random w: a scalar loss whose gradient
// with respect to the output is w.
template <typename F>
double central_difference(nn::Param<double>& p, Eigen::Index i, F&& loss, double h = 1e-6) {
  const double saved = p.value.data()[i];
  p.value.data()[i] = saved + h;
  const double up = loss();
  p.value.data()[i] = saved - h;
  const double down = loss();
  p.value.data()[i] = saved;
  return (up - down) / (2.0 * h);
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

}  // namespace

TEST(CausalConv1d, MatchesDirectSummation) {
  std::mt19937_64 rng(1);
  for (int dilation : {1, 2, 4})
    for (int kernel : {1, 2, 3}) {
      nn::CausalConv1d<double> conv(3, 4, kernel, dilation, rng, "c");
      Mat<double> x = Mat<double>::Random(3, 9);
      const Mat<double> y = conv.forward(x);
      std::vector<std::vector<double>> xs(3, std::vector<double>(9)), w(4);
      std::vector<double> b(4);
      for (int c = 0; c < 3; ++c)
        for (int t = 0; t < 9; ++t) xs[c][t] = x(c, t);
      for (int o = 0; o < 4; ++o) {
        for (int j = 0; j < conv.weight().value.cols(); ++j) w[o].push_back(conv.weight().value(o, j));
        b[o] = conv.bias().value(o, 0);
      }
      const auto ref = oracle::causal_conv(xs, w, b, kernel, dilation);
      for (int o = 0; o < 4; ++o)
        for (int t = 0; t < 9; ++t) EXPECT_NEAR(y(o, t), ref[o][t], 1e-12);
    }
}

TEST(CausalConv1d, IsCausal) {
  std::mt19937_64 rng(2);
  nn::CausalConv1d<double> conv(2, 2, 3, 2, rng, "c");
  Mat<double> x = Mat<double>::Random(2, 10);
  const Mat<double> y = conv.forward(x);
  x.col(7).setConstant(100.0);
  const Mat<double> y2 = conv.forward(x);
  EXPECT_TRUE(y.leftCols(7).isApprox(y2.leftCols(7)));
  EXPECT_FALSE(y.col(7).isApprox(y2.col(7)));
}

TEST(CausalConv1d, BiasGradientIsRowSumOfUpstream) {
  std::mt19937_64 rng(3);
  nn::CausalConv1d<double> conv(2, 3, 3, 1, rng, "c");
  const Mat<double> x = Mat<double>::Random(2, 6);
  typename nn::CausalConv1d<double>::Cache cache;
  conv.forward(x, &cache);
  const Mat<double> gy = Mat<double>::Random(3, 6);
  conv.backward(gy, cache);
  EXPECT_TRUE(conv.bias().grad.isApprox(gy.rowwise().sum(), 1e-14));
}

TEST(CausalConv1d, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  nn::CausalConv1d<double> conv(2, 3, 2, 2, rng, "c");
  Mat<double> x = Mat<double>::Random(2, 7);
  const Mat<double> w = Mat<double>::Random(3, 7);
  typename nn::CausalConv1d<double>::Cache cache;
  conv.forward(x, &cache);
  const Mat<double> gx = conv.backward(w, cache);
  auto loss = [&] { return conv.forward(x).cwiseProduct(w).sum(); };
  for (auto* p : conv.params())
    for (Eigen::Index i = 0; i < p->size(); ++i)
      EXPECT_LT(relative_error(p->grad.data()[i], central_difference(*p, i, loss)), 1e-6);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + 1e-6;
    const double up = loss();
    x.data()[i] = saved - 1e-6;
    const double down = loss();
    x.data()[i] = saved;
    EXPECT_LT(relative_error(gx.data()[i], (up - down) / 2e-6), 1e-6);
  }
}

TEST(Conv2d, OutputExtentAndGradients) {
  std::mt19937_64 rng(5);
  nn::Conv2d<double> conv(2, 3, 3, 2, rng, "c");
  const nn::Extent in{5, 4};
  EXPECT_EQ(conv.output_extent(in), (nn::Extent{3, 2}));
  const Mat<double> x = Mat<double>::Random(2, in.pixels());
  const Mat<double> w = Mat<double>::Random(3, 6);
  typename nn::Conv2d<double>::Cache cache;
  conv.forward(x, in, &cache);
  conv.backward(w, cache);
  auto loss = [&] { return conv.forward(x, in).cwiseProduct(w).sum(); };
  for (auto* p : conv.params())
    for (Eigen::Index i = 0; i < p->size(); ++i)
      EXPECT_LT(relative_error(p->grad.data()[i], central_difference(*p, i, loss)), 1e-6);
  EXPECT_THROW(conv.forward(Mat<double>::Random(2, 3), in), std::invalid_argument);
}

TEST(Conv2d, OneByOneKernelIsChannelMix) {
  std::mt19937_64 rng(6);
  nn::Conv2d<double> conv(3, 2, 1, 1, rng, "c");
  const Mat<double> x = Mat<double>::Random(3, 12);
  const Mat<double> y = conv.forward(x, {3, 4});
  auto params = conv.params();
  const Mat<double> expect = (params[0]->value * x).colwise() + params[1]->value.col(0);
  EXPECT_TRUE(y.isApprox(expect, 1e-14));
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (auto act : {nn::OutputActivation::identity, nn::OutputActivation::tanh}) {
    nn::Mlp<double> net({3, 5, 4, 2}, act, rng, "m");
    const Mat<double> x = Mat<double>::Random(3, 6);
    const Mat<double> w = Mat<double>::Random(2, 6);
    typename nn::Mlp<double>::Cache cache;
    net.forward(x, &cache);
    const Mat<double> gx = net.backward(w, cache);
    auto loss = [&] { return net.forward(x).cwiseProduct(w).sum(); };
    for (auto* p : net.params())
      for (Eigen::Index i = 0; i < p->size(); ++i)
        EXPECT_LT(relative_error(p->grad.data()[i], central_difference(*p, i, loss)), 1e-6);
    EXPECT_EQ(gx.rows(), 3);
  }
}

TEST(Mlp, BackwardWithoutAccumulationLeavesGradients) {
  std::mt19937_64 rng(8);
  nn::Mlp<double> net({2, 4, 1}, nn::OutputActivation::identity, rng);
  typename nn::Mlp<double>::Cache cache;
  net.forward(Mat<double>::Random(2, 3), &cache);
  net.backward(Mat<double>::Ones(1, 3), cache, false);
  for (auto* p : net.params()) EXPECT_EQ(p->grad.norm(), 0.0);
}

TEST(Mlp, SoftUpdateInterpolates) {
  std::mt19937_64 rng(9);
  nn::Mlp<double> a({2, 3, 1}, nn::OutputActivation::identity, rng);
  nn::Mlp<double> b({2, 3, 1}, nn::OutputActivation::identity, rng);
  const double before = a.params()[0]->value(0, 0), src = b.params()[0]->value(0, 0);
  a.soft_update_from(b, 0.25);
  EXPECT_NEAR(a.params()[0]->value(0, 0), 0.25 * src + 0.75 * before, 1e-15);
  a.soft_update_from(b, 1.0);
  EXPECT_EQ(a.params()[0]->value, b.params()[0]->value);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  nn::Param<double> p("p", 2, 1);
  p.value << 1.0, -1.0;
  p.grad << 0.5, -3.0;
  nn::Adam<double> opt({&p}, nn::AdamConfig{0.1});
  opt.step();
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-7);
  EXPECT_NEAR(p.value(1, 0), -0.9, 1e-7);
}

TEST(Adam, DecoupledDecayOnlyOnFlaggedParams) {
  nn::Param<double> w("w", 1, 1, true), b("b", 1, 1, false);
  w.value(0, 0) = 2.0;
  b.value(0, 0) = 2.0;
  nn::AdamConfig c;
  c.learning_rate = 0.01;
  c.weight_decay = 1.0;
  nn::Adam<double> opt({&w, &b}, c);
  opt.step();
  EXPECT_NEAR(w.value(0, 0), 2.0 * 0.99, 1e-12);
  EXPECT_EQ(b.value(0, 0), 2.0);
}

TEST(Adam, MinimisesQuadratic) {
  nn::Param<double> p("p", 3, 1);
  p.value << 4.0, -2.0, 1.0;
  nn::Adam<double> opt({&p}, nn::AdamConfig{0.05});
  for (int i = 0; i < 2000; ++i) {
    opt.zero_grad();
    p.grad = 2.0 * p.value;
    opt.step();
  }
  EXPECT_LT(p.value.norm(), 1e-3);
}

TEST(Archive, TensorsRoundTripAndMismatchThrows) {
  std::mt19937_64 rng(10);
  nn::Mlp<double> a({2, 3, 1}, nn::OutputActivation::identity, rng, "net");
  nn::Mlp<double> b({2, 3, 1}, nn::OutputActivation::identity, rng, "net");
  const auto path = std::filesystem::temp_directory_path() / "mia_test_archive.json";
  nn::save_archive(path, nn::make_archive("unit", nullptr, {}, {}, nn::tensors_to_json(a.params())));
  const auto archive = nn::load_archive(path, "unit");
  nn::tensors_from_json(b.params(), archive.at("tensors"));
  const Mat<double> x = Mat<double>::Random(2, 4);
  EXPECT_EQ(a.forward(x), b.forward(x));
  EXPECT_ANY_THROW(nn::load_archive(path, "other"));
  nn::Mlp<double> c({2, 4, 1}, nn::OutputActivation::identity, rng, "net");
  EXPECT_ANY_THROW(nn::tensors_from_json(c.params(), archive.at("tensors")));
  std::filesystem::remove(path);
}

TEST(Loss, StableBinaryCrossEntropy) {
  EXPECT_NEAR(nn::bce_with_logit(0.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(nn::bce_with_logit(800.0, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(nn::bce_with_logit(-800.0, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(nn::bce_with_logit(3.0, 0.0), -std::log(1.0 - nn::sigmoid(3.0)), 1e-12);
  EXPECT_EQ(nn::sigmoid(0.0), 0.5);
}
