// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "videxit/errors.hpp"
#include "videxit/layers.hpp"

using namespace videxit;

namespace {

ClipTensor seq(const std::vector<float>& values) {
  return ClipTensor({1, values.size(), 1, 1}, values);
}

std::vector<float> flat(const ClipTensor& c) { return {c.data().begin(), c.data().end()}; }

CausalConvSpec conv1d(std::vector<float> w, std::size_t stride, std::size_t front) {
  CausalConvSpec s;
  s.kernel = {w.size(), 1, 1};
  s.stride = {stride, 1, 1};
  s.front_replicate = front;
  s.weights = std::move(w);
  return s;
}

ClipTensor random_clip(std::mt19937_64& rng, ClipShape shape) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  ClipTensor c(shape);
  for (auto& v : c.data()) v = u(rng);
  return c;
}

}  // namespace

TEST(CausalConv, IdentityKernelCopiesInput) {
  const auto out = causal_conv3d(seq({1, -2, 3.5f}), conv1d({1.0f}, 1, 0));
  EXPECT_EQ(flat(out), (std::vector<float>{1, -2, 3.5f}));
}

TEST(CausalConv, FrontReplicatedSumOfThree) {
  const auto spec = conv1d({1, 1, 1}, 1, 2);
  EXPECT_EQ(flat(causal_conv3d(seq({1, 2, 3}), spec)), (std::vector<float>{3, 4, 6}));
  EXPECT_EQ(flat(causal_conv3d(seq({1, 2}), spec)), (std::vector<float>{3, 4}));
}

TEST(CausalConv, SymmetricPaddingMapsToDoubleFront) {
  EXPECT_EQ(CausalConvSpec::front_for_symmetric_padding(0), 0u);
  EXPECT_EQ(CausalConvSpec::front_for_symmetric_padding(1), 2u);
  EXPECT_EQ(CausalConvSpec::front_for_symmetric_padding(3), 6u);
}

TEST(CausalConv, MatchesMaterializedPaddingOracle) {
  std::mt19937_64 rng(11);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int trial = 0; trial < 60; ++trial) {
    oracle::ConvParams p;
    p.in = pick(1, 3);
    p.out = pick(1, 3);
    p.kt = pick(1, 3);
    p.kh = pick(1, 3);
    p.kw = pick(1, 3);
    p.st = pick(1, 2);
    p.sh = pick(1, 2);
    p.sw = pick(1, 2);
    p.ph = pick(0, 1);
    p.pw = pick(0, 1);
    p.front = pick(0, p.kt);
    p.weights.resize(p.out * p.in * p.kt * p.kh * p.kw);
    for (auto& w : p.weights) w = g(rng);
    if (pick(0, 1)) {
      p.bias.resize(p.out);
      for (auto& b : p.bias) b = g(rng);
    }
    const std::size_t T = pick(std::max<std::size_t>(1, p.kt > p.front ? p.kt - p.front : 1), 9);
    const ClipShape shape{p.in, T, pick(3, 6), pick(3, 6)};
    const ClipTensor x = random_clip(rng, shape);

    CausalConvSpec spec;
    spec.in_channels = p.in;
    spec.out_channels = p.out;
    spec.kernel = {p.kt, p.kh, p.kw};
    spec.stride = {p.st, p.sh, p.sw};
    spec.pad_h = p.ph;
    spec.pad_w = p.pw;
    spec.front_replicate = p.front;
    spec.weights = p.weights;
    spec.bias = p.bias;

    const ClipTensor y = causal_conv3d(x, spec);
    const auto want = oracle::conv(oracle::from_flat(flat(x), shape.channels, T, shape.height, shape.width), p);
    ASSERT_EQ(y.shape().channels, want.size());
    ASSERT_EQ(y.shape().time, want[0].size());
    ASSERT_EQ(y.shape().height, want[0][0].size());
    ASSERT_EQ(y.shape().width, want[0][0][0].size());
    const auto ref = oracle::to_flat(want);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(y.data()[i], ref[i], 1e-5) << "trial " << trial;
  }
}

TEST(CausalConv, ChannelMismatchIsConfigError) {
  auto spec = conv1d({1.0f, 1.0f}, 1, 1);
  spec.in_channels = 2;
  spec.weights.assign(4, 1.0f);
  EXPECT_THROW(causal_conv3d(seq({1, 2}), spec), ConfigError);
}

TEST(CausalConv, TooShortInputIsDataError) {
  EXPECT_THROW(causal_conv3d(seq({1}), conv1d({1, 1, 1}, 1, 0)), DataError);
}

TEST(CausalConv, BadWeightCountIsConfigError) {
  auto spec = conv1d({1, 1, 1}, 1, 2);
  spec.weights.pop_back();
  EXPECT_THROW(validate(spec), ConfigError);
}

TEST(CausalPool, IdentityWindow) {
  CausalPoolSpec s;
  EXPECT_EQ(flat(causal_pool3d(seq({4, -1, 2}), s)), (std::vector<float>{4, -1, 2}));
}

TEST(CausalPool, AverageDisjointWindows) {
  CausalPoolSpec s;
  s.mode = PoolMode::average;
  s.kernel = {2, 1, 1};
  s.stride = {2, 1, 1};
  EXPECT_EQ(flat(causal_pool3d(seq({1, 3, 5, 7}), s)), (std::vector<float>{2, 6}));
}

TEST(CausalPool, MaxWithReplicatedFront) {
  CausalPoolSpec s;
  s.kernel = {3, 1, 1};
  s.front_replicate = 2;
  EXPECT_EQ(flat(causal_pool3d(seq({1, 5, 2}), s)), (std::vector<float>{1, 5, 5}));
}

TEST(CausalPool, MatchesOracle) {
  std::mt19937_64 rng(5);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  for (int trial = 0; trial < 60; ++trial) {
    oracle::PoolParams p;
    p.max = pick(0, 1) == 1;
    p.kt = pick(1, 3);
    p.kh = pick(1, 2);
    p.kw = pick(1, 2);
    p.st = pick(1, 2);
    p.sh = pick(1, 2);
    p.sw = pick(1, 2);
    p.front = pick(0, p.kt);
    const std::size_t T = pick(p.kt > p.front ? p.kt - p.front : 1, 8);
    const ClipShape shape{pick(1, 3), T, pick(2, 5), pick(2, 5)};
    const ClipTensor x = random_clip(rng, shape);
    CausalPoolSpec spec;
    spec.mode = p.max ? PoolMode::max : PoolMode::average;
    spec.kernel = {p.kt, p.kh, p.kw};
    spec.stride = {p.st, p.sh, p.sw};
    spec.front_replicate = p.front;
    const auto y = causal_pool3d(x, spec);
    const auto ref = oracle::to_flat(oracle::pool(oracle::from_flat(flat(x), shape.channels, T, shape.height, shape.width), p));
    ASSERT_EQ(y.data().size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(y.data()[i], ref[i], 1e-6);
  }
}

TEST(ShapeAlgebra, OutputLengthMatchesWindowCount) {
  for (std::size_t k = 1; k <= 5; ++k)
    for (std::size_t s = 1; s <= 4; ++s)
      for (std::size_t f = 0; f <= 6; ++f)
        for (std::size_t T = 1; T <= 20; ++T) {
          const TemporalWindow w{k, s, f};
          const std::size_t n = oracle::count_windows(T, k, s, f);
          const auto got = w.output_length(T);
          if (n == 0) {
            EXPECT_FALSE(got.has_value());
          } else {
            ASSERT_TRUE(got.has_value());
            EXPECT_EQ(*got, n) << "k=" << k << " s=" << s << " f=" << f << " T=" << T;
            EXPECT_EQ(*got, (T + f - k) / s + 1);
          }
        }
}

TEST(ShapeAlgebra, EmissionTimeIsLastInputRead) {
  for (std::size_t k = 1; k <= 4; ++k)
    for (std::size_t s = 1; s <= 3; ++s)
      for (std::size_t f = 0; f <= 4; ++f) {
        const TemporalWindow w{k, s, f};
        for (std::size_t j = 0; j < 6; ++j) {
          // last padded position of window j, mapped back to original time
          const std::ptrdiff_t padded_last = static_cast<std::ptrdiff_t>(j * s + k - 1);
          EXPECT_EQ(w.emission_time(j), padded_last - static_cast<std::ptrdiff_t>(f));
          if (j > 0) EXPECT_GT(w.emission_time(j), w.emission_time(j - 1));
        }
      }
}

TEST(CausalConv, PerturbingLaterFramesLeavesEarlierOutputsBitExact) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g(0.0f, 1.0f);
  CausalConvSpec spec;
  spec.in_channels = 2;
  spec.out_channels = 2;
  spec.kernel = {3, 3, 3};
  spec.stride = {2, 1, 1};
  spec.pad_h = spec.pad_w = 1;
  spec.front_replicate = 1;
  spec.weights.resize(2 * 2 * 27);
  for (auto& w : spec.weights) w = g(rng);
  const ClipTensor x = random_clip(rng, {2, 12, 4, 4});
  const ClipTensor y = causal_conv3d(x, spec);
  const auto w = spec.temporal();
  for (std::size_t u = 0; u + 1 < 12; ++u) {
    ClipTensor z = x;
    for (std::size_t t = u + 1; t < 12; ++t) {
      std::vector<float> noise(z.shape().slice_numel());
      for (auto& v : noise) v = g(rng);
      z.set_slice(t, noise);
    }
    const ClipTensor yz = causal_conv3d(z, spec);
    for (std::size_t j = 0; j < y.shape().time; ++j) {
      if (w.emission_time(j) > static_cast<std::ptrdiff_t>(u)) break;
      EXPECT_EQ(y.slice(j), yz.slice(j)) << "u=" << u << " j=" << j;
    }
  }
}

TEST(CausalBatchNorm, UnitStatsIsIdentity) {
  CausalBatchNormSpec s{{1.0f}, {0.0f}, {0.0f}, {1.0f}, 0.0f, 1};
  const auto out = causal_batchnorm(seq({-3, 0.5f, 7}), s, BatchNormMode::inference);
  EXPECT_EQ(flat(out.output), (std::vector<float>{-3, 0.5f, 7}));
}

TEST(CausalBatchNorm, ZeroGammaGivesBeta) {
  CausalBatchNormSpec s{{0.0f}, {2.5f}, {1.0f}, {4.0f}, 1e-5f, 1};
  const auto out = causal_batchnorm(seq({-3, 0.5f, 7}), s, BatchNormMode::inference);
  EXPECT_EQ(flat(out.output), (std::vector<float>{2.5f, 2.5f, 2.5f}));
}

TEST(CausalBatchNorm, TrainingUsesLeadingSliceOnly) {
  const float eps = 1e-3f, gamma = 2.0f, beta = 0.5f;
  CausalBatchNormSpec s{{gamma}, {beta}, {0.0f}, {1.0f}, eps, 1};
  const auto out = causal_batchnorm(seq({2, 10}), s, BatchNormMode::training);
  const double denom = std::sqrt(static_cast<double>(eps));
  EXPECT_NEAR(out.output.data()[0], beta, 1e-6);
  EXPECT_NEAR(out.output.data()[1], 8.0 / denom * gamma + beta, 1e-3);
  EXPECT_EQ(out.stat_depth_used, 1u);
  EXPECT_FALSE(out.stat_depth_clamped);
}

TEST(CausalBatchNorm, DepthBeyondClipIsClampedNotRejected) {
  CausalBatchNormSpec s{{1.0f}, {0.0f}, {0.0f}, {1.0f}, 1e-5f, 9};
  const auto out = causal_batchnorm(seq({1, 2, 3}), s, BatchNormMode::training);
  EXPECT_EQ(out.stat_depth_used, 3u);
  EXPECT_TRUE(out.stat_depth_clamped);
}

TEST(CausalBatchNorm, FullDepthEqualsClassicBatchNorm) {
  std::mt19937_64 rng(8);
  const ClipShape shape{3, 6, 2, 3};
  const ClipTensor x = random_clip(rng, shape);
  CausalBatchNormSpec s{{1.5f, 0.5f, 1.0f}, {0.1f, -0.2f, 0.0f}, {0, 0, 0}, {1, 1, 1}, 1e-5f, shape.time};
  const auto out = causal_batchnorm(x, s, BatchNormMode::training);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0, sq = 0.0;
    const double n = static_cast<double>(shape.time * shape.plane());
    for (std::size_t t = 0; t < shape.time; ++t)
      for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t w = 0; w < 3; ++w) mean += x.at(c, t, h, w);
    mean /= n;
    for (std::size_t t = 0; t < shape.time; ++t)
      for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t w = 0; w < 3; ++w) sq += (x.at(c, t, h, w) - mean) * (x.at(c, t, h, w) - mean);
    const double var = sq / n;
    for (std::size_t t = 0; t < shape.time; ++t)
      for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t w = 0; w < 3; ++w) {
          const double want = (x.at(c, t, h, w) - mean) / std::sqrt(var + 1e-5) * s.gamma[c] + s.beta[c];
          EXPECT_NEAR(out.output.at(c, t, h, w), want, 1e-5);
        }
  }
}

TEST(CausalBatchNorm, NegativeVarianceRejected) {
  CausalBatchNormSpec s{{1.0f}, {0.0f}, {0.0f}, {-1.0f}, 1e-5f, 1};
  EXPECT_THROW(validate(s), ConfigError);
}

TEST(Activation, Examples) {
  EXPECT_EQ(flat(activation(seq({-1, 2}), Activation::relu)), (std::vector<float>{0, 2}));
  EXPECT_EQ(flat(activation(seq({0}), Activation::sigmoid)), (std::vector<float>{0.5f}));
  EXPECT_EQ(flat(activation(seq({-4, 9}), Activation::identity)), (std::vector<float>{-4, 9}));
}

TEST(ClipTensor, RejectsNonFiniteAndBadShapes) {
  EXPECT_THROW(ClipTensor({1, 2, 1, 1}, {1.0f, NAN}), DataError);
  EXPECT_THROW(ClipTensor({1, 2, 1, 1}, {1.0f, INFINITY}), DataError);
  EXPECT_THROW(ClipTensor({1, 2, 1, 1}, {1.0f}), ConfigError);
  EXPECT_THROW(ClipTensor({0, 2, 1, 1}), ConfigError);
}
