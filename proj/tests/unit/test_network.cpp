// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "videxit/errors.hpp"
#include "videxit/network.hpp"
#include "videxit/random.hpp"

using namespace videxit;

namespace {

CausalConvSpec scalar_conv(std::vector<float> w, std::size_t stride, std::size_t front) {
  CausalConvSpec s;
  s.kernel = {w.size(), 1, 1};
  s.stride = {stride, 1, 1};
  s.front_replicate = front;
  s.weights = std::move(w);
  return s;
}

NetworkSpec scalar_net(std::vector<Layer> layers) {
  NetworkSpec n;
  n.input = {1, 1, 1};
  n.layers = std::move(layers);
  n.head = {HeadMode::binary, 1, 1, {1.0f}, {0.0f}};
  return n;
}

}  // namespace

TEST(OfflineForward, IdentityConvZeroHeadIsHalf) {
  NetworkSpec n = scalar_net({scalar_conv({1.0f}, 1, 0)});
  n.head.weights = {0.0f};
  const auto tr = offline_forward(random_clip(1, {1, 5, 1, 1}), n);
  ASSERT_EQ(tr.steps(), 5u);
  for (double p : tr.values) EXPECT_EQ(p, 0.5);
}

TEST(OfflineForward, StrideTwoHalvesTraceLength) {
  const NetworkSpec n = scalar_net({scalar_conv({1.0f}, 2, 0)});
  EXPECT_EQ(offline_forward(random_clip(2, {1, 8, 1, 1}), n).steps(), 4u);
  EXPECT_EQ(output_steps(n, 8), 4u);
}

TEST(OfflineForward, LogitsAreCumulativeMeansOfConvOutput) {
  const NetworkSpec n = scalar_net({scalar_conv({1, 1, 1}, 1, 2)});
  const auto tr = offline_forward(ClipTensor({1, 3, 1, 1}, {1, 2, 3}), n);
  ASSERT_EQ(tr.steps(), 3u);
  EXPECT_NEAR(tr.logit(0), 3.0, 1e-6);
  EXPECT_NEAR(tr.logit(1), 3.5, 1e-6);
  EXPECT_NEAR(tr.logit(2), 13.0 / 3.0, 1e-6);
}

TEST(OfflineForward, TooFewFramesNamesTheMinimum) {
  const NetworkSpec n = scalar_net({scalar_conv({1, 1, 1}, 1, 0), scalar_conv({1, 1}, 1, 0)});
  EXPECT_EQ(min_frames(n), 4u);
  try {
    offline_forward(random_clip(3, {1, 3, 1, 1}), n);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("need >= 4 frames"), std::string::npos) << e.what();
  }
}

TEST(MinFrames, SmallestAcceptedLength) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const NetworkSpec n = random_network(seed);
    std::size_t brute = 0;
    for (std::size_t T = 1; T <= 40 && brute == 0; ++T) {
      try {
        offline_forward(random_clip(seed, {n.input.channels, T, n.input.height, n.input.width}), n);
        brute = T;
      } catch (const DataError&) {
      }
    }
    EXPECT_EQ(min_frames(n), brute) << "seed " << seed;
  }
}

TEST(EmissionFrame, LaterFramesNeverAffectStep) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const NetworkSpec n = random_network(seed);
    const ClipShape shape{n.input.channels, 16, n.input.height, n.input.width};
    const ClipTensor x = random_clip(seed + 100, shape);
    const auto base = offline_forward(x, n);
    for (std::size_t j = 0; j < base.steps(); ++j) {
      const std::size_t a = emission_frame(n, j);
      ASSERT_LT(a, 16u);
      ClipTensor z = x;
      for (std::size_t t = a + 1; t < 16; ++t) {
        std::vector<float> noise(shape.slice_numel());
        for (auto& v : noise) v = u(rng);
        z.set_slice(t, noise);
      }
      const auto pert = offline_forward(z, n);
      for (std::size_t s = 0; s <= j; ++s) ASSERT_EQ(base.value(s), pert.value(s)) << "seed " << seed;
    }
  }
}

TEST(OfflineForward, PrefixConsistency) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const NetworkSpec n = random_network(seed);
    const ClipTensor x = random_clip(seed + 7, {n.input.channels, 16, n.input.height, n.input.width});
    const auto full = offline_forward(x, n);
    for (std::size_t k = min_frames(n); k <= 16; ++k) {
      const auto part = offline_forward(x.frames(0, k), n);
      ASSERT_LE(part.steps(), full.steps());
      for (std::size_t i = 0; i < part.values.size(); ++i) ASSERT_EQ(part.values[i], full.values[i]);
    }
  }
}

TEST(NetworkSpec, ChainIncompatibilityRejected) {
  NetworkSpec n = scalar_net({scalar_conv({1.0f}, 1, 0)});
  auto bad = scalar_conv({1.0f, 1.0f}, 1, 0);
  bad.in_channels = 2;
  bad.weights.assign(4, 1.0f);
  n.layers.push_back(bad);
  EXPECT_THROW(validate(n), ConfigError);
}

TEST(NetworkSpec, HeadDimensionMustMatchChannels) {
  NetworkSpec n = scalar_net({});
  n.head = {HeadMode::binary, 2, 1, {1, 1}, {0}};
  EXPECT_THROW(validate(n), ConfigError);
}

TEST(NetworkSpec, ClipSignatureMismatchRejected) {
  const NetworkSpec n = scalar_net({});
  EXPECT_THROW(offline_forward(random_clip(1, {2, 4, 1, 1}), n), ConfigError);
}

TEST(RandomNetwork, DeterministicAndValid) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const NetworkSpec a = random_network(seed);
    EXPECT_EQ(a, random_network(seed));
    EXPECT_NO_THROW(validate(a));
    EXPECT_GE(a.layers.size(), 2u);
    EXPECT_LE(a.layers.size(), 4u);
  }
}
