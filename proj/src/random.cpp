// SPDX-License-Identifier: Apache-2.0
#include "videxit/random.hpp"

#include <cmath>
#include <random>

#include "videxit/errors.hpp"

namespace videxit {

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<float> normal(Rng& rng, std::size_t n, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<float> out(n);
  for (auto& v : out) v = static_cast<float>(dist(rng));
  return out;
}

CausalConvSpec conv(Rng& rng, std::size_t in, std::size_t out, Extent3 kernel, Extent3 stride, std::size_t pad,
                    std::size_t front) {
  CausalConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = kernel;
  s.stride = stride;
  s.pad_h = pad;
  s.pad_w = pad;
  s.front_replicate = front;
  const double fan_in = static_cast<double>(in * kernel.t * kernel.h * kernel.w);
  s.weights = normal(rng, out * in * kernel.t * kernel.h * kernel.w, 1.0 / std::sqrt(fan_in));
  s.bias = normal(rng, out, 0.1);
  return s;
}

CausalBatchNormSpec batchnorm(Rng& rng, std::size_t channels) {
  CausalBatchNormSpec s;
  std::uniform_real_distribution<double> pos(0.5, 1.5);
  s.gamma.resize(channels);
  s.running_var.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    s.gamma[c] = static_cast<float>(pos(rng));
    s.running_var[c] = static_cast<float>(pos(rng));
  }
  s.beta = normal(rng, channels, 0.1);
  s.running_mean = normal(rng, channels, 0.1);
  s.eps = 1e-5f;
  return s;
}

HeadSpec head(Rng& rng, HeadMode mode, std::size_t classes, std::size_t dim) {
  const std::size_t rows = mode == HeadMode::binary ? 1 : classes;
  return HeadSpec{mode, dim, rows, normal(rng, rows * dim, 1.0), normal(rng, rows, 0.5)};
}

}  // namespace

NetworkSpec random_network(std::uint64_t seed, const RandomNetworkOptions& options) {
  if (options.min_layers > options.max_layers) throw UsageError("min_layers exceeds max_layers");
  Rng rng(seed);
  NetworkSpec net;
  net.input = options.input;
  SliceShape sig = options.input;
  const std::size_t count = pick(rng, options.min_layers, options.max_layers);

  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t kind = pick(rng, 0, 3);
    if (kind == 0) {
      const std::size_t kt = pick(rng, 1, 3);
      const std::size_t ks = std::min<std::size_t>(pick(rng, 0, 1) ? 3 : 1, std::min(sig.height, sig.width) + 2);
      const std::size_t pad = ks == 3 ? pick(rng, 0, 1) : 0;
      const std::size_t k_sp = (ks == 3 && pad == 0 && std::min(sig.height, sig.width) < 3) ? 1 : ks;
      const std::size_t pad_sp = k_sp == 3 ? pad : 0;
      net.layers.push_back(conv(rng, sig.channels, pick(rng, 1, 4), {kt, k_sp, k_sp}, {pick(rng, 1, 2), 1, 1},
                                pad_sp, pick(rng, 0, kt)));
    } else if (kind == 1) {
      CausalPoolSpec s;
      s.mode = pick(rng, 0, 1) ? PoolMode::max : PoolMode::average;
      const std::size_t kt = pick(rng, 1, 3);
      const std::size_t ks = std::min<std::size_t>(pick(rng, 1, 2), std::min(sig.height, sig.width));
      s.kernel = {kt, ks, ks};
      s.stride = {pick(rng, 1, 2), ks, ks};
      s.front_replicate = pick(rng, 0, kt);
      net.layers.push_back(s);
    } else if (kind == 2) {
      net.layers.push_back(batchnorm(rng, sig.channels));
    } else {
      net.layers.push_back(ActivationSpec{pick(rng, 0, 1) ? Activation::relu : Activation::sigmoid});
    }
    sig = output_signature(net.layers.back(), sig);
  }
  net.head = head(rng, options.mode, options.classes, sig.channels);
  validate(net);
  return net;
}

NetworkSpec demo_network(std::uint64_t seed, HeadMode mode, std::size_t classes) {
  Rng rng(seed);
  NetworkSpec net;
  net.input = {3, 16, 16};
  net.layers.push_back(conv(rng, 3, 8, {3, 3, 3}, {1, 1, 1}, 1, CausalConvSpec::front_for_symmetric_padding(1)));
  net.layers.push_back(batchnorm(rng, 8));
  net.layers.push_back(ActivationSpec{Activation::relu});
  CausalPoolSpec pool;
  pool.mode = PoolMode::max;
  pool.kernel = {1, 2, 2};
  pool.stride = {1, 2, 2};
  net.layers.push_back(pool);
  net.layers.push_back(conv(rng, 8, 8, {3, 3, 3}, {1, 1, 1}, 1, CausalConvSpec::front_for_symmetric_padding(1)));
  net.layers.push_back(ActivationSpec{Activation::relu});
  net.head = head(rng, mode, classes, 8);
  validate(net);
  return net;
}

ClipTensor random_clip(std::uint64_t seed, const ClipShape& shape) {
  Rng rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  ClipTensor clip(shape);
  for (auto& v : clip.data()) v = dist(rng);
  return clip;
}

}  // namespace videxit
