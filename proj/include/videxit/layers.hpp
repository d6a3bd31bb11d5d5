// SPDX-License-Identifier: Apache-2.0
#pragma once

// Causal 3D layers. Only the temporal axis is causalized: every temporal
// window is padded on the front with copies of slice 0, so output step j never
// reads an input slice later than emission_time(j).

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "videxit/tensor.hpp"

namespace videxit {

struct Extent3 {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  friend bool operator==(const Extent3&, const Extent3&) = default;
};

// Per-frame signature: what a single time slice looks like.
struct SliceShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t numel() const noexcept { return channels * height * width; }
  friend bool operator==(const SliceShape&, const SliceShape&) = default;
};

// Temporal window arithmetic shared by conv and pool layers.
struct TemporalWindow {
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t front = 0;  // replicated copies of slice 0 prepended

  // floor((T + front - kernel) / stride) + 1, or nullopt when T + front < kernel.
  std::optional<std::size_t> output_length(std::size_t input_length) const;

  // Largest original input index read by output j. Negative when the window
  // only covers replicated copies of slice 0.
  std::ptrdiff_t emission_time(std::size_t output_index) const;

  // Smallest input length that yields at least `outputs` steps.
  std::size_t min_input_length(std::size_t outputs) const;
};

struct CausalConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  Extent3 kernel{};
  Extent3 stride{};
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
  std::size_t front_replicate = 0;
  // (out, in, k_t, k_h, k_w) row-major.
  std::vector<float> weights;
  // Empty means no bias.
  std::vector<float> bias;

  // Front replication that keeps the offline output length of a layer that
  // used symmetric temporal padding `pad_t`.
  static std::size_t front_for_symmetric_padding(std::size_t pad_t) {
    return 2 * pad_t;
  }

  TemporalWindow temporal() const { return {kernel.t, stride.t, front_replicate}; }
  friend bool operator==(const CausalConvSpec&, const CausalConvSpec&) = default;
};

enum class PoolMode { max, average };

struct CausalPoolSpec {
  PoolMode mode = PoolMode::max;
  Extent3 kernel{};
  Extent3 stride{};
  std::size_t front_replicate = 0;

  TemporalWindow temporal() const { return {kernel.t, stride.t, front_replicate}; }
  friend bool operator==(const CausalPoolSpec&, const CausalPoolSpec&) = default;
};

struct CausalBatchNormSpec {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> running_mean;
  std::vector<float> running_var;
  float eps = 1e-5f;
  // Leading temporal slices that supply statistics in training mode.
  std::size_t stat_depth = 1;

  std::size_t channels() const noexcept { return gamma.size(); }
  friend bool operator==(const CausalBatchNormSpec&, const CausalBatchNormSpec&) = default;
};

enum class BatchNormMode { inference, training };

struct BatchNormResult {
  ClipTensor output;
  std::size_t stat_depth_used = 0;
  // Set when stat_depth exceeded the clip length and was clamped to it.
  bool stat_depth_clamped = false;
};

enum class Activation { relu, sigmoid, identity };

struct ActivationSpec {
  Activation kind = Activation::identity;
  friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

using Layer = std::variant<CausalConvSpec, CausalPoolSpec, CausalBatchNormSpec, ActivationSpec>;

// Throws ConfigError on malformed parameters.
void validate(const CausalConvSpec& spec);
void validate(const CausalPoolSpec& spec);
void validate(const CausalBatchNormSpec& spec);

// Output slice signature of `layer` fed with `input`. Throws ConfigError when
// the layer cannot accept it.
SliceShape output_signature(const Layer& layer, const SliceShape& input);

// Temporal window of a conv or pool layer; nullopt for per-slice layers.
std::optional<TemporalWindow> temporal_window(const Layer& layer);

// Single-step kernels. `window` holds kernel.t slice pointers ordered oldest
// first; each points at a (channel, height, width) slice of `input`. Offline
// and streaming evaluation both go through these, so their outputs agree
// bit for bit.
void conv_step(const CausalConvSpec& spec, const SliceShape& input,
               std::span<const float* const> window, std::span<float> out);
void pool_step(const CausalPoolSpec& spec, const SliceShape& input,
               std::span<const float* const> window, std::span<float> out);
void batchnorm_slice(const CausalBatchNormSpec& spec, const SliceShape& input,
                     std::span<const float> slice, std::span<float> out);
void activation_slice(Activation kind, std::span<const float> slice, std::span<float> out);

ClipTensor causal_conv3d(const ClipTensor& clip, const CausalConvSpec& spec);
ClipTensor causal_pool3d(const ClipTensor& clip, const CausalPoolSpec& spec);
BatchNormResult causal_batchnorm(const ClipTensor& clip, const CausalBatchNormSpec& spec,
                                 BatchNormMode mode);
ClipTensor activation(const ClipTensor& clip, Activation kind);

// Runs one layer offline; batch norm runs in inference mode.
ClipTensor apply_layer(const Layer& layer, const ClipTensor& clip);

}  // namespace videxit
