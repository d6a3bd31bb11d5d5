// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "videxit/head.hpp"
#include "videxit/layers.hpp"

namespace videxit {

// Ordered causal layers followed by global spatial average pooling and the
// cumulative-mean head.
struct NetworkSpec {
  SliceShape input{};
  std::vector<Layer> layers;
  HeadSpec head{};

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Throws ConfigError if layers are not chain-compatible or the last layer's
// channel count differs from the head dimension.
void validate(const NetworkSpec& net);

// Slice signature after every layer; element 0 is the input signature.
std::vector<SliceShape> layer_signatures(const NetworkSpec& net);

// Trace steps produced from `frames` input frames (0 if too short).
std::size_t output_steps(const NetworkSpec& net, std::size_t frames);

// Fewest frames for which every layer emits at least one step.
std::size_t min_frames(const NetworkSpec& net);

// Latest input frame that trace step `step` depends on (the frame whose
// arrival lets a stream emit it).
std::size_t emission_frame(const NetworkSpec& net, std::size_t step);

// Mean over height and width of a (channel, height, width) slice.
std::vector<float> spatial_mean(const SliceShape& shape, std::span<const float> slice);

// Runs the layers over the whole clip and returns v_0..v_n.
FeatureSequence extract_features(const ClipTensor& clip, const NetworkSpec& net);

// Full offline pipeline: layers, spatial pooling, cumulative mean, head.
// Throws DataError ("need >= m frames") on clips that are too short.
ProbTrace offline_forward(const ClipTensor& clip, const NetworkSpec& net);

}  // namespace videxit
