// SPDX-License-Identifier: Apache-2.0
#include "videxit/network.hpp"

#include <algorithm>
#include <string>

#include "videxit/errors.hpp"

namespace videxit {

std::vector<SliceShape> layer_signatures(const NetworkSpec& net) {
  if (net.input.channels == 0 || net.input.height == 0 || net.input.width == 0) {
    throw ConfigError("network input signature components must be >= 1");
  }
  std::vector<SliceShape> sigs{net.input};
  sigs.reserve(net.layers.size() + 1);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    try {
      sigs.push_back(output_signature(net.layers[i], sigs.back()));
    } catch (const ConfigError& e) {
      throw ConfigError("layer " + std::to_string(i) + ": " + e.what());
    }
  }
  return sigs;
}

void validate(const NetworkSpec& net) {
  const auto sigs = layer_signatures(net);
  validate(net.head);
  if (sigs.back().channels != net.head.dim) {
    throw ConfigError("pooled feature dimension " + std::to_string(sigs.back().channels) +
                      " does not match head dimension " + std::to_string(net.head.dim));
  }
}

std::size_t output_steps(const NetworkSpec& net, std::size_t frames) {
  std::size_t length = frames;
  for (const auto& layer : net.layers) {
    if (length == 0) return 0;
    if (const auto window = temporal_window(layer)) length = window->output_length(length).value_or(0);
  }
  return length;
}

std::size_t min_frames(const NetworkSpec& net) {
  std::size_t need = 1;
  for (auto it = net.layers.rbegin(); it != net.layers.rend(); ++it) {
    if (const auto window = temporal_window(*it)) need = window->min_input_length(need);
  }
  return need;
}

std::size_t emission_frame(const NetworkSpec& net, std::size_t step) {
  std::size_t index = step;
  for (auto it = net.layers.rbegin(); it != net.layers.rend(); ++it) {
    if (const auto window = temporal_window(*it)) {
      index = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, window->emission_time(index)));
    }
  }
  return index;
}

std::vector<float> spatial_mean(const SliceShape& shape, std::span<const float> slice) {
  const std::size_t plane = shape.height * shape.width;
  std::vector<float> out(shape.channels);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sum += slice[c * plane + i];
    out[c] = static_cast<float>(sum / static_cast<double>(plane));
  }
  return out;
}

FeatureSequence extract_features(const ClipTensor& clip, const NetworkSpec& net) {
  validate(net);
  const ClipShape& shape = clip.shape();
  if (shape.channels != net.input.channels || shape.height != net.input.height ||
      shape.width != net.input.width) {
    throw ConfigError("clip signature does not match network input");
  }
  const std::size_t need = min_frames(net);
  if (shape.time < need) {
    throw DataError("need >= " + std::to_string(need) + " frames, got " + std::to_string(shape.time));
  }
  require_finite(clip.data(), "clip");

  ClipTensor current = clip;
  for (const auto& layer : net.layers) current = apply_layer(layer, current);

  const ClipShape& out = current.shape();
  const SliceShape sig{out.channels, out.height, out.width};
  FeatureSequence features{out.channels, {}};
  features.vectors.reserve(out.time);
  for (std::size_t t = 0; t < out.time; ++t) features.vectors.push_back(spatial_mean(sig, current.slice(t)));
  return features;
}

ProbTrace offline_forward(const ClipTensor& clip, const NetworkSpec& net) {
  return head_probabilities(cumulative_mean(extract_features(clip, net)), net.head);
}

}  // namespace videxit
