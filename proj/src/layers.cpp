// SPDX-License-Identifier: Apache-2.0
#include "videxit/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "videxit/errors.hpp"

namespace videxit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_extent(const Extent3& e, const char* what) {
  if (e.t == 0 || e.h == 0 || e.w == 0) {
    throw ConfigError(std::string(what) + " components must be >= 1");
  }
}

// Spatial output extent for one axis, or 0 if the window does not fit.
std::size_t spatial_out(std::size_t in, std::size_t pad, std::size_t kernel, std::size_t stride) {
  if (in + 2 * pad < kernel) return 0;
  return (in + 2 * pad - kernel) / stride + 1;
}

std::vector<std::vector<float>> to_slices(const ClipTensor& clip) {
  std::vector<std::vector<float>> slices(clip.shape().time);
  for (std::size_t t = 0; t < slices.size(); ++t) slices[t] = clip.slice(t);
  return slices;
}

SliceShape slice_shape(const ClipShape& s) { return {s.channels, s.height, s.width}; }

template <class Step>
ClipTensor run_temporal(const ClipTensor& clip, const TemporalWindow& window,
                        const SliceShape& out_sig, Step&& step) {
  const auto t_out = window.output_length(clip.shape().time);
  if (!t_out) {
    throw DataError("need >= " + std::to_string(window.min_input_length(1)) +
                    " frames, got " + std::to_string(clip.shape().time));
  }
  const auto slices = to_slices(clip);
  std::vector<const float*> ptrs(window.kernel);
  std::vector<std::vector<float>> out_slices(*t_out, std::vector<float>(out_sig.numel()));
  for (std::size_t j = 0; j < *t_out; ++j) {
    for (std::size_t dt = 0; dt < window.kernel; ++dt) {
      const std::size_t padded = j * window.stride + dt;
      const std::size_t src = padded < window.front ? 0 : padded - window.front;
      ptrs[dt] = slices[src].data();
    }
    step(std::span<const float* const>(ptrs), std::span<float>(out_slices[j]));
  }
  return ClipTensor::from_slices(out_sig.channels, out_sig.height, out_sig.width, out_slices);
}

}  // namespace

std::optional<std::size_t> TemporalWindow::output_length(std::size_t input_length) const {
  if (input_length + front < kernel) return std::nullopt;
  return (input_length + front - kernel) / stride + 1;
}

std::ptrdiff_t TemporalWindow::emission_time(std::size_t output_index) const {
  return static_cast<std::ptrdiff_t>(output_index * stride + kernel - 1) -
         static_cast<std::ptrdiff_t>(front);
}

std::size_t TemporalWindow::min_input_length(std::size_t outputs) const {
  if (outputs == 0) return 0;
  const std::size_t needed = (outputs - 1) * stride + kernel;
  return needed > front ? std::max<std::size_t>(needed - front, 1) : 1;
}

void validate(const CausalConvSpec& spec) {
  check_extent(spec.kernel, "conv kernel");
  check_extent(spec.stride, "conv stride");
  if (spec.in_channels == 0 || spec.out_channels == 0) {
    throw ConfigError("conv channel counts must be >= 1");
  }
  const std::size_t expected = spec.out_channels * spec.in_channels * spec.kernel.t *
                               spec.kernel.h * spec.kernel.w;
  if (spec.weights.size() != expected) {
    throw ConfigError("conv weights hold " + std::to_string(spec.weights.size()) +
                      " values, expected " + std::to_string(expected));
  }
  if (!spec.bias.empty() && spec.bias.size() != spec.out_channels) {
    throw ConfigError("conv bias length must equal out_channels");
  }
  require_finite(spec.weights, "conv weights");
  require_finite(spec.bias, "conv bias");
}

void validate(const CausalPoolSpec& spec) {
  check_extent(spec.kernel, "pool kernel");
  check_extent(spec.stride, "pool stride");
}

void validate(const CausalBatchNormSpec& spec) {
  const std::size_t c = spec.gamma.size();
  if (c == 0 || spec.beta.size() != c || spec.running_mean.size() != c ||
      spec.running_var.size() != c) {
    throw ConfigError("batch norm parameter vectors must share a nonzero length");
  }
  if (!(spec.eps >= 0.0f) || !std::isfinite(spec.eps)) {
    throw ConfigError("batch norm eps must be finite and >= 0");
  }
  if (spec.stat_depth == 0) throw ConfigError("batch norm stat_depth must be >= 1");
  for (float v : spec.running_var) {
    if (!(v >= 0.0f)) throw ConfigError("batch norm running_var must be >= 0");
  }
  require_finite(spec.gamma, "batch norm gamma");
  require_finite(spec.beta, "batch norm beta");
  require_finite(spec.running_mean, "batch norm running_mean");
  require_finite(spec.running_var, "batch norm running_var");
}

SliceShape output_signature(const Layer& layer, const SliceShape& input) {
  return std::visit(
      Overloaded{
          [&](const CausalConvSpec& s) {
            validate(s);
            if (s.in_channels != input.channels) {
              throw ConfigError("conv expects " + std::to_string(s.in_channels) +
                                " input channels, got " + std::to_string(input.channels));
            }
            const SliceShape out{s.out_channels, spatial_out(input.height, s.pad_h, s.kernel.h, s.stride.h),
                                 spatial_out(input.width, s.pad_w, s.kernel.w, s.stride.w)};
            if (out.height == 0 || out.width == 0) {
              throw ConfigError("conv spatial kernel larger than padded input");
            }
            return out;
          },
          [&](const CausalPoolSpec& s) {
            validate(s);
            const SliceShape out{input.channels, spatial_out(input.height, 0, s.kernel.h, s.stride.h),
                                 spatial_out(input.width, 0, s.kernel.w, s.stride.w)};
            if (out.height == 0 || out.width == 0) {
              throw ConfigError("pool spatial kernel larger than input");
            }
            return out;
          },
          [&](const CausalBatchNormSpec& s) {
            validate(s);
            if (s.channels() != input.channels) {
              throw ConfigError("batch norm expects " + std::to_string(s.channels()) +
                                " channels, got " + std::to_string(input.channels));
            }
            return input;
          },
          [&](const ActivationSpec&) { return input; },
      },
      layer);
}

std::optional<TemporalWindow> temporal_window(const Layer& layer) {
  if (const auto* conv = std::get_if<CausalConvSpec>(&layer)) return conv->temporal();
  if (const auto* pool = std::get_if<CausalPoolSpec>(&layer)) return pool->temporal();
  return std::nullopt;
}

void conv_step(const CausalConvSpec& spec, const SliceShape& input,
               std::span<const float* const> window, std::span<float> out) {
  const std::size_t h_out = spatial_out(input.height, spec.pad_h, spec.kernel.h, spec.stride.h);
  const std::size_t w_out = spatial_out(input.width, spec.pad_w, spec.kernel.w, spec.stride.w);
  const std::size_t plane = input.height * input.width;
  const std::size_t k_plane = spec.kernel.h * spec.kernel.w;
  const auto ih0 = static_cast<std::ptrdiff_t>(spec.pad_h);
  const auto iw0 = static_cast<std::ptrdiff_t>(spec.pad_w);

  for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
    const double bias = spec.bias.empty() ? 0.0 : spec.bias[oc];
    for (std::size_t oh = 0; oh < h_out; ++oh) {
      for (std::size_t ow = 0; ow < w_out; ++ow) {
        double acc = bias;
        for (std::size_t ic = 0; ic < spec.in_channels; ++ic) {
          for (std::size_t dt = 0; dt < spec.kernel.t; ++dt) {
            const float* src = window[dt] + ic * plane;
            const float* wk =
                spec.weights.data() + ((oc * spec.in_channels + ic) * spec.kernel.t + dt) * k_plane;
            for (std::size_t kh = 0; kh < spec.kernel.h; ++kh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * spec.stride.h + kh) - ih0;
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(input.height)) continue;
              for (std::size_t kw = 0; kw < spec.kernel.w; ++kw) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * spec.stride.w + kw) - iw0;
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(input.width)) continue;
                acc += static_cast<double>(wk[kh * spec.kernel.w + kw]) *
                       src[static_cast<std::size_t>(ih) * input.width + static_cast<std::size_t>(iw)];
              }
            }
          }
        }
        out[(oc * h_out + oh) * w_out + ow] = static_cast<float>(acc);
      }
    }
  }
}

void pool_step(const CausalPoolSpec& spec, const SliceShape& input,
               std::span<const float* const> window, std::span<float> out) {
  const std::size_t h_out = spatial_out(input.height, 0, spec.kernel.h, spec.stride.h);
  const std::size_t w_out = spatial_out(input.width, 0, spec.kernel.w, spec.stride.w);
  const std::size_t plane = input.height * input.width;
  const double count = static_cast<double>(spec.kernel.t * spec.kernel.h * spec.kernel.w);

  for (std::size_t c = 0; c < input.channels; ++c) {
    for (std::size_t oh = 0; oh < h_out; ++oh) {
      for (std::size_t ow = 0; ow < w_out; ++ow) {
        double acc = spec.mode == PoolMode::max ? -std::numeric_limits<double>::infinity() : 0.0;
        for (std::size_t dt = 0; dt < spec.kernel.t; ++dt) {
          const float* src = window[dt] + c * plane;
          for (std::size_t kh = 0; kh < spec.kernel.h; ++kh) {
            const float* row = src + (oh * spec.stride.h + kh) * input.width + ow * spec.stride.w;
            for (std::size_t kw = 0; kw < spec.kernel.w; ++kw) {
              if (spec.mode == PoolMode::max) {
                acc = std::max<double>(acc, row[kw]);
              } else {
                acc += row[kw];
              }
            }
          }
        }
        if (spec.mode == PoolMode::average) acc /= count;
        out[(c * h_out + oh) * w_out + ow] = static_cast<float>(acc);
      }
    }
  }
}

void batchnorm_slice(const CausalBatchNormSpec& spec, const SliceShape& input,
                     std::span<const float> slice, std::span<float> out) {
  const std::size_t plane = input.height * input.width;
  for (std::size_t c = 0; c < input.channels; ++c) {
    const float scale = spec.gamma[c] / std::sqrt(spec.running_var[c] + spec.eps);
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = c * plane + i;
      out[k] = (slice[k] - spec.running_mean[c]) * scale + spec.beta[c];
    }
  }
}

void activation_slice(Activation kind, std::span<const float> slice, std::span<float> out) {
  switch (kind) {
    case Activation::relu:
      std::transform(slice.begin(), slice.end(), out.begin(),
                     [](float v) { return v > 0.0f ? v : 0.0f; });
      break;
    case Activation::sigmoid:
      std::transform(slice.begin(), slice.end(), out.begin(),
                     [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
      break;
    case Activation::identity:
      std::copy(slice.begin(), slice.end(), out.begin());
      break;
  }
}

ClipTensor causal_conv3d(const ClipTensor& clip, const CausalConvSpec& spec) {
  const SliceShape in = slice_shape(clip.shape());
  const SliceShape out = output_signature(spec, in);
  require_finite(clip.data(), "conv input");
  return run_temporal(clip, spec.temporal(), out,
                      [&](std::span<const float* const> window, std::span<float> dst) {
                        conv_step(spec, in, window, dst);
                      });
}

ClipTensor causal_pool3d(const ClipTensor& clip, const CausalPoolSpec& spec) {
  const SliceShape in = slice_shape(clip.shape());
  const SliceShape out = output_signature(spec, in);
  require_finite(clip.data(), "pool input");
  return run_temporal(clip, spec.temporal(), out,
                      [&](std::span<const float* const> window, std::span<float> dst) {
                        pool_step(spec, in, window, dst);
                      });
}

BatchNormResult causal_batchnorm(const ClipTensor& clip, const CausalBatchNormSpec& spec,
                                 BatchNormMode mode) {
  const SliceShape in = slice_shape(clip.shape());
  output_signature(spec, in);
  require_finite(clip.data(), "batch norm input");

  const std::size_t time = clip.shape().time;
  BatchNormResult result{ClipTensor(clip.shape()), std::min(spec.stat_depth, time),
                         spec.stat_depth > time};
  if (mode == BatchNormMode::inference) {
    for (std::size_t t = 0; t < time; ++t) {
      const auto src = clip.slice(t);
      std::vector<float> dst(src.size());
      batchnorm_slice(spec, in, src, dst);
      result.output.set_slice(t, dst);
    }
    require_finite(result.output.data(), "batch norm output");
    return result;
  }

  // Training mode: statistics from the leading slices only, applied to all.
  CausalBatchNormSpec batch = spec;
  const std::size_t depth = result.stat_depth_used;
  const std::size_t plane = in.height * in.width;
  const double n = static_cast<double>(depth * plane);
  for (std::size_t c = 0; c < in.channels; ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < depth; ++t) {
      for (std::size_t h = 0; h < in.height; ++h) {
        for (std::size_t w = 0; w < in.width; ++w) sum += clip.at(c, t, h, w);
      }
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t t = 0; t < depth; ++t) {
      for (std::size_t h = 0; h < in.height; ++h) {
        for (std::size_t w = 0; w < in.width; ++w) {
          const double d = clip.at(c, t, h, w) - mean;
          sq += d * d;
        }
      }
    }
    batch.running_mean[c] = static_cast<float>(mean);
    batch.running_var[c] = static_cast<float>(sq / n);
  }
  for (std::size_t t = 0; t < time; ++t) {
    const auto src = clip.slice(t);
    std::vector<float> dst(src.size());
    batchnorm_slice(batch, in, src, dst);
    result.output.set_slice(t, dst);
  }
  require_finite(result.output.data(), "batch norm output");
  return result;
}

ClipTensor activation(const ClipTensor& clip, Activation kind) {
  ClipTensor out(clip.shape());
  activation_slice(kind, clip.data(), out.data());
  return out;
}

ClipTensor apply_layer(const Layer& layer, const ClipTensor& clip) {
  return std::visit(
      Overloaded{
          [&](const CausalConvSpec& s) { return causal_conv3d(clip, s); },
          [&](const CausalPoolSpec& s) { return causal_pool3d(clip, s); },
          [&](const CausalBatchNormSpec& s) {
            return causal_batchnorm(clip, s, BatchNormMode::inference).output;
          },
          [&](const ActivationSpec& s) { return activation(clip, s.kind); },
      },
      layer);
}

}  // namespace videxit
