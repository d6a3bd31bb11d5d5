// SPDX-License-Identifier: Apache-2.0
#include "videxit/stream.hpp"

#include <algorithm>
#include <chrono>
#include <string>
#include <variant>

#include "videxit/errors.hpp"

namespace videxit {

SliceRing::SliceRing(std::size_t capacity, std::size_t slice_numel)
    : slots_(capacity, std::vector<float>(slice_numel)) {}

const float* SliceRing::at(std::size_t i) const noexcept {
  return slots_[(head_ + i) % slots_.size()].data();
}

void SliceRing::push(std::span<const float> slice) {
  if (slots_.empty()) return;
  if (size_ < slots_.size()) {
    auto& slot = slots_[(head_ + size_) % slots_.size()];
    std::copy(slice.begin(), slice.end(), slot.begin());
    ++size_;
    return;
  }
  std::copy(slice.begin(), slice.end(), slots_[head_].begin());
  head_ = (head_ + 1) % slots_.size();
}

std::size_t SliceRing::bytes() const noexcept {
  std::size_t total = 0;
  for (const auto& slot : slots_) total += slot.size() * sizeof(float);
  return total;
}

namespace {

std::shared_ptr<const NetworkSpec> checked(std::shared_ptr<const NetworkSpec> net) {
  if (!net) throw ConfigError("stream needs a network");
  validate(*net);
  return net;
}

}  // namespace

StreamEngine::StreamEngine(std::shared_ptr<const NetworkSpec> net, StreamOptions options)
    : net_(checked(std::move(net))),
      options_(options),
      mean_(net_->head.dim),
      exits_(net_->head.classes),
      max_logit_(net_->head.classes, 0.0),
      trace_{net_->head.mode, net_->head.classes, {}, {}} {
  require_threshold(options_.tau);
  const auto sigs = layer_signatures(*net_);
  layers_.reserve(net_->layers.size());
  for (std::size_t i = 0; i < net_->layers.size(); ++i) {
    const auto window = temporal_window(net_->layers[i]);
    const std::size_t cached = window ? window->kernel - 1 : 0;
    layers_.push_back(LayerState{sigs[i], sigs[i + 1], window, SliceRing(cached, sigs[i].numel()), 0,
                                 std::vector<const float*>(window ? window->kernel : 0),
                                 std::vector<float>(sigs[i + 1].numel())});
  }
}

ProbTrace StreamEngine::push(const ClipTensor& chunk) {
  const ClipShape& s = chunk.shape();
  if (s.channels != net_->input.channels || s.height != net_->input.height ||
      s.width != net_->input.width) {
    throw ConfigError("chunk signature does not match network input");
  }
  return push(chunk.data(), s.time);
}

ProbTrace StreamEngine::push(std::span<const float> data, std::size_t frames) {
  if (frames == 0) throw UsageError("cannot push a zero-length chunk");
  const SliceShape& in = net_->input;
  if (data.size() != frames * in.numel()) {
    throw ConfigError("chunk holds " + std::to_string(data.size()) + " values, expected " +
                      std::to_string(frames * in.numel()));
  }
  require_finite(data, "chunk");

  ProbTrace emitted{net_->head.mode, net_->head.classes, {}, {}};
  const std::size_t plane = in.height * in.width;
  std::vector<float> slice(in.numel());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < in.channels; ++c) {
      const auto src = data.begin() + static_cast<std::ptrdiff_t>((c * frames + t) * plane);
      std::copy(src, src + static_cast<std::ptrdiff_t>(plane),
                slice.begin() + static_cast<std::ptrdiff_t>(c * plane));
    }
    feed(0, slice, emitted);
    ++frames_;
  }
  return emitted;
}

void StreamEngine::feed(std::size_t layer, std::span<const float> slice, ProbTrace& emitted) {
  if (layer == layers_.size()) {
    emit(slice, emitted);
    return;
  }
  LayerState& st = layers_[layer];
  if (st.window && st.position == 0) {
    // Front replication: the first slice also stands in for the padding.
    for (std::size_t r = 0; r < st.window->front; ++r) advance(layer, slice, emitted);
  }
  advance(layer, slice, emitted);
}

void StreamEngine::advance(std::size_t layer, std::span<const float> slice, ProbTrace& emitted) {
  LayerState& st = layers_[layer];
  const Layer& spec = net_->layers[layer];

  if (!st.window) {
    if (const auto* bn = std::get_if<CausalBatchNormSpec>(&spec)) {
      batchnorm_slice(*bn, st.in, slice, st.scratch);
    } else {
      activation_slice(std::get<ActivationSpec>(spec).kind, slice, st.scratch);
    }
    feed(layer + 1, st.scratch, emitted);
    return;
  }

  const TemporalWindow& w = *st.window;
  const std::size_t q = st.position++;
  const bool ready = q + 1 >= w.kernel && (q + 1 - w.kernel) % w.stride == 0;
  if (ready) {
    for (std::size_t i = 0; i + 1 < w.kernel; ++i) st.gather[i] = st.ring.at(i);
    st.gather[w.kernel - 1] = slice.data();
    if (const auto* conv = std::get_if<CausalConvSpec>(&spec)) {
      conv_step(*conv, st.in, st.gather, st.scratch);
    } else {
      pool_step(std::get<CausalPoolSpec>(spec), st.in, st.gather, st.scratch);
    }
  }
  st.ring.push(slice);
  if (ready) feed(layer + 1, st.scratch, emitted);
}

void StreamEngine::emit(std::span<const float> slice, ProbTrace& emitted) {
  const SliceShape& last = layers_.empty() ? net_->input : layers_.back().out;
  const auto w = mean_.push(spatial_mean(last, slice));

  ProbTrace step{net_->head.mode, net_->head.classes, {}, {}};
  head_step(net_->head, w, step);

  const std::size_t classes = net_->head.classes;
  for (std::size_t c = 0; c < classes; ++c) {
    exits_[c].push(step.values[c]);
    if (emitted_ == 0 || step.logits[c] > max_logit_[c]) max_logit_[c] = step.logits[c];
  }
  if (!decisive_frame_) {
    std::size_t top = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (step.values[c] > step.values[top]) top = c;
    }
    if (step.values[top] >= options_.tau) {
      decisive_frame_ = emitted_;
      decision_ = net_->head.mode == HeadMode::binary ? 1 : top;
    }
  }
  ++emitted_;
  emitted.append(step);
  if (options_.retain_trace) trace_.append(step);
}

std::optional<ExitReport> StreamEngine::report() const {
  if (emitted_ == 0) return std::nullopt;
  ExitReport report;
  report.decisive_frame = decisive_frame_;
  report.decision = decision_;

  std::size_t relevant = 0;
  if (net_->head.mode == HeadMode::multiclass) {
    for (std::size_t c = 1; c < max_logit_.size(); ++c) {
      if (max_logit_[c] > max_logit_[relevant]) relevant = c;
    }
    if (!decisive_frame_) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < exits_.size(); ++c) {
        if (exits_[c].max() > exits_[best].max()) best = c;
      }
      report.decision = best;
    }
  }
  const ExitAccumulator& acc = exits_[relevant];
  report.aggregate_prob = acc.max();
  report.exit_time = acc.exit_time();
  report.net = acc.net();
  return report;
}

std::size_t StreamEngine::state_bytes() const noexcept {
  std::size_t total = sizeof(*this);
  for (const auto& st : layers_) {
    total += sizeof(LayerState) + st.ring.bytes() + st.scratch.capacity() * sizeof(float) +
             st.gather.capacity() * sizeof(const float*);
  }
  total += mean_.dim() * sizeof(double);
  total += exits_.capacity() * sizeof(ExitAccumulator) + max_logit_.capacity() * sizeof(double);
  return total;
}

std::size_t StreamEngine::ring_occupancy(std::size_t layer) const { return layers_.at(layer).ring.size(); }

std::size_t StreamEngine::ring_capacity(std::size_t layer) const { return layers_.at(layer).ring.capacity(); }

NaiveRun naive_forward_per_frame(const ClipTensor& clip, const NetworkSpec& net) {
  validate(net);
  NaiveRun run{ProbTrace{net.head.mode, net.head.classes, {}, {}}, {}};
  const std::size_t frames = clip.shape().time;
  const std::size_t need = min_frames(net);
  run.frame_ms.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const auto start = std::chrono::steady_clock::now();
    if (k + 1 >= need) {
      const ProbTrace prefix = offline_forward(clip.frames(0, k + 1), net);
      const std::size_t have = run.trace.values.size();
      run.trace.values.insert(run.trace.values.end(),
                              prefix.values.begin() + static_cast<std::ptrdiff_t>(have), prefix.values.end());
      run.trace.logits.insert(run.trace.logits.end(),
                              prefix.logits.begin() + static_cast<std::ptrdiff_t>(have), prefix.logits.end());
    }
    const auto stop = std::chrono::steady_clock::now();
    run.frame_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return run;
}

std::vector<FrameLatency> bench_latency(std::shared_ptr<const NetworkSpec> net, const ClipTensor& clip,
                                        std::size_t chunk, std::size_t repeats) {
  if (chunk == 0 || repeats == 0) throw UsageError("chunk size and repeat count must be >= 1");
  using Clock = std::chrono::steady_clock;
  const std::size_t frames = clip.shape().time;
  const std::size_t need = min_frames(*net);
  std::vector<std::vector<double>> stream_samples(frames), naive_samples(frames);

  for (std::size_t rep = 0; rep < repeats; ++rep) {
    StreamEngine stream(net, StreamOptions{0.5, false});
    for (std::size_t begin = 0; begin < frames; begin += chunk) {
      const std::size_t count = std::min(chunk, frames - begin);
      const ClipTensor part = clip.frames(begin, count);

      auto start = Clock::now();
      stream.push(part);
      const double stream_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

      start = Clock::now();
      if (begin + count >= need) offline_forward(clip.frames(0, begin + count), *net);
      const double naive_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

      for (std::size_t k = begin; k < begin + count; ++k) {
        stream_samples[k].push_back(stream_ms / static_cast<double>(count));
        naive_samples[k].push_back(naive_ms / static_cast<double>(count));
      }
    }
  }

  auto median = [](std::vector<double>& v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  std::vector<FrameLatency> out(frames);
  for (std::size_t k = 0; k < frames; ++k) out[k] = {median(stream_samples[k]), median(naive_samples[k])};
  return out;
}

}  // namespace videxit
