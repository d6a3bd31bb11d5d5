// SPDX-License-Identifier: Apache-2.0
#pragma once

// Frame-by-frame evaluation of a causal network. Each conv/pool layer keeps
// the last (k_t - 1) input slices it has seen, so pushing a frame costs the
// same regardless of how many frames came before. The emitted trace is
// bit-identical to offline_forward on the same prefix because both paths run
// the same per-step kernels in the same order.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "videxit/exit_math.hpp"
#include "videxit/network.hpp"

namespace videxit {

// Fixed-capacity FIFO of equally sized float slices.
class SliceRing {
 public:
  SliceRing(std::size_t capacity, std::size_t slice_numel);

  std::size_t capacity() const noexcept { return slots_.size(); }
  std::size_t size() const noexcept { return size_; }
  // i = 0 is the oldest retained slice.
  const float* at(std::size_t i) const noexcept;
  // Appends, dropping the oldest slice when full.
  void push(std::span<const float> slice);
  std::size_t bytes() const noexcept;

 private:
  std::vector<std::vector<float>> slots_;
  std::size_t head_ = 0;  // index of the oldest slot
  std::size_t size_ = 0;
};

struct StreamOptions {
  double tau = 0.5;
  // Keep every emitted step; when false only running aggregates are kept.
  bool retain_trace = true;
};

class StreamEngine {
 public:
  explicit StreamEngine(std::shared_ptr<const NetworkSpec> net, StreamOptions options = {});

  // Consumes frames and returns the trace steps they completed (possibly none).
  ProbTrace push(const ClipTensor& chunk);
  // `data` holds `frames` frames in (channel, time, height, width) order.
  ProbTrace push(std::span<const float> data, std::size_t frames);

  // nullopt until the first step has been emitted. O(classes) per call.
  std::optional<ExitReport> report() const;

  // Empty when trace retention is off.
  const ProbTrace& trace() const noexcept { return trace_; }
  std::size_t emitted_steps() const noexcept { return emitted_; }
  std::size_t frames_consumed() const noexcept { return frames_; }
  const NetworkSpec& network() const noexcept { return *net_; }
  const StreamOptions& options() const noexcept { return options_; }

  // Bytes held by layer caches and head aggregates, excluding the retained trace.
  std::size_t state_bytes() const noexcept;
  // Cached slices in the ring of layer `layer` (0 for per-slice layers).
  std::size_t ring_occupancy(std::size_t layer) const;
  std::size_t ring_capacity(std::size_t layer) const;

 private:
  struct LayerState {
    SliceShape in;
    SliceShape out;
    std::optional<TemporalWindow> window;
    SliceRing ring;
    std::size_t position = 0;  // padded input positions consumed
    std::vector<const float*> gather;
    std::vector<float> scratch;
  };

  void feed(std::size_t layer, std::span<const float> slice, ProbTrace& emitted);
  void advance(std::size_t layer, std::span<const float> slice, ProbTrace& emitted);
  void emit(std::span<const float> slice, ProbTrace& emitted);

  std::shared_ptr<const NetworkSpec> net_;
  StreamOptions options_;
  std::vector<LayerState> layers_;
  RunningMean mean_;
  std::vector<ExitAccumulator> exits_;  // one per class
  std::vector<double> max_logit_;       // per class
  std::optional<std::size_t> decisive_frame_;
  std::size_t decision_ = 0;
  std::size_t emitted_ = 0;
  std::size_t frames_ = 0;
  ProbTrace trace_;
};

struct NaiveRun {
  ProbTrace trace;
  // Wall time of re-evaluating prefix [0..k], per frame k.
  std::vector<double> frame_ms;
};

// Recomputes offline_forward on every prefix and stitches the newly appearing
// steps together. Reference for correctness and the timing baseline.
NaiveRun naive_forward_per_frame(const ClipTensor& clip, const NetworkSpec& net);

struct FrameLatency {
  double stream_ms = 0.0;
  double naive_ms = 0.0;
};

// Feeds `clip` in `chunk`-frame pushes and, after each push, also re-runs the
// whole prefix offline. Both costs are amortized over the frames of the push;
// every entry is the median over `repeats` runs. One entry per clip frame.
std::vector<FrameLatency> bench_latency(std::shared_ptr<const NetworkSpec> net, const ClipTensor& clip,
                                        std::size_t chunk, std::size_t repeats);

}  // namespace videxit
