// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace videxit {

enum class HeadMode { binary, multiclass };

// v_0..v_n, each of length `dim`.
struct FeatureSequence {
  std::size_t dim = 0;
  std::vector<std::vector<float>> vectors;

  std::size_t steps() const noexcept { return vectors.size(); }
};

// Linear map h: classes x dim weights (classes == 1 for binary).
struct HeadSpec {
  HeadMode mode = HeadMode::binary;
  std::size_t dim = 0;
  std::size_t classes = 1;
  std::vector<float> weights;  // row-major (class, feature)
  std::vector<float> bias;     // per class

  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

// Per-step class probabilities and the logits they came from. Binary traces
// carry one value per step.
struct ProbTrace {
  HeadMode mode = HeadMode::binary;
  std::size_t classes = 1;
  std::vector<double> values;  // (step, class) row-major
  std::vector<double> logits;  // same layout

  std::size_t steps() const noexcept { return classes == 0 ? 0 : values.size() / classes; }
  double value(std::size_t step, std::size_t cls = 0) const { return values[step * classes + cls]; }
  double logit(std::size_t step, std::size_t cls = 0) const { return logits[step * classes + cls]; }
  // Probability sequence of one class.
  std::vector<double> class_values(std::size_t cls) const;

  void append(const ProbTrace& other);
  friend bool operator==(const ProbTrace&, const ProbTrace&) = default;
};

// Throws ConfigError on inconsistent dimensions or non-finite parameters.
void validate(const HeadSpec& head);

// w_t = mean(v_0..v_t).
FeatureSequence cumulative_mean(const FeatureSequence& features);

// Running sum + count form of cumulative_mean; cumulative_mean is built on it.
class RunningMean {
 public:
  explicit RunningMean(std::size_t dim) : sum_(dim, 0.0) {}

  // Adds v_t and returns w_t.
  std::vector<float> push(std::span<const float> v);
  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return sum_.size(); }

 private:
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

ProbTrace head_probabilities(const FeatureSequence& aggregated, const HeadSpec& head);

// One step of head_probabilities; appends to `trace`.
void head_step(const HeadSpec& head, std::span<const float> aggregated, ProbTrace& trace);

}  // namespace videxit
