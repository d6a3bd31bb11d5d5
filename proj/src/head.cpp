// SPDX-License-Identifier: Apache-2.0
#include "videxit/head.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "videxit/errors.hpp"
#include "videxit/tensor.hpp"

namespace videxit {

std::vector<double> ProbTrace::class_values(std::size_t cls) const {
  std::vector<double> out(steps());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = value(t, cls);
  return out;
}

void ProbTrace::append(const ProbTrace& other) {
  values.insert(values.end(), other.values.begin(), other.values.end());
  logits.insert(logits.end(), other.logits.begin(), other.logits.end());
}

void validate(const HeadSpec& head) {
  if (head.dim == 0) throw ConfigError("head feature dimension must be >= 1");
  if (head.classes == 0) throw ConfigError("head class count must be >= 1");
  if (head.mode == HeadMode::binary && head.classes != 1) {
    throw ConfigError("binary head must have exactly one output row");
  }
  if (head.mode == HeadMode::multiclass && head.classes < 2) {
    throw ConfigError("multiclass head needs >= 2 classes");
  }
  if (head.weights.size() != head.classes * head.dim) {
    throw ConfigError("head weights hold " + std::to_string(head.weights.size()) +
                      " values, expected " + std::to_string(head.classes * head.dim));
  }
  if (head.bias.size() != head.classes) throw ConfigError("head bias length must equal class count");
  require_finite(head.weights, "head weights");
  require_finite(head.bias, "head bias");
}

std::vector<float> RunningMean::push(std::span<const float> v) {
  if (v.size() != sum_.size()) {
    throw ConfigError("feature vector has dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(sum_.size()));
  }
  ++count_;
  std::vector<float> w(sum_.size());
  const double n = static_cast<double>(count_);
  for (std::size_t d = 0; d < sum_.size(); ++d) {
    sum_[d] += v[d];
    w[d] = static_cast<float>(sum_[d] / n);
  }
  return w;
}

FeatureSequence cumulative_mean(const FeatureSequence& features) {
  if (features.vectors.empty()) throw UsageError("cumulative mean needs at least one vector");
  RunningMean running(features.dim);
  FeatureSequence out{features.dim, {}};
  out.vectors.reserve(features.steps());
  for (const auto& v : features.vectors) {
    require_finite(v, "feature vector");
    out.vectors.push_back(running.push(v));
  }
  return out;
}

void head_step(const HeadSpec& head, std::span<const float> aggregated, ProbTrace& trace) {
  if (aggregated.size() != head.dim) {
    throw ConfigError("aggregated feature has dimension " + std::to_string(aggregated.size()) +
                      ", head expects " + std::to_string(head.dim));
  }
  const std::size_t base = trace.values.size();
  trace.values.resize(base + head.classes);
  trace.logits.resize(base + head.classes);
  for (std::size_t c = 0; c < head.classes; ++c) {
    double z = head.bias[c];
    const float* row = head.weights.data() + c * head.dim;
    for (std::size_t d = 0; d < head.dim; ++d) z += static_cast<double>(row[d]) * aggregated[d];
    trace.logits[base + c] = z;
  }
  if (head.mode == HeadMode::binary) {
    trace.values[base] = 1.0 / (1.0 + std::exp(-trace.logits[base]));
    return;
  }
  const double top = *std::max_element(trace.logits.begin() + static_cast<std::ptrdiff_t>(base),
                                       trace.logits.end());
  double total = 0.0;
  for (std::size_t c = 0; c < head.classes; ++c) {
    trace.values[base + c] = std::exp(trace.logits[base + c] - top);
    total += trace.values[base + c];
  }
  for (std::size_t c = 0; c < head.classes; ++c) trace.values[base + c] /= total;
}

ProbTrace head_probabilities(const FeatureSequence& aggregated, const HeadSpec& head) {
  validate(head);
  if (aggregated.dim != head.dim) {
    throw ConfigError("feature dimension " + std::to_string(aggregated.dim) +
                      " does not match head dimension " + std::to_string(head.dim));
  }
  ProbTrace trace{head.mode, head.classes, {}, {}};
  trace.values.reserve(aggregated.steps() * head.classes);
  trace.logits.reserve(aggregated.steps() * head.classes);
  for (const auto& w : aggregated.vectors) head_step(head, w, trace);
  return trace;
}

}  // namespace videxit
