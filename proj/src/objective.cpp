// SPDX-License-Identifier: Apache-2.0
#include "videxit/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "videxit/errors.hpp"

namespace videxit {

namespace {

std::size_t first_argmax(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double bce(double p, int y) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double bce_grad(double p, int y) {
  if (p < kProbClamp || p > 1.0 - kProbClamp) return 0.0;
  return y == 1 ? -1.0 / p : 1.0 / (1.0 - p);
}

// log(lambda + (1 - lambda) * NET) with the argument floored.
double penalty(const std::vector<double>& p, double lambda) {
  const double arg = lambda + (1.0 - lambda) * net(p);
  return std::log(std::max(arg, kPenaltyFloor));
}

// Adds d penalty / d p_j into grad[j * stride + offset].
void add_penalty_grad(const std::vector<double>& p, double lambda, std::vector<double>& grad,
                      std::size_t stride, std::size_t offset) {
  const std::size_t n = p.size() - 1;
  if (n == 0) return;
  const double arg = lambda + (1.0 - lambda) * net(p);
  if (arg < kPenaltyFloor) return;
  const double scale = (1.0 - lambda) / arg / static_cast<double>(n);
  const auto d_exit = exit_time_grad(p);
  for (std::size_t j = 0; j < p.size(); ++j) grad[j * stride + offset] += scale * d_exit[j];
}

int binary_label(std::size_t label) {
  if (label > 1) throw UsageError("binary label must be 0 or 1, got " + std::to_string(label));
  return static_cast<int>(label);
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) {
    throw UsageError("lambda must lie in [0, 1], got " + std::to_string(cfg.lambda));
  }
}

std::vector<double> exit_time_grad(const std::vector<double>& trace) {
  std::vector<double> grad(trace.size(), 0.0);
  if (trace.size() < 2) return grad;
  const std::size_t global = first_argmax(trace);
  const double top = trace[global];
  if (top <= kExitGuard) return grad;

  // Each prefix maximum m_t (t < n) routes to the first index attaining it.
  double sum = 0.0;
  std::size_t arg = 0;
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
    if (trace[t] > trace[arg]) arg = t;
    sum += trace[arg];
    grad[arg] -= 1.0 / top;
  }
  grad[global] += sum / (top * top);
  return grad;
}

double loss_binary(const ProbTrace& trace, int label, const LossConfig& cfg) {
  validate(cfg);
  if (trace.mode != HeadMode::binary) throw UsageError("loss_binary needs a binary trace");
  if (label != 0 && label != 1) throw UsageError("binary label must be 0 or 1");
  const double value = bce(positive_prob(trace), label);
  if (label == 0) return value;
  return value + penalty(trace.values, cfg.lambda);
}

double loss_multiclass(const ProbTrace& trace, std::size_t label, const LossConfig& cfg) {
  validate(cfg);
  if (trace.mode != HeadMode::multiclass) throw UsageError("loss_multiclass needs a multiclass trace");
  if (label >= trace.classes) throw UsageError("class label out of range");
  if (trace.steps() == 0) throw UsageError("probability trace is empty");

  double total = 0.0;
  double q_label = 0.0;
  for (std::size_t c = 0; c < trace.classes; ++c) {
    const auto values = trace.class_values(c);
    const double q = *std::max_element(values.begin(), values.end());
    total += q;
    if (c == label) q_label = q;
  }
  const double qhat = std::clamp(q_label / total, kProbClamp, 1.0 - kProbClamp);
  return -std::log(qhat) + penalty(predicted_class_trace(trace).values, cfg.lambda);
}

double loss(const ProbTrace& trace, std::size_t label, const LossConfig& cfg) {
  if (trace.mode == HeadMode::binary) return loss_binary(trace, binary_label(label), cfg);
  return loss_multiclass(trace, label, cfg);
}

std::vector<double> loss_grad(const ProbTrace& trace, std::size_t label, const LossConfig& cfg) {
  validate(cfg);
  if (trace.steps() == 0) throw UsageError("probability trace is empty");
  std::vector<double> grad(trace.values.size(), 0.0);

  if (trace.mode == HeadMode::binary) {
    const int y = binary_label(label);
    const std::size_t global = first_argmax(trace.values);
    grad[global] += bce_grad(trace.values[global], y);
    if (y == 1) add_penalty_grad(trace.values, cfg.lambda, grad, 1, 0);
    return grad;
  }

  if (label >= trace.classes) throw UsageError("class label out of range");
  const std::size_t classes = trace.classes;
  std::vector<double> q(classes);
  std::vector<std::size_t> at(classes);
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto values = trace.class_values(c);
    at[c] = first_argmax(values);
    q[c] = values[at[c]];
    total += q[c];
  }
  const double qhat = q[label] / total;
  if (qhat >= kProbClamp && qhat <= 1.0 - kProbClamp) {
    for (std::size_t c = 0; c < classes; ++c) {
      double d = 1.0 / total;
      if (c == label) d -= 1.0 / q[label];
      grad[at[c] * classes + c] += d;
    }
  }
  const ClassTrace predicted = predicted_class_trace(trace);
  add_penalty_grad(predicted.values, cfg.lambda, grad, classes, predicted.cls);
  return grad;
}

}  // namespace videxit
