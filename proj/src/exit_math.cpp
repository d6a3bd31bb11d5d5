// SPDX-License-Identifier: Apache-2.0
#include "videxit/exit_math.hpp"

#include <algorithm>
#include <string>

#include "videxit/errors.hpp"

namespace videxit {

double ExitDistribution::mean() const {
  double total = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k) total += static_cast<double>(k) * masses[k];
  return total;
}

void ExitAccumulator::push(double p) {
  if (steps_ > 0) {
    // The previous step joins the t < n range with prefix max == max_.
    if (max_ > 0.0) {
      ++positive_steps_;
    } else {
      ++zero_steps_;
    }
  }
  if (p > max_) {
    if (max_ > 0.0) deficit_ += static_cast<double>(positive_steps_) * (p - max_);
    max_ = p;
  }
  ++steps_;
}

double ExitAccumulator::exit_time() const {
  if (steps_ == 0) return 0.0;
  const double n = static_cast<double>(steps_ - 1);
  if (max_ <= kExitGuard) return n;
  const double t = static_cast<double>(zero_steps_) + deficit_ / max_;
  return std::clamp(t, 0.0, n);
}

double ExitAccumulator::net() const {
  if (steps_ <= 1) return 0.0;
  return exit_time() / static_cast<double>(steps_ - 1);
}

namespace {

void require_nonempty(std::span<const double> trace) {
  if (trace.empty()) throw UsageError("probability trace is empty");
}

ExitAccumulator accumulate(std::span<const double> trace) {
  ExitAccumulator acc;
  for (double p : trace) acc.push(p);
  return acc;
}

}  // namespace

double positive_prob(std::span<const double> trace) {
  require_nonempty(trace);
  return *std::max_element(trace.begin(), trace.end());
}

double positive_prob(const ProbTrace& trace) {
  if (trace.mode != HeadMode::binary) throw UsageError("positive_prob needs a binary trace");
  return positive_prob(std::span<const double>(trace.values));
}

ExitDistribution exit_distribution(std::span<const double> trace) {
  require_nonempty(trace);
  const double top = *std::max_element(trace.begin(), trace.end());
  ExitDistribution dist;
  if (top <= kExitGuard) return dist;
  dist.defined = true;
  dist.masses.resize(trace.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double m = std::max(prev, trace[k]);
    dist.masses[k] = (m - prev) / top;
    prev = m;
  }
  return dist;
}

double exit_time(std::span<const double> trace) {
  require_nonempty(trace);
  return accumulate(trace).exit_time();
}

double net(std::span<const double> trace) {
  require_nonempty(trace);
  return accumulate(trace).net();
}

ClassTrace predicted_class_trace(const ProbTrace& trace) {
  if (trace.mode != HeadMode::multiclass) throw UsageError("predicted_class_trace needs a multiclass trace");
  if (trace.steps() == 0) throw UsageError("probability trace is empty");
  std::size_t best = 0;
  double best_logit = trace.logit(0, 0);
  for (std::size_t c = 0; c < trace.classes; ++c) {
    for (std::size_t t = 0; t < trace.steps(); ++t) {
      if (trace.logit(t, c) > best_logit) {
        best_logit = trace.logit(t, c);
        best = c;
      }
    }
  }
  return {best, trace.class_values(best)};
}

void require_threshold(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw UsageError("threshold must lie in (0, 1), got " + std::to_string(tau));
  }
}

ExitReport decide(const ProbTrace& trace, double tau) {
  require_threshold(tau);
  if (trace.steps() == 0) throw UsageError("probability trace is empty");
  ExitReport report;

  if (trace.mode == HeadMode::binary) {
    const std::span<const double> p(trace.values);
    const auto hit = std::find_if(p.begin(), p.end(), [tau](double v) { return v >= tau; });
    if (hit != p.end()) {
      report.decision = 1;
      report.decisive_frame = static_cast<std::size_t>(hit - p.begin());
    }
    const ExitAccumulator acc = accumulate(p);
    report.aggregate_prob = acc.max();
    report.exit_time = acc.exit_time();
    report.net = acc.net();
    return report;
  }

  for (std::size_t t = 0; t < trace.steps() && !report.decisive_frame; ++t) {
    std::size_t top = 0;
    for (std::size_t c = 1; c < trace.classes; ++c) {
      if (trace.value(t, c) > trace.value(t, top)) top = c;
    }
    if (trace.value(t, top) >= tau) {
      report.decision = top;
      report.decisive_frame = t;
    }
  }
  if (!report.decisive_frame) {
    // argmax_c max_t p_t(c)
    double best = -1.0;
    for (std::size_t c = 0; c < trace.classes; ++c) {
      for (std::size_t t = 0; t < trace.steps(); ++t) {
        if (trace.value(t, c) > best) {
          best = trace.value(t, c);
          report.decision = c;
        }
      }
    }
  }
  const ClassTrace predicted = predicted_class_trace(trace);
  const ExitAccumulator acc = accumulate(predicted.values);
  report.aggregate_prob = acc.max();
  report.exit_time = acc.exit_time();
  report.net = acc.net();
  return report;
}

}  // namespace videxit
