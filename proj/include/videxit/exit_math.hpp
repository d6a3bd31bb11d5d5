// SPDX-License-Identifier: Apache-2.0
#pragma once

// Early-exit calculus over a probability trace p_0..p_n.
//
// A threshold tau drawn uniformly from (0, M], M = max_i p_i, exits at the
// first k with p_k >= tau. With prefix maxima m_k = max_{i<=k} p_i the exit
// step W has P(W = k) = (m_k - m_{k-1}) / M and
//
//   E[W] = n - (1/M) * sum_{t=0}^{n-1} m_t.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "videxit/head.hpp"

namespace videxit {

// Below this maximum the exit distribution is undefined and the exit time is n.
inline constexpr double kExitGuard = 1e-12;

struct ExitDistribution {
  bool defined = false;
  std::vector<double> masses;  // P(W = k); empty when undefined

  double mean() const;
};

struct ExitReport {
  // Binary: 1 positive, 0 negative. Multiclass: class index.
  std::size_t decision = 0;
  // Trace step at which the threshold was first crossed.
  std::optional<std::size_t> decisive_frame;
  double aggregate_prob = 0.0;
  double exit_time = 0.0;
  double net = 0.0;
};

// Streaming form of the exit-time formula. Consumes p_0, p_1, ... and keeps
// O(1) state. Steps whose prefix maximum is still zero contribute exactly 1
// each; the remaining ones carry the deficit sum_t (M - m_t), which is
// updated when the maximum rises. This is the closed form regrouped so that
// a trace peaking at step 0 gives exactly 0 and a trace that is zero until
// its last step gives exactly n.
class ExitAccumulator {
 public:
  void push(double p);

  std::size_t steps() const noexcept { return steps_; }
  // max(p_0..p_n); 0 before the first push.
  double max() const noexcept { return max_; }
  double exit_time() const;
  double net() const;

 private:
  std::size_t steps_ = 0;
  double max_ = 0.0;
  std::size_t zero_steps_ = 0;      // t < n with m_t == 0
  std::size_t positive_steps_ = 0;  // t < n with m_t > 0
  double deficit_ = 0.0;            // sum over positive steps of (M - m_t)
};

// max(p_0..p_n). Throws UsageError on an empty trace.
double positive_prob(std::span<const double> trace);
double positive_prob(const ProbTrace& trace);

ExitDistribution exit_distribution(std::span<const double> trace);
double exit_time(std::span<const double> trace);
// exit_time / n, and 0 for a single-step trace.
double net(std::span<const double> trace);

struct ClassTrace {
  std::size_t cls = 0;
  std::vector<double> values;
};

// Class with the largest logit over all steps (lowest index on ties) and its
// probability sequence.
ClassTrace predicted_class_trace(const ProbTrace& trace);

// Threshold procedure: stops at the first step whose (max-class) probability
// reaches tau. Throws UsageError unless 0 < tau < 1.
ExitReport decide(const ProbTrace& trace, double tau);

void require_threshold(double tau);

}  // namespace videxit
