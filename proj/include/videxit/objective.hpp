// SPDX-License-Identifier: Apache-2.0
#pragma once

// Earliness-penalized training losses over a probability trace and their
// analytic subgradients with respect to the per-step probabilities.
//
//   binary:     BCE(max_t p_t, y) + y * log(lambda + (1 - lambda) * NET(p))
//   multiclass: -log(qhat_y) + log(lambda + (1 - lambda) * NET(p(c_pred)))
//
// where qhat is the per-class temporal maximum renormalized to sum 1 and
// c_pred is the class with the largest logit over time.

#include <cstddef>
#include <vector>

#include "videxit/exit_math.hpp"
#include "videxit/head.hpp"

namespace videxit {

inline constexpr double kProbClamp = 1e-7;
inline constexpr double kPenaltyFloor = 1e-12;

struct LossConfig {
  double lambda = 1.0;
  HeadMode mode = HeadMode::binary;
};

void validate(const LossConfig& cfg);

double loss_binary(const ProbTrace& trace, int label, const LossConfig& cfg);
double loss_multiclass(const ProbTrace& trace, std::size_t label, const LossConfig& cfg);
// Dispatches on trace mode.
double loss(const ProbTrace& trace, std::size_t label, const LossConfig& cfg);

// dL/dp in the trace's (step, class) layout. Every max routes its gradient to
// the first index attaining it.
std::vector<double> loss_grad(const ProbTrace& trace, std::size_t label, const LossConfig& cfg);

// d ExitTime / d p_j for a single-class trace, same routing rule.
std::vector<double> exit_time_grad(const std::vector<double>& trace);

}  // namespace videxit
