// SPDX-License-Identifier: Apache-2.0
#pragma once

// Desk-scale experiments: synthetic onset datasets, head-only training under
// the earliness-penalized loss, lambda sweeps and Pareto fronts.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "videxit/head.hpp"

namespace videxit {

// Class-c sequences are background noise until a uniformly drawn onset step
// and prototype_c plus noise from the onset on. In binary mode label 1 uses
// the positive prototype and label 0 stays background for the whole clip.
struct SyntheticDatasetConfig {
  HeadMode mode = HeadMode::binary;
  std::size_t dim = 8;
  std::size_t classes = 2;  // must be 2 in binary mode
  std::size_t steps = 16;   // n + 1
  double noise = 0.5;
  double prototype_scale = 1.0;
  // Onsets are uniform over steps [0, onset_span); clamped to `steps`.
  std::size_t onset_span = 2;
  std::size_t train_samples = 256;
  std::size_t test_samples = 256;
  std::uint64_t seed = 7;
};

void validate(const SyntheticDatasetConfig& cfg);

struct Sample {
  FeatureSequence features;
  std::size_t label = 0;
  std::size_t onset = 0;
};

struct Dataset {
  HeadMode mode = HeadMode::multiclass;
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::size_t steps = 0;
  std::vector<Sample> train;
  std::vector<Sample> test;
};

Dataset make_synthetic_dataset(const SyntheticDatasetConfig& cfg);

struct TrainConfig {
  double lambda = 1.0;
  std::size_t epochs = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  double tau = 0.5;  // threshold used for the test-split decisions
};

struct SweepPoint {
  double lambda = 1.0;
  std::uint64_t seed = 0;
  double error_rate = 0.0;  // percent
  double mean_net = 0.0;
  double mean_decisive_frame = 0.0;  // over threshold-positive samples
  std::size_t positives = 0;         // samples with a decisive frame
  std::vector<std::size_t> histogram;  // decisive frame -> count

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct TrainResult {
  HeadSpec head;
  SweepPoint point;
};

// Small random weights, zero bias; deterministic in `seed`.
HeadSpec initial_head(const Dataset& data, std::uint64_t seed);

// Test-split metrics of `head`.
SweepPoint evaluate_head(const Dataset& data, const HeadSpec& head, double tau);

// Full-batch gradient descent on the head. Throws TrainingError on a
// non-finite loss.
TrainResult train_head(const Dataset& data, const TrainConfig& cfg);

// Cartesian product lambdas x seeds in request order (lambda major). Cells
// run on up to `threads` workers; 0 means VIDEXIT_THREADS or 1.
std::vector<SweepPoint> sweep_lambda(const Dataset& data, const std::vector<double>& lambdas,
                                     const std::vector<std::uint64_t>& seeds, const TrainConfig& base,
                                     std::size_t threads = 0);

struct ParetoPoint {
  double error_rate = 0.0;
  double net = 0.0;
  std::size_t id = 0;  // caller tag, carried through
};

// Non-dominated subset (minimizing both coordinates), duplicates collapsed,
// sorted by error rate. Throws UsageError on empty input.
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

}  // namespace videxit
