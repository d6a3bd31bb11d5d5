// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "videxit/errors.hpp"
#include "videxit/trainer.hpp"

using namespace videxit;

namespace {

SyntheticDatasetConfig small(HeadMode mode) {
  SyntheticDatasetConfig c;
  c.mode = mode;
  c.classes = mode == HeadMode::binary ? 2 : 3;
  c.train_samples = 64;
  c.test_samples = 64;
  return c;
}

}  // namespace

TEST(SyntheticDataset, NoiselessSequencesArePrototypesAfterOnset) {
  SyntheticDatasetConfig c = small(HeadMode::multiclass);
  c.noise = 0.0;
  c.onset_span = c.steps;
  const Dataset d = make_synthetic_dataset(c);
  // Prototypes recovered from any post-onset step must agree across samples.
  std::vector<std::vector<float>> proto(c.classes);
  for (const auto& s : d.train) {
    for (std::size_t t = 0; t < d.steps; ++t) {
      const auto& v = s.features.vectors[t];
      if (t < s.onset) {
        for (float x : v) EXPECT_EQ(x, 0.0f);
        continue;
      }
      if (proto[s.label].empty()) proto[s.label] = v;
      EXPECT_EQ(v, proto[s.label]);
    }
  }
}

TEST(SyntheticDataset, OracleReaderIsPerfectWithoutNoise) {
  SyntheticDatasetConfig c = small(HeadMode::multiclass);
  c.noise = 0.0;
  c.onset_span = c.steps;
  const Dataset d = make_synthetic_dataset(c);
  std::vector<std::vector<float>> proto(c.classes);
  for (const auto& s : d.train) proto[s.label] = s.features.vectors.back();
  for (const auto& s : d.test) {
    for (std::size_t t = s.onset; t < d.steps; ++t) {
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t k = 0; k < c.classes; ++k) {
        double dist = 0.0;
        for (std::size_t i = 0; i < c.dim; ++i) dist += std::pow(s.features.vectors[t][i] - proto[k][i], 2);
        if (dist < best_d) best_d = dist, best = k;
      }
      EXPECT_EQ(best, s.label);
    }
  }
}

TEST(SyntheticDataset, DeterministicUnderSeed) {
  const auto c = small(HeadMode::binary);
  const Dataset a = make_synthetic_dataset(c), b = make_synthetic_dataset(c);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].features.vectors, b.train[i].features.vectors);
    EXPECT_EQ(a.train[i].onset, b.train[i].onset);
  }
}

TEST(SyntheticDataset, OnsetsStayInSpan) {
  SyntheticDatasetConfig c = small(HeadMode::binary);
  c.onset_span = 5;
  for (const auto& s : make_synthetic_dataset(c).train) EXPECT_LT(s.onset, 5u);
}

TEST(SyntheticDataset, InvalidConfigsRejected) {
  SyntheticDatasetConfig c = small(HeadMode::binary);
  c.train_samples = 0;
  EXPECT_THROW(make_synthetic_dataset(c), UsageError);
  c = small(HeadMode::binary);
  c.noise = -1.0;
  EXPECT_THROW(make_synthetic_dataset(c), UsageError);
  c = small(HeadMode::binary);
  c.classes = 3;
  EXPECT_THROW(make_synthetic_dataset(c), UsageError);
}

TEST(TrainHead, ZeroEpochsReturnsInitialHead) {
  const Dataset d = make_synthetic_dataset(small(HeadMode::binary));
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 9;
  EXPECT_EQ(train_head(d, cfg).head, initial_head(d, 9));
}

TEST(TrainHead, SeparableDataAtLambdaOne) {
  SyntheticDatasetConfig c = small(HeadMode::binary);
  c.noise = 0.1;
  const Dataset d = make_synthetic_dataset(c);
  TrainConfig cfg;
  cfg.lambda = 1.0;
  EXPECT_LT(train_head(d, cfg).point.error_rate, 5.0);
}

TEST(TrainHead, DivergenceIsTrainingError) {
  const Dataset d = make_synthetic_dataset(small(HeadMode::multiclass));
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.epochs = 5;
  EXPECT_THROW(train_head(d, cfg), TrainingError);
}

TEST(TrainHead, HistogramMassEqualsPositives) {
  const Dataset d = make_synthetic_dataset(small(HeadMode::binary));
  const auto p = train_head(d, TrainConfig{}).point;
  EXPECT_EQ(std::accumulate(p.histogram.begin(), p.histogram.end(), std::size_t{0}), p.positives);
  EXPECT_GE(p.error_rate, 0.0);
  EXPECT_LE(p.error_rate, 100.0);
  EXPECT_GE(p.mean_net, 0.0);
  EXPECT_LE(p.mean_net, 1.0);
}

TEST(Sweep, ShapeOrderAndDeterminism) {
  const Dataset d = make_synthetic_dataset(small(HeadMode::binary));
  TrainConfig base;
  base.epochs = 20;
  const std::vector<double> lambdas{0.7, 0.1, 1.0};
  const std::vector<std::uint64_t> seeds{4, 5};
  const auto serial = sweep_lambda(d, lambdas, seeds, base, 1);
  const auto parallel = sweep_lambda(d, lambdas, seeds, base, 4);
  ASSERT_EQ(serial.size(), 6u);
  EXPECT_EQ(serial, parallel);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].lambda, lambdas[i / 2]);
    EXPECT_EQ(serial[i].seed, seeds[i % 2]);
  }
  EXPECT_EQ(sweep_lambda(d, {0.5}, {1}, base, 1).size(), 1u);
}

TEST(Sweep, FailuresCarryLambdaAndSeed) {
  const Dataset d = make_synthetic_dataset(small(HeadMode::multiclass));
  TrainConfig base;
  base.learning_rate = 1e300;
  base.epochs = 5;
  try {
    sweep_lambda(d, {0.25}, {3}, base, 1);
    FAIL();
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("lambda=0.25"), std::string::npos) << what;
    EXPECT_NE(what.find("seed=3"), std::string::npos) << what;
  }
}

TEST(Pareto, Examples) {
  const auto one = pareto_front({{3, 0.2, 0}});
  ASSERT_EQ(one.size(), 1u);

  const auto f = pareto_front({{10, 0.5, 0}, {12, 0.3, 1}, {11, 0.6, 2}});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].id, 0u);
  EXPECT_EQ(f[1].id, 1u);

  EXPECT_EQ(pareto_front({{1, 1, 0}, {1, 1, 1}, {1, 1, 2}}).size(), 1u);
  EXPECT_THROW(pareto_front({}), UsageError);
}

TEST(Pareto, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<ParetoPoint> pts;
    std::vector<oracle::Pt> ref;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid forces ties and duplicates
      const double e = static_cast<double>(rng() % 8), v = static_cast<double>(rng() % 8) / 8.0;
      pts.push_back({e, v, i});
      ref.push_back({e, v});
    }
    const auto got = pareto_front(pts);
    const auto want = oracle::pareto(ref);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].error_rate, want[i].error);
      EXPECT_EQ(got[i].net, want[i].net);
    }
  }
}
