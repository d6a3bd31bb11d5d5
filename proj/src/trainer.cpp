// SPDX-License-Identifier: Apache-2.0
#include "videxit/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "videxit/errors.hpp"
#include "videxit/exit_math.hpp"
#include "videxit/objective.hpp"

namespace videxit {

void validate(const SyntheticDatasetConfig& cfg) {
  if (cfg.dim == 0 || cfg.classes == 0 || cfg.steps == 0 || cfg.onset_span == 0 || cfg.train_samples == 0 ||
      cfg.test_samples == 0) {
    throw UsageError("synthetic dataset counts must all be >= 1");
  }
  if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) throw UsageError("noise scale must be >= 0");
  if (cfg.mode == HeadMode::binary && cfg.classes != 2) {
    throw UsageError("binary synthetic datasets have exactly 2 classes");
  }
  if (cfg.mode == HeadMode::multiclass && cfg.classes < 2) {
    throw UsageError("multiclass synthetic datasets need >= 2 classes");
  }
}

Dataset make_synthetic_dataset(const SyntheticDatasetConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> onset_dist(0, std::min(cfg.onset_span, cfg.steps) - 1);

  std::vector<std::vector<float>> prototypes(cfg.classes, std::vector<float>(cfg.dim));
  for (auto& proto : prototypes) {
    for (auto& v : proto) v = static_cast<float>(cfg.prototype_scale * gauss(rng));
  }
  const bool binary = cfg.mode == HeadMode::binary;

  auto draw = [&](std::size_t index) {
    Sample s;
    s.label = index % cfg.classes;
    s.onset = onset_dist(rng);
    s.features.dim = cfg.dim;
    s.features.vectors.assign(cfg.steps, std::vector<float>(cfg.dim));
    const bool shows_event = !binary || s.label == 1;
    for (std::size_t t = 0; t < cfg.steps; ++t) {
      for (std::size_t d = 0; d < cfg.dim; ++d) {
        double v = cfg.noise * gauss(rng);
        if (shows_event && t >= s.onset) v += prototypes[s.label][d];
        s.features.vectors[t][d] = static_cast<float>(v);
      }
    }
    return s;
  };

  Dataset data{cfg.mode, cfg.dim, binary ? 1 : cfg.classes, cfg.steps, {}, {}};
  data.train.reserve(cfg.train_samples);
  data.test.reserve(cfg.test_samples);
  for (std::size_t i = 0; i < cfg.train_samples; ++i) data.train.push_back(draw(i));
  for (std::size_t i = 0; i < cfg.test_samples; ++i) data.test.push_back(draw(i));
  return data;
}

HeadSpec initial_head(const Dataset& data, std::uint64_t seed) {
  HeadSpec head{data.mode, data.dim, data.classes, std::vector<float>(data.classes * data.dim),
                std::vector<float>(data.classes, 0.0f)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.01);
  for (auto& w : head.weights) w = static_cast<float>(gauss(rng));
  return head;
}

namespace {

std::vector<FeatureSequence> aggregate(const std::vector<Sample>& samples) {
  std::vector<FeatureSequence> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(cumulative_mean(s.features));
  return out;
}

std::size_t thread_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VIDEXIT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return 1;
}

SweepPoint evaluate_aggregated(const Dataset& data, const std::vector<FeatureSequence>& test,
                               const HeadSpec& head, double tau) {
  SweepPoint point;
  point.histogram.assign(data.steps, 0);
  std::size_t errors = 0;
  double net_sum = 0.0;
  double frame_sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const ProbTrace trace = head_probabilities(test[i], head);
    const ExitReport report = decide(trace, tau);
    if (report.decision != data.test[i].label) ++errors;
    net_sum += report.net;
    if (report.decisive_frame) {
      ++point.positives;
      ++point.histogram[*report.decisive_frame];
      frame_sum += static_cast<double>(*report.decisive_frame);
    }
  }
  const double n = static_cast<double>(test.size());
  point.error_rate = test.empty() ? 0.0 : 100.0 * static_cast<double>(errors) / n;
  point.mean_net = test.empty() ? 0.0 : net_sum / n;
  point.mean_decisive_frame = point.positives == 0 ? 0.0 : frame_sum / static_cast<double>(point.positives);
  return point;
}

}  // namespace

SweepPoint evaluate_head(const Dataset& data, const HeadSpec& head, double tau) {
  require_threshold(tau);
  return evaluate_aggregated(data, aggregate(data.test), head, tau);
}

TrainResult train_head(const Dataset& data, const TrainConfig& cfg) {
  if (data.train.empty()) throw UsageError("training split is empty");
  const LossConfig loss_cfg{cfg.lambda, data.mode};
  validate(loss_cfg);
  require_threshold(cfg.tau);
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw UsageError("learning rate must be positive");
  }

  HeadSpec head = initial_head(data, cfg.seed);
  const auto train = aggregate(data.train);
  const std::size_t classes = data.classes;
  const std::size_t dim = data.dim;
  std::vector<double> grad_w(classes * dim);
  std::vector<double> grad_b(classes);
  std::vector<double> dz(classes);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const ProbTrace trace = head_probabilities(train[i], head);
      const std::size_t label = data.train[i].label;
      total += loss(trace, label, loss_cfg);
      const auto dp = loss_grad(trace, label, loss_cfg);
      for (std::size_t t = 0; t < trace.steps(); ++t) {
        const double* g = dp.data() + t * classes;
        const double* p = trace.values.data() + t * classes;
        if (data.mode == HeadMode::binary) {
          dz[0] = g[0] * p[0] * (1.0 - p[0]);
        } else {
          double inner = 0.0;
          for (std::size_t c = 0; c < classes; ++c) inner += g[c] * p[c];
          for (std::size_t c = 0; c < classes; ++c) dz[c] = p[c] * (g[c] - inner);
        }
        const auto& w = train[i].vectors[t];
        for (std::size_t c = 0; c < classes; ++c) {
          if (dz[c] == 0.0) continue;
          grad_b[c] += dz[c];
          for (std::size_t d = 0; d < dim; ++d) grad_w[c * dim + d] += dz[c] * w[d];
        }
      }
    }
    if (!std::isfinite(total)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
    }
    const double step = cfg.learning_rate / static_cast<double>(train.size());
    for (std::size_t k = 0; k < grad_w.size(); ++k) head.weights[k] -= static_cast<float>(step * grad_w[k]);
    for (std::size_t c = 0; c < classes; ++c) head.bias[c] -= static_cast<float>(step * grad_b[c]);
    for (float v : head.weights) {
      if (!std::isfinite(v)) throw TrainingError("non-finite head weight at epoch " + std::to_string(epoch));
    }
  }

  TrainResult result{head, evaluate_aggregated(data, aggregate(data.test), head, cfg.tau)};
  result.point.lambda = cfg.lambda;
  result.point.seed = cfg.seed;
  return result;
}

std::vector<SweepPoint> sweep_lambda(const Dataset& data, const std::vector<double>& lambdas,
                                     const std::vector<std::uint64_t>& seeds, const TrainConfig& base,
                                     std::size_t threads) {
  if (lambdas.empty() || seeds.empty()) throw UsageError("sweep needs at least one lambda and one seed");
  const std::size_t cells = lambdas.size() * seeds.size();
  std::vector<SweepPoint> points(cells);
  std::vector<std::exception_ptr> failures(cells);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      TrainConfig cfg = base;
      cfg.lambda = lambdas[i / seeds.size()];
      cfg.seed = seeds[i % seeds.size()];
      try {
        points[i] = train_head(data, cfg).point;
      } catch (const TrainingError& e) {
        failures[i] = std::make_exception_ptr(TrainingError(
            "lambda=" + std::to_string(cfg.lambda) + " seed=" + std::to_string(cfg.seed) + ": " + e.what()));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min(thread_count(threads), cells);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return points;
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
  if (points.empty()) throw UsageError("pareto front of an empty point set");
  std::vector<ParetoPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.error_rate != b.error_rate) return a.error_rate < b.error_rate;
    return a.net < b.net;
  });
  std::vector<ParetoPoint> front;
  for (const auto& p : sorted) {
    if (front.empty() || p.net < front.back().net) front.push_back(p);
  }
  return front;
}

}  // namespace videxit
