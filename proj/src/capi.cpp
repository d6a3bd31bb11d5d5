// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <memory>
#include <new>
#include <string>

#include "videxit/errors.hpp"
#include "videxit/exit_math.hpp"
#include "videxit/model_io.hpp"
#include "videxit/random.hpp"
#include "videxit/stream.hpp"
#include "videxit/trainer.hpp"
#include "videxit/videxit.h"

struct vx_model {
  std::shared_ptr<const videxit::NetworkSpec> net;
};

struct vx_clip {
  videxit::ClipTensor clip;
};

struct vx_trace {
  videxit::ProbTrace trace;
};

struct vx_stream {
  videxit::StreamEngine engine;
};

struct vx_sweep {
  std::vector<videxit::SweepPoint> points;
};

namespace {

thread_local std::string g_last_error;

vx_status fail(vx_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs `body`, translating engine exceptions into status codes.
template <class Body>
vx_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return VX_OK;
  } catch (const videxit::UsageError& e) {
    return fail(VX_ERR_USAGE, e.what());
  } catch (const videxit::ConfigError& e) {
    return fail(VX_ERR_CONFIG, e.what());
  } catch (const videxit::DataError& e) {
    return fail(VX_ERR_DATA, e.what());
  } catch (const videxit::ParseError& e) {
    return fail(VX_ERR_PARSE, e.what());
  } catch (const videxit::FormatError& e) {
    return fail(VX_ERR_FORMAT, e.what());
  } catch (const videxit::TrainingError& e) {
    return fail(VX_ERR_TRAINING, e.what());
  } catch (const std::bad_alloc&) {
    return fail(VX_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VX_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VX_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw videxit::UsageError(what);
}

void fill(const videxit::ExitReport& src, vx_report* dst) {
  dst->decision = src.decision;
  dst->has_decisive_frame = src.decisive_frame ? 1 : 0;
  dst->decisive_frame = src.decisive_frame.value_or(0);
  dst->aggregate_prob = src.aggregate_prob;
  dst->exit_time = src.exit_time;
  dst->net = src.net;
}

}  // namespace

extern "C" {

const char* vx_last_error(void) { return g_last_error.c_str(); }

const char* vx_status_name(vx_status status) {
  switch (status) {
    case VX_OK: return "ok";
    case VX_ERR_USAGE: return "usage";
    case VX_ERR_CONFIG: return "config";
    case VX_ERR_DATA: return "data";
    case VX_ERR_PARSE: return "parse";
    case VX_ERR_FORMAT: return "format";
    case VX_ERR_TRAINING: return "training";
    case VX_ERR_NO_REPORT: return "no_report";
    case VX_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* vx_version(void) { return "1.0.0"; }

vx_status vx_model_load(const char* spec_path, const char* weights_path, vx_model** out) {
  return guarded([&] {
    require(spec_path && weights_path && out, "model paths and output handle are required");
    auto net = std::make_shared<const videxit::NetworkSpec>(videxit::load_model(spec_path, weights_path));
    *out = new vx_model{std::move(net)};
  });
}

vx_status vx_model_save(const vx_model* model, const char* spec_path, const char* weights_path) {
  return guarded([&] {
    require(model && spec_path && weights_path, "model and paths are required");
    videxit::save_model(*model->net, spec_path, weights_path);
  });
}

vx_status vx_model_info_get(const vx_model* model, vx_model_info* out) {
  return guarded([&] {
    require(model && out, "model and output are required");
    const auto& net = *model->net;
    *out = vx_model_info{net.input.channels, net.input.height, net.input.width, net.layers.size(),
                         net.head.classes, net.head.mode == videxit::HeadMode::multiclass ? 1 : 0,
                         videxit::min_frames(net)};
  });
}

vx_status vx_model_emission_frame(const vx_model* model, size_t step, size_t* frame) {
  return guarded([&] {
    require(model && frame, "model and output are required");
    *frame = videxit::emission_frame(*model->net, step);
  });
}

vx_status vx_model_demo(uint64_t seed, int multiclass, size_t classes, vx_model** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is required");
    const auto mode = multiclass ? videxit::HeadMode::multiclass : videxit::HeadMode::binary;
    if (multiclass) require(classes >= 2, "multiclass demo needs >= 2 classes");
    auto net = std::make_shared<const videxit::NetworkSpec>(videxit::demo_network(seed, mode, multiclass ? classes : 1));
    *out = new vx_model{std::move(net)};
  });
}

void vx_model_free(vx_model* model) { delete model; }

vx_status vx_clip_create(const size_t dims[4], const float* data, vx_clip** out) {
  return guarded([&] {
    require(dims && data && out, "dims, data and output handle are required");
    const videxit::ClipShape shape{dims[0], dims[1], dims[2], dims[3]};
    std::vector<float> values(data, data + shape.numel());
    *out = new vx_clip{videxit::ClipTensor(shape, std::move(values))};
  });
}

vx_status vx_clip_random(uint64_t seed, const size_t dims[4], vx_clip** out) {
  return guarded([&] {
    require(dims && out, "dims and output handle are required");
    *out = new vx_clip{videxit::random_clip(seed, {dims[0], dims[1], dims[2], dims[3]})};
  });
}

vx_status vx_clip_load(const char* path, vx_clip** out) {
  return guarded([&] {
    require(path && out, "path and output handle are required");
    *out = new vx_clip{videxit::load_clip(path)};
  });
}

vx_status vx_clip_save(const vx_clip* clip, const char* path) {
  return guarded([&] {
    require(clip && path, "clip and path are required");
    videxit::save_clip(path, clip->clip);
  });
}

void vx_clip_dims(const vx_clip* clip, size_t dims[4]) {
  const auto& s = clip->clip.shape();
  dims[0] = s.channels;
  dims[1] = s.time;
  dims[2] = s.height;
  dims[3] = s.width;
}

const float* vx_clip_data(const vx_clip* clip) { return clip->clip.data().data(); }

void vx_clip_free(vx_clip* clip) { delete clip; }

size_t vx_trace_steps(const vx_trace* trace) { return trace->trace.steps(); }

size_t vx_trace_classes(const vx_trace* trace) { return trace->trace.classes; }

double vx_trace_value(const vx_trace* trace, size_t step, size_t cls) { return trace->trace.value(step, cls); }

double vx_trace_logit(const vx_trace* trace, size_t step, size_t cls) { return trace->trace.logit(step, cls); }

void vx_trace_free(vx_trace* trace) { delete trace; }

vx_status vx_exit_stats(const double* probs, size_t steps, double* aggregate_prob, double* exit_time, double* net) {
  return guarded([&] {
    require(probs && steps > 0, "a non-empty probability sequence is required");
    const std::span<const double> p(probs, steps);
    if (aggregate_prob) *aggregate_prob = videxit::positive_prob(p);
    if (exit_time) *exit_time = videxit::exit_time(p);
    if (net) *net = videxit::net(p);
  });
}

vx_status vx_classify_offline(const vx_model* model, const vx_clip* clip, double tau, vx_report* report,
                              vx_trace** trace) {
  return guarded([&] {
    require(model && clip && report, "model, clip and report are required");
    videxit::ProbTrace result = videxit::offline_forward(clip->clip, *model->net);
    fill(videxit::decide(result, tau), report);
    if (trace) *trace = new vx_trace{std::move(result)};
  });
}

void vx_stream_options_default(vx_stream_options* options) {
  const videxit::StreamOptions defaults;
  options->tau = defaults.tau;
  options->retain_trace = defaults.retain_trace ? 1 : 0;
}

vx_status vx_stream_create(const vx_model* model, const vx_stream_options* options, vx_stream** out) {
  return guarded([&] {
    require(model && out, "model and output handle are required");
    videxit::StreamOptions opts;
    if (options) opts = {options->tau, options->retain_trace != 0};
    *out = new vx_stream{videxit::StreamEngine(model->net, opts)};
  });
}

vx_status vx_stream_push(vx_stream* stream, const float* data, size_t frames, size_t* emitted) {
  return guarded([&] {
    require(stream != nullptr, "stream is required");
    require(frames > 0, "cannot push a zero-length chunk");
    require(data != nullptr, "chunk data is required");
    const std::size_t n = frames * stream->engine.network().input.numel();
    const auto steps = stream->engine.push(std::span<const float>(data, n), frames).steps();
    if (emitted) *emitted = steps;
  });
}

vx_status vx_stream_push_clip(vx_stream* stream, const vx_clip* clip, size_t first, size_t count,
                              size_t* emitted) {
  return guarded([&] {
    require(stream && clip, "stream and clip are required");
    require(count > 0, "cannot push a zero-length chunk");
    const auto steps = stream->engine.push(clip->clip.frames(first, count)).steps();
    if (emitted) *emitted = steps;
  });
}

vx_status vx_stream_report(const vx_stream* stream, vx_report* report) {
  if (!stream || !report) return fail(VX_ERR_USAGE, "stream and report are required");
  const auto result = stream->engine.report();
  if (!result) return fail(VX_ERR_NO_REPORT, "no trace step emitted yet");
  fill(*result, report);
  g_last_error.clear();
  return VX_OK;
}

vx_status vx_stream_trace(const vx_stream* stream, vx_trace** out) {
  return guarded([&] {
    require(stream && out, "stream and output handle are required");
    *out = new vx_trace{stream->engine.trace()};
  });
}

size_t vx_stream_state_bytes(const vx_stream* stream) { return stream->engine.state_bytes(); }

void vx_stream_free(vx_stream* stream) { delete stream; }

vx_status vx_bench_latency(const vx_model* model, const vx_clip* clip, size_t chunk, size_t repeats,
                           double* stream_ms, double* naive_ms) {
  return guarded([&] {
    require(model && clip && stream_ms && naive_ms, "model, clip and output arrays are required");
    const auto rows = videxit::bench_latency(model->net, clip->clip, chunk, repeats);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      stream_ms[k] = rows[k].stream_ms;
      naive_ms[k] = rows[k].naive_ms;
    }
  });
}

void vx_dataset_config_default(vx_dataset_config* config) {
  const videxit::SyntheticDatasetConfig d;
  *config = vx_dataset_config{d.mode == videxit::HeadMode::multiclass ? 1 : 0,
                              d.dim,
                              d.classes,
                              d.steps,
                              d.noise,
                              d.prototype_scale,
                              d.onset_span,
                              d.train_samples,
                              d.test_samples,
                              d.seed};
}

void vx_train_config_default(vx_train_config* config) {
  const videxit::TrainConfig d;
  *config = vx_train_config{d.epochs, d.learning_rate, d.tau, 0};
}

vx_status vx_sweep_run(const vx_dataset_config* data, const vx_train_config* train, const double* lambdas,
                       size_t lambda_count, const uint64_t* seeds, size_t seed_count, vx_sweep** out) {
  return guarded([&] {
    require(data && train && out, "configs and output handle are required");
    require(lambdas && lambda_count > 0, "at least one lambda is required");
    require(seeds && seed_count > 0, "at least one seed is required");
    const videxit::SyntheticDatasetConfig cfg{data->multiclass ? videxit::HeadMode::multiclass
                                                               : videxit::HeadMode::binary,
                                              data->dim,
                                              data->classes,
                                              data->steps,
                                              data->noise,
                                              data->prototype_scale,
                                              data->onset_span,
                                              data->train_samples,
                                              data->test_samples,
                                              data->seed};
    const auto dataset = videxit::make_synthetic_dataset(cfg);
    videxit::TrainConfig base;
    base.epochs = train->epochs;
    base.learning_rate = train->learning_rate;
    base.tau = train->tau;
    auto points = videxit::sweep_lambda(dataset, std::vector<double>(lambdas, lambdas + lambda_count),
                                        std::vector<std::uint64_t>(seeds, seeds + seed_count), base,
                                        train->threads);
    *out = new vx_sweep{std::move(points)};
  });
}

size_t vx_sweep_size(const vx_sweep* sweep) { return sweep->points.size(); }

vx_status vx_sweep_point_get(const vx_sweep* sweep, size_t index, vx_sweep_point* out) {
  return guarded([&] {
    require(sweep && out, "sweep and output are required");
    require(index < sweep->points.size(), "sweep index out of range");
    const auto& p = sweep->points[index];
    *out = vx_sweep_point{p.lambda, p.seed, p.error_rate, p.mean_net, p.mean_decisive_frame, p.positives};
  });
}

size_t vx_sweep_histogram(const vx_sweep* sweep, size_t index, size_t* counts, size_t capacity) {
  if (!sweep || index >= sweep->points.size()) return 0;
  const auto& h = sweep->points[index].histogram;
  if (counts) std::copy_n(h.begin(), std::min(capacity, h.size()), counts);
  return h.size();
}

void vx_sweep_free(vx_sweep* sweep) { delete sweep; }

vx_status vx_pareto_front(const vx_pareto_point* points, size_t count, vx_pareto_point* out, size_t* out_count) {
  return guarded([&] {
    require(out && out_count, "output array and count are required");
    require(points && count > 0, "pareto front of an empty point set");
    std::vector<videxit::ParetoPoint> in(count);
    for (std::size_t i = 0; i < count; ++i) in[i] = {points[i].error_rate, points[i].net, points[i].id};
    const auto front = videxit::pareto_front(in);
    for (std::size_t i = 0; i < front.size(); ++i) out[i] = {front[i].error_rate, front[i].net, front[i].id};
    *out_count = front.size();
  });
}

}  // extern "C"
