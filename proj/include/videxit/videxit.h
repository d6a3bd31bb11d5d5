/* SPDX-License-Identifier: Apache-2.0 */
#ifndef VIDEXIT_H
#define VIDEXIT_H

/*
 * C interface of the videxit streaming early-exit engine.
 *
 * Every fallible call returns a vx_status. On failure the message of the
 * last error raised on the calling thread is available from vx_last_error().
 * Handles are opaque and released with the matching *_free function; freeing
 * NULL is a no-op. A model may be freed while streams created from it are
 * still alive. A stream must not be used from two threads at once; distinct
 * streams may run concurrently.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(VIDEXIT_BUILDING)
#    define VX_API __declspec(dllexport)
#  else
#    define VX_API __declspec(dllimport)
#  endif
#else
#  define VX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vx_status {
  VX_OK = 0,
  VX_ERR_USAGE = 1,     /* bad argument or call order */
  VX_ERR_CONFIG = 2,    /* spec / shape mismatch */
  VX_ERR_DATA = 3,      /* non-finite or too-short input */
  VX_ERR_PARSE = 4,     /* spec document */
  VX_ERR_FORMAT = 5,    /* binary weights / clip container */
  VX_ERR_TRAINING = 6,  /* head training diverged */
  VX_ERR_NO_REPORT = 7, /* stream has not emitted a step yet */
  VX_ERR_INTERNAL = 8
} vx_status;

typedef struct vx_model vx_model;
typedef struct vx_clip vx_clip;
typedef struct vx_trace vx_trace;
typedef struct vx_stream vx_stream;
typedef struct vx_sweep vx_sweep;

VX_API const char* vx_last_error(void);
VX_API const char* vx_status_name(vx_status status);
VX_API const char* vx_version(void);

/* ---- models ---------------------------------------------------------- */

typedef struct vx_model_info {
  size_t channels;
  size_t height;
  size_t width;
  size_t layers;
  size_t classes; /* 1 for binary heads */
  int multiclass;
  size_t min_frames; /* fewest frames that yield one trace step */
} vx_model_info;

VX_API vx_status vx_model_load(const char* spec_path, const char* weights_path, vx_model** out);
VX_API vx_status vx_model_save(const vx_model* model, const char* spec_path, const char* weights_path);
VX_API vx_status vx_model_info_get(const vx_model* model, vx_model_info* out);
/* Latest input frame that trace step `step` depends on. */
VX_API vx_status vx_model_emission_frame(const vx_model* model, size_t step, size_t* frame);
/* Seeded demo network: 3x16x16 input, two causal 3x3x3 convs. classes is
 * ignored unless multiclass is nonzero. */
VX_API vx_status vx_model_demo(uint64_t seed, int multiclass, size_t classes, vx_model** out);
VX_API void vx_model_free(vx_model* model);

/* ---- clips ------------------------------------------------------------ */

/* dims = {channels, time, height, width}; data in that row-major order. */
VX_API vx_status vx_clip_create(const size_t dims[4], const float* data, vx_clip** out);
VX_API vx_status vx_clip_load(const char* path, vx_clip** out);
VX_API vx_status vx_clip_save(const vx_clip* clip, const char* path);
VX_API void vx_clip_dims(const vx_clip* clip, size_t dims[4]);
VX_API const float* vx_clip_data(const vx_clip* clip);
/* Values uniform in [-1, 1]. */
VX_API vx_status vx_clip_random(uint64_t seed, const size_t dims[4], vx_clip** out);
VX_API void vx_clip_free(vx_clip* clip);

/* ---- traces and reports ---------------------------------------------- */

typedef struct vx_report {
  size_t decision; /* binary: 1 positive / 0 negative; multiclass: class */
  int has_decisive_frame;
  size_t decisive_frame; /* trace step; valid when has_decisive_frame */
  double aggregate_prob;
  double exit_time;
  double net;
} vx_report;

VX_API size_t vx_trace_steps(const vx_trace* trace);
VX_API size_t vx_trace_classes(const vx_trace* trace);
VX_API double vx_trace_value(const vx_trace* trace, size_t step, size_t cls);
VX_API double vx_trace_logit(const vx_trace* trace, size_t step, size_t cls);
VX_API void vx_trace_free(vx_trace* trace);

/* Exit statistics of a single-class probability sequence. */
VX_API vx_status vx_exit_stats(const double* probs, size_t steps, double* aggregate_prob, double* exit_time,
                               double* net);

/* Runs the whole clip at once. `trace` may be NULL. */
VX_API vx_status vx_classify_offline(const vx_model* model, const vx_clip* clip, double tau, vx_report* report,
                                     vx_trace** trace);

/* ---- streaming -------------------------------------------------------- */

typedef struct vx_stream_options {
  double tau;
  int retain_trace;
} vx_stream_options;

VX_API void vx_stream_options_default(vx_stream_options* options);
VX_API vx_status vx_stream_create(const vx_model* model, const vx_stream_options* options, vx_stream** out);
/* `data` holds `frames` frames in (channel, time, height, width) order. */
VX_API vx_status vx_stream_push(vx_stream* stream, const float* data, size_t frames, size_t* emitted);
/* Pushes frames [first, first + count) of `clip`. */
VX_API vx_status vx_stream_push_clip(vx_stream* stream, const vx_clip* clip, size_t first, size_t count,
                                     size_t* emitted);
/* VX_ERR_NO_REPORT until the first trace step has been emitted. */
VX_API vx_status vx_stream_report(const vx_stream* stream, vx_report* report);
/* Copy of the retained trace. */
VX_API vx_status vx_stream_trace(const vx_stream* stream, vx_trace** out);
VX_API size_t vx_stream_state_bytes(const vx_stream* stream);
VX_API void vx_stream_free(vx_stream* stream);

/* Per-frame latency in milliseconds for a clip fed in `chunk`-frame pushes.
 * stream_ms[k] is the push cost amortized over its frames; naive_ms[k] is the
 * cost of re-running the whole prefix at the end of that push, amortized the
 * same way. Each value is the median over `repeats` runs. Both arrays hold
 * one entry per clip frame. */
VX_API vx_status vx_bench_latency(const vx_model* model, const vx_clip* clip, size_t chunk, size_t repeats,
                                  double* stream_ms, double* naive_ms);

/* ---- desk-scale training -------------------------------------------- */

typedef struct vx_dataset_config {
  int multiclass;
  size_t dim;
  size_t classes;
  size_t steps;
  double noise;
  double prototype_scale;
  size_t onset_span; /* onsets uniform over steps [0, onset_span) */
  size_t train_samples;
  size_t test_samples;
  uint64_t seed;
} vx_dataset_config;

typedef struct vx_train_config {
  size_t epochs;
  double learning_rate;
  double tau;
  size_t threads; /* 0: VIDEXIT_THREADS or 1 */
} vx_train_config;

typedef struct vx_sweep_point {
  double lambda;
  uint64_t seed;
  double error_rate; /* percent */
  double mean_net;
  double mean_decisive_frame;
  size_t positives;
} vx_sweep_point;

VX_API void vx_dataset_config_default(vx_dataset_config* config);
VX_API void vx_train_config_default(vx_train_config* config);

/* Trains one head per (lambda, seed) pair, lambda major, in request order. */
VX_API vx_status vx_sweep_run(const vx_dataset_config* data, const vx_train_config* train, const double* lambdas,
                              size_t lambda_count, const uint64_t* seeds, size_t seed_count, vx_sweep** out);
VX_API size_t vx_sweep_size(const vx_sweep* sweep);
VX_API vx_status vx_sweep_point_get(const vx_sweep* sweep, size_t index, vx_sweep_point* out);
/* Copies up to `capacity` decisive-frame counts; returns the histogram length. */
VX_API size_t vx_sweep_histogram(const vx_sweep* sweep, size_t index, size_t* counts, size_t capacity);
VX_API void vx_sweep_free(vx_sweep* sweep);

typedef struct vx_pareto_point {
  double error_rate;
  double net;
  size_t id;
} vx_pareto_point;

/* Non-dominated subset sorted by error rate. `out` needs room for `count`. */
VX_API vx_status vx_pareto_front(const vx_pareto_point* points, size_t count, vx_pareto_point* out,
                                 size_t* out_count);

#ifdef __cplusplus
}
#endif

#endif /* VIDEXIT_H */
