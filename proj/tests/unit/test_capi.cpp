// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "videxit/videxit.h"

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("videxit_capi_" + name);
}

struct Demo {
  vx_model* model = nullptr;
  vx_clip* clip = nullptr;
  Demo(std::size_t frames = 12) {
    EXPECT_EQ(vx_model_demo(3, 0, 1, &model), VX_OK);
    const size_t dims[4] = {3, frames, 16, 16};
    EXPECT_EQ(vx_clip_random(4, dims, &clip), VX_OK);
  }
  ~Demo() {
    vx_clip_free(clip);
    vx_model_free(model);
  }
};

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(vx_status_name(VX_OK), "ok");
  EXPECT_STREQ(vx_status_name(VX_ERR_FORMAT), "format");
  EXPECT_STREQ(vx_version(), "1.0.0");
}

TEST(CApi, NullArgumentsAreUsageErrors) {
  EXPECT_EQ(vx_model_load(nullptr, nullptr, nullptr), VX_ERR_USAGE);
  EXPECT_STRNE(vx_last_error(), "");
  vx_model_free(nullptr);
  vx_clip_free(nullptr);
  vx_stream_free(nullptr);
}

TEST(CApi, ExitStatsExample) {
  const double p[3] = {0.2, 0.5, 0.3};
  double agg = 0, et = 0, n = 0;
  ASSERT_EQ(vx_exit_stats(p, 3, &agg, &et, &n), VX_OK);
  EXPECT_EQ(agg, 0.5);
  EXPECT_NEAR(et, 0.6, 1e-15);
  EXPECT_NEAR(n, 0.3, 1e-15);
  EXPECT_EQ(vx_exit_stats(p, 0, &agg, &et, &n), VX_ERR_USAGE);
}

TEST(CApi, OfflineAndStreamReportsAgree) {
  Demo d;
  vx_report off{};
  vx_trace* trace = nullptr;
  ASSERT_EQ(vx_classify_offline(d.model, d.clip, 0.5, &off, &trace), VX_OK);
  ASSERT_EQ(vx_trace_steps(trace), 12u);

  vx_stream_options opts;
  vx_stream_options_default(&opts);
  EXPECT_EQ(opts.tau, 0.5);
  vx_stream* s = nullptr;
  ASSERT_EQ(vx_stream_create(d.model, &opts, &s), VX_OK);
  vx_report r{};
  EXPECT_EQ(vx_stream_report(s, &r), VX_ERR_NO_REPORT);
  std::size_t total = 0;
  for (std::size_t first = 0; first < 12; first += 5) {
    std::size_t emitted = 0;
    ASSERT_EQ(vx_stream_push_clip(s, d.clip, first, std::min<std::size_t>(5, 12 - first), &emitted), VX_OK);
    total += emitted;
  }
  EXPECT_EQ(total, 12u);
  ASSERT_EQ(vx_stream_report(s, &r), VX_OK);
  EXPECT_EQ(r.decision, off.decision);
  EXPECT_EQ(r.has_decisive_frame, off.has_decisive_frame);
  EXPECT_EQ(r.exit_time, off.exit_time);
  EXPECT_EQ(r.net, off.net);

  vx_trace* st = nullptr;
  ASSERT_EQ(vx_stream_trace(s, &st), VX_OK);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(vx_trace_value(st, k, 0), vx_trace_value(trace, k, 0));
  EXPECT_GT(vx_stream_state_bytes(s), 0u);
  EXPECT_EQ(vx_stream_push(s, nullptr, 0, nullptr), VX_ERR_USAGE);
  vx_trace_free(st);
  vx_trace_free(trace);
  vx_stream_free(s);
}

TEST(CApi, StreamOutlivesModel) {
  vx_model* m = nullptr;
  ASSERT_EQ(vx_model_demo(1, 0, 1, &m), VX_OK);
  vx_stream* s = nullptr;
  ASSERT_EQ(vx_stream_create(m, nullptr, &s), VX_OK);
  vx_model_free(m);
  std::vector<float> frame(3 * 16 * 16, 0.25f);
  std::size_t emitted = 0;
  EXPECT_EQ(vx_stream_push(s, frame.data(), 1, &emitted), VX_OK);
  EXPECT_EQ(emitted, 1u);
  vx_stream_free(s);
}

TEST(CApi, FilesRoundTripAndFormatErrors) {
  Demo d;
  const auto spec = temp_file("net.json"), weights = temp_file("net.bin"), clip = temp_file("clip.bin");
  ASSERT_EQ(vx_model_save(d.model, spec.c_str(), weights.c_str()), VX_OK);
  ASSERT_EQ(vx_clip_save(d.clip, clip.c_str()), VX_OK);
  vx_model* m = nullptr;
  ASSERT_EQ(vx_model_load(spec.c_str(), weights.c_str(), &m), VX_OK);
  vx_model_info info{};
  ASSERT_EQ(vx_model_info_get(m, &info), VX_OK);
  EXPECT_EQ(info.channels, 3u);
  EXPECT_EQ(info.min_frames, 1u);
  EXPECT_EQ(info.multiclass, 0);
  vx_clip* c = nullptr;
  ASSERT_EQ(vx_clip_load(clip.c_str(), &c), VX_OK);
  size_t dims[4];
  vx_clip_dims(c, dims);
  EXPECT_EQ(dims[1], 12u);

  vx_clip* bad = nullptr;
  EXPECT_EQ(vx_clip_load(weights.c_str(), &bad), VX_ERR_FORMAT);
  EXPECT_EQ(vx_model_load(spec.c_str(), clip.c_str(), &m), VX_ERR_FORMAT);
  EXPECT_EQ(vx_model_load(weights.c_str(), weights.c_str(), &m), VX_ERR_PARSE);
  {
    std::FILE* f = std::fopen(spec.c_str(), "w");
    std::fputs("{\"format\": \"videxit-network\", \"version\": 1, \"layers\": 3}", f);
    std::fclose(f);
  }
  vx_model* m2 = nullptr;
  EXPECT_EQ(vx_model_load(spec.c_str(), weights.c_str(), &m2), VX_ERR_PARSE);

  vx_clip_free(c);
  vx_model_free(m);
  std::filesystem::remove(spec);
  std::filesystem::remove(weights);
  std::filesystem::remove(clip);
}

TEST(CApi, SignatureAndNonFiniteErrors) {
  vx_model* m = nullptr;
  ASSERT_EQ(vx_model_demo(1, 1, 3, &m), VX_OK);
  const float data[4] = {0, 1, 2, 3};
  const size_t dims[4] = {1, 4, 1, 1};
  vx_clip* c = nullptr;
  ASSERT_EQ(vx_clip_create(dims, data, &c), VX_OK);
  vx_report r{};
  EXPECT_EQ(vx_classify_offline(m, c, 0.5, &r, nullptr), VX_ERR_CONFIG);  // wrong signature
  vx_clip_free(c);
  vx_model_free(m);
  const float nan_data[1] = {NAN};
  const size_t one[4] = {1, 1, 1, 1};
  EXPECT_EQ(vx_clip_create(one, nan_data, &c), VX_ERR_DATA);
}

TEST(CApi, SweepHistogramAndPareto) {
  vx_dataset_config data;
  vx_train_config train;
  vx_dataset_config_default(&data);
  vx_train_config_default(&train);
  data.train_samples = 32;
  data.test_samples = 32;
  train.epochs = 10;
  const double lambdas[2] = {0.5, 1.0};
  const uint64_t seeds[2] = {1, 2};
  vx_sweep* sw = nullptr;
  ASSERT_EQ(vx_sweep_run(&data, &train, lambdas, 2, seeds, 2, &sw), VX_OK);
  ASSERT_EQ(vx_sweep_size(sw), 4u);
  std::vector<vx_pareto_point> pts;
  for (std::size_t i = 0; i < 4; ++i) {
    vx_sweep_point p{};
    ASSERT_EQ(vx_sweep_point_get(sw, i, &p), VX_OK);
    EXPECT_EQ(p.lambda, lambdas[i / 2]);
    EXPECT_EQ(p.seed, seeds[i % 2]);
    std::vector<size_t> h(vx_sweep_histogram(sw, i, nullptr, 0));
    EXPECT_EQ(h.size(), data.steps);
    vx_sweep_histogram(sw, i, h.data(), h.size());
    size_t sum = 0;
    for (size_t v : h) sum += v;
    EXPECT_EQ(sum, p.positives);
    pts.push_back({p.error_rate, p.mean_net, i});
  }
  vx_sweep_point p{};
  EXPECT_EQ(vx_sweep_point_get(sw, 4, &p), VX_ERR_USAGE);
  vx_sweep_free(sw);

  std::vector<vx_pareto_point> out(pts.size());
  size_t n = 0;
  ASSERT_EQ(vx_pareto_front(pts.data(), pts.size(), out.data(), &n), VX_OK);
  EXPECT_GE(n, 1u);
  EXPECT_EQ(vx_pareto_front(pts.data(), 0, out.data(), &n), VX_ERR_USAGE);

  const double bad_lambda[1] = {2.0};
  EXPECT_EQ(vx_sweep_run(&data, &train, bad_lambda, 1, seeds, 1, &sw), VX_ERR_USAGE);
}

TEST(CApi, BenchFillsEveryFrame) {
  Demo d(6);
  std::vector<double> s(6, -1.0), n(6, -1.0);
  ASSERT_EQ(vx_bench_latency(d.model, d.clip, 2, 1, s.data(), n.data()), VX_OK);
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_GE(s[k], 0.0);
    EXPECT_GE(n[k], 0.0);
  }
  EXPECT_EQ(vx_bench_latency(d.model, d.clip, 0, 1, s.data(), n.data()), VX_ERR_USAGE);
}

TEST(CApi, EmissionFrame) {
  vx_model* m = nullptr;
  ASSERT_EQ(vx_model_demo(1, 0, 1, &m), VX_OK);
  size_t f = 99;
  ASSERT_EQ(vx_model_emission_frame(m, 5, &f), VX_OK);
  EXPECT_EQ(f, 5u);
  vx_model_free(m);
}
