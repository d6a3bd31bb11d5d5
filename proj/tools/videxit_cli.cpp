// SPDX-License-Identifier: Apache-2.0
// videxit command-line tool. Talks to the engine only through the C API.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "videxit/videxit.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

int exit_code(vx_status s) {
  switch (s) {
    case VX_OK: return kOk;
    case VX_ERR_USAGE: return kUsage;
    case VX_ERR_INTERNAL: return kInternal;
    default: return kData;
  }
}

void check(vx_status s, const std::string& context) {
  if (s == VX_OK) return;
  throw Failure(exit_code(s), context + ": " + vx_last_error());
}

[[noreturn]] void usage(const std::string& what) { throw Failure(kUsage, what); }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Model = std::unique_ptr<vx_model, Deleter<vx_model, vx_model_free>>;
using Clip = std::unique_ptr<vx_clip, Deleter<vx_clip, vx_clip_free>>;
using Trace = std::unique_ptr<vx_trace, Deleter<vx_trace, vx_trace_free>>;
using Stream = std::unique_ptr<vx_stream, Deleter<vx_stream, vx_stream_free>>;
using Sweep = std::unique_ptr<vx_sweep, Deleter<vx_sweep, vx_sweep_free>>;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) throw Failure(kData, path + ": cannot open for writing");
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw Failure(kData, path + ": write failed");
  }

 private:
  std::ofstream file_;
};

Model load_model(const std::string& spec, const std::string& weights) {
  vx_model* m = nullptr;
  check(vx_model_load(spec.c_str(), weights.c_str(), &m), spec + " / " + weights);
  return Model(m);
}

Clip load_clip(const std::string& path) {
  vx_clip* c = nullptr;
  check(vx_clip_load(path.c_str(), &c), path);
  return Clip(c);
}

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) usage("--tau must lie in (0, 1)");
}

void require_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) usage("--lambda values must lie in [0, 1]");
}

void print_report(const vx_report& r) {
  std::cout << "decision: " << r.decision << "\n"
            << "decisive_frame: " << (r.has_decisive_frame ? std::to_string(r.decisive_frame) : "none") << "\n"
            << "p_v: " << num(r.aggregate_prob) << "\n"
            << "exit_time: " << num(r.exit_time) << "\n"
            << "net: " << num(r.net) << "\n";
}

// Binary traces carry the positive-class probability, reported as class 1.
void write_trace(std::ostream& os, const vx_trace* t, bool multiclass) {
  os << "step,class,probability\n";
  const std::size_t classes = vx_trace_classes(t);
  for (std::size_t s = 0; s < vx_trace_steps(t); ++s) {
    for (std::size_t c = 0; c < classes; ++c) {
      os << s << ',' << (multiclass ? c : 1) << ',' << num(vx_trace_value(t, s, c)) << '\n';
    }
  }
}

// ---- classify ---------------------------------------------------------

struct ClassifyArgs {
  std::string spec, weights, clip, out, mode = "offline";
  double tau = 0.5;
  std::size_t chunk = 1;
};

int run_classify(const ClassifyArgs& a) {
  require_tau(a.tau);
  if (a.chunk == 0) usage("--chunk must be >= 1");
  Model model = load_model(a.spec, a.weights);
  Clip clip = load_clip(a.clip);
  vx_model_info info{};
  check(vx_model_info_get(model.get(), &info), "model");

  vx_report report{};
  Trace trace;
  if (a.mode == "offline") {
    vx_trace* t = nullptr;
    check(vx_classify_offline(model.get(), clip.get(), a.tau, &report, &t), a.clip);
    trace.reset(t);
  } else {
    vx_stream_options opts;
    vx_stream_options_default(&opts);
    opts.tau = a.tau;
    vx_stream* s = nullptr;
    check(vx_stream_create(model.get(), &opts, &s), "stream");
    Stream stream(s);
    std::size_t dims[4];
    vx_clip_dims(clip.get(), dims);
    for (std::size_t first = 0; first < dims[1]; first += a.chunk) {
      const std::size_t count = std::min(a.chunk, dims[1] - first);
      check(vx_stream_push_clip(stream.get(), clip.get(), first, count, nullptr), a.clip);
    }
    const vx_status st = vx_stream_report(stream.get(), &report);
    if (st == VX_ERR_NO_REPORT) {
      throw Failure(kData, a.clip + ": need >= " + std::to_string(info.min_frames) + " frames, got " +
                               std::to_string(dims[1]));
    }
    check(st, "stream");
    vx_trace* t = nullptr;
    check(vx_stream_trace(stream.get(), &t), "stream");
    trace.reset(t);
  }

  print_report(report);
  if (!a.out.empty()) {
    Sink sink(a.out);
    write_trace(sink.out(), trace.get(), info.multiclass != 0);
    sink.close(a.out);
  }
  return kOk;
}

// ---- synthetic training ------------------------------------------------

struct TrainArgs {
  vx_dataset_config data{};
  vx_train_config train{};
  bool multiclass = false;
  CLI::Option* classes_opt = nullptr;

  TrainArgs() {
    vx_dataset_config_default(&data);
    vx_train_config_default(&train);
  }

  void attach(CLI::App* cmd) {
    cmd->add_flag("--multiclass", multiclass, "Multiclass synthetic task instead of binary");
    cmd->add_option("--dim", data.dim, "Feature dimension")->capture_default_str();
    classes_opt = cmd->add_option("--classes", data.classes, "Classes (multiclass task)")->default_str("4");
    cmd->add_option("--steps", data.steps, "Trace steps per sample")->capture_default_str();
    cmd->add_option("--noise", data.noise, "Feature noise std-dev")->capture_default_str();
    cmd->add_option("--prototype-scale", data.prototype_scale)->capture_default_str();
    cmd->add_option("--onset-span", data.onset_span, "Onsets uniform over the first N steps")->capture_default_str();
    cmd->add_option("--train-samples", data.train_samples)->capture_default_str();
    cmd->add_option("--test-samples", data.test_samples)->capture_default_str();
    cmd->add_option("--data-seed", data.seed, "Dataset seed")->capture_default_str();
    cmd->add_option("--epochs", train.epochs)->capture_default_str();
    cmd->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
    cmd->add_option("--threads", train.threads, "Worker threads (0: VIDEXIT_THREADS or 1)")->capture_default_str();
  }

  Sweep run(const std::vector<double>& lambdas, const std::vector<std::uint64_t>& seeds) {
    for (double l : lambdas) require_lambda(l);
    data.multiclass = multiclass ? 1 : 0;
    if (!multiclass) {
      data.classes = 2;
    } else if (classes_opt->count() == 0) {
      data.classes = 4;
    }
    vx_sweep* s = nullptr;
    check(vx_sweep_run(&data, &train, lambdas.data(), lambdas.size(), seeds.data(), seeds.size(), &s), "sweep");
    return Sweep(s);
  }
};

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  if (count == 0) usage("--seeds must be >= 1");
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

struct SweepArgs {
  std::vector<double> lambdas{0.1, 0.25, 0.5, 0.75, 1.0};
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  std::string out;
  TrainArgs train;
};

int run_sweep(SweepArgs& a) {
  Sweep sweep = a.train.run(a.lambdas, seed_range(a.seed, a.seeds));
  Sink sink(a.out);
  auto& os = sink.out();
  os << "lambda,seed,error_rate,net,mean_decisive_frame\n";
  for (std::size_t i = 0; i < vx_sweep_size(sweep.get()); ++i) {
    vx_sweep_point p{};
    check(vx_sweep_point_get(sweep.get(), i, &p), "sweep");
    os << num(p.lambda) << ',' << p.seed << ',' << num(p.error_rate) << ',' << num(p.mean_net) << ','
       << num(p.mean_decisive_frame) << '\n';
  }
  sink.close(a.out);
  return kOk;
}

// ---- pareto --------------------------------------------------------------

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Failure(kData, where + ": not a finite number: '" + text + "'");
  }
}

struct ParetoArgs {
  std::string in, out;
};

int run_pareto(const ParetoArgs& a) {
  std::ifstream file(a.in);
  if (!file) throw Failure(kData, a.in + ": cannot open");
  std::string header;
  if (!std::getline(file, header)) usage(a.in + ": empty input");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto names = split(header);
  std::size_t err_col = names.size(), net_col = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "error_rate") err_col = i;
    if (names[i] == "net") net_col = i;
  }
  if (err_col == names.size() || net_col == names.size()) {
    throw Failure(kData, a.in + ": header needs 'error_rate' and 'net' columns");
  }

  std::vector<std::string> rows;
  std::vector<vx_pareto_point> points;
  std::string line;
  for (std::size_t lineno = 2; std::getline(file, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = a.in + ":" + std::to_string(lineno);
    if (cells.size() != names.size()) throw Failure(kData, where + ": wrong column count");
    points.push_back({parse_double(cells[err_col], where), parse_double(cells[net_col], where), rows.size()});
    rows.push_back(line);
  }
  if (points.empty()) usage(a.in + ": no data rows");

  std::vector<vx_pareto_point> front(points.size());
  std::size_t n = 0;
  check(vx_pareto_front(points.data(), points.size(), front.data(), &n), "pareto");
  Sink sink(a.out);
  sink.out() << header << '\n';
  for (std::size_t i = 0; i < n; ++i) sink.out() << rows[front[i].id] << '\n';
  sink.close(a.out);
  return kOk;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  std::string spec, weights, out;
  std::uint64_t seed = 0;
  std::size_t frames = 120, repeats = 5;
  std::vector<std::size_t> chunks{1, 4, 8};
};

Model model_or_demo(const std::string& spec, const std::string& weights, std::uint64_t seed) {
  if (spec.empty() != weights.empty()) usage("--spec and --weights go together");
  if (!spec.empty()) return load_model(spec, weights);
  vx_model* m = nullptr;
  check(vx_model_demo(seed, 0, 1, &m), "demo model");
  return Model(m);
}

int run_bench(const BenchArgs& a) {
  if (a.frames == 0 || a.repeats == 0) usage("--frames and --repeats must be >= 1");
  Model model = model_or_demo(a.spec, a.weights, a.seed);
  vx_model_info info{};
  check(vx_model_info_get(model.get(), &info), "model");
  const std::size_t dims[4] = {info.channels, a.frames, info.height, info.width};
  vx_clip* c = nullptr;
  check(vx_clip_random(a.seed, dims, &c), "clip");
  Clip clip(c);

  Sink sink(a.out);
  auto& os = sink.out();
  os << "chunk,frame,stream_ms,naive_ms\n";
  std::vector<double> stream_ms(a.frames), naive_ms(a.frames);
  for (std::size_t chunk : a.chunks) {
    if (chunk == 0) usage("chunk sizes must be >= 1");
    check(vx_bench_latency(model.get(), clip.get(), chunk, a.repeats, stream_ms.data(), naive_ms.data()), "bench");
    for (std::size_t k = 0; k < a.frames; ++k) {
      os << chunk << ',' << k << ',' << num(stream_ms[k]) << ',' << num(naive_ms[k]) << '\n';
    }
  }
  sink.close(a.out);
  return kOk;
}

// ---- hist ----------------------------------------------------------------

struct HistArgs {
  std::string spec, weights, clip_list, out;
  double lambda = 1.0, tau = 0.5;
  std::uint64_t seed = 0;
  TrainArgs train;
};

int run_hist(HistArgs& a) {
  std::vector<std::size_t> counts;
  if (!a.clip_list.empty()) {
    require_tau(a.tau);
    if (a.spec.empty() || a.weights.empty()) usage("--clip-list needs --spec and --weights");
    Model model = load_model(a.spec, a.weights);
    std::ifstream list(a.clip_list);
    if (!list) throw Failure(kData, a.clip_list + ": cannot open");
    std::string path;
    while (std::getline(list, path)) {
      if (!path.empty() && path.back() == '\r') path.pop_back();
      if (path.empty()) continue;
      Clip clip = load_clip(path);
      vx_report r{};
      check(vx_classify_offline(model.get(), clip.get(), a.tau, &r, nullptr), path);
      if (!r.has_decisive_frame) continue;
      if (counts.size() <= r.decisive_frame) counts.resize(r.decisive_frame + 1, 0);
      ++counts[r.decisive_frame];
    }
  } else {
    if (!a.spec.empty() || !a.weights.empty()) usage("--spec/--weights need --clip-list");
    a.train.train.tau = a.tau;
    require_tau(a.tau);
    Sweep sweep = a.train.run({a.lambda}, {a.seed});
    counts.resize(vx_sweep_histogram(sweep.get(), 0, nullptr, 0));
    vx_sweep_histogram(sweep.get(), 0, counts.data(), counts.size());
  }

  Sink sink(a.out);
  sink.out() << "frame,count\n";
  for (std::size_t f = 0; f < counts.size(); ++f) sink.out() << f << ',' << counts[f] << '\n';
  sink.close(a.out);
  return kOk;
}

// ---- demo ----------------------------------------------------------------

struct DemoArgs {
  std::string spec, weights, clip;
  std::uint64_t seed = 0;
  std::size_t frames = 16, classes = 4;
  bool multiclass = false;
};

int run_demo(const DemoArgs& a) {
  vx_model* m = nullptr;
  check(vx_model_demo(a.seed, a.multiclass ? 1 : 0, a.classes, &m), "demo model");
  Model model(m);
  check(vx_model_save(model.get(), a.spec.c_str(), a.weights.c_str()), a.spec + " / " + a.weights);
  if (!a.clip.empty()) {
    vx_model_info info{};
    check(vx_model_info_get(model.get(), &info), "model");
    const std::size_t dims[4] = {info.channels, a.frames, info.height, info.width};
    vx_clip* c = nullptr;
    check(vx_clip_random(a.seed, dims, &c), "clip");
    Clip clip(c);
    check(vx_clip_save(clip.get(), a.clip.c_str()), a.clip);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming early-exit video classification"};
  app.set_version_flag("--version", vx_version());
  app.require_subcommand(1);

  ClassifyArgs classify;
  auto* c = app.add_subcommand("classify", "Classify one clip and print its exit report");
  c->add_option("--spec", classify.spec, "Network spec (JSON)")->required();
  c->add_option("--weights", classify.weights, "Weights file")->required();
  c->add_option("--clip", classify.clip, "Clip file")->required();
  c->add_option("--tau", classify.tau, "Decision threshold")->capture_default_str();
  c->add_option("--mode", classify.mode)->check(CLI::IsMember({"offline", "stream"}))->capture_default_str();
  c->add_option("--chunk", classify.chunk, "Frames per push in stream mode")->capture_default_str();
  c->add_option("--out", classify.out, "Trace CSV path");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "Train heads over a lambda x seed grid");
  s->add_option("--lambda", sweep.lambdas, "Comma-separated lambda values")->delimiter(',');
  s->add_option("--seed", sweep.seed, "First training seed")->capture_default_str();
  s->add_option("--seeds", sweep.seeds, "Number of consecutive seeds")->capture_default_str();
  s->add_option("--out", sweep.out, "CSV path (default stdout)");
  sweep.train.attach(s);

  ParetoArgs pareto;
  auto* p = app.add_subcommand("pareto", "Keep non-dominated (error_rate, net) rows");
  p->add_option("--in", pareto.in, "CSV with error_rate and net columns")->required();
  p->add_option("--out", pareto.out, "CSV path (default stdout)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Per-frame streaming vs naive latency");
  b->add_option("--spec", bench.spec, "Network spec (default: demo network)");
  b->add_option("--weights", bench.weights);
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--frames", bench.frames)->capture_default_str();
  b->add_option("--repeats", bench.repeats)->capture_default_str();
  b->add_option("--chunk", bench.chunks, "Comma-separated chunk sizes")->delimiter(',');
  b->add_option("--out", bench.out, "CSV path (default stdout)");

  HistArgs hist;
  auto* h = app.add_subcommand("hist", "Histogram of decisive frames");
  h->add_option("--lambda", hist.lambda, "Synthetic route: penalty weight")->capture_default_str();
  h->add_option("--seed", hist.seed, "Synthetic route: training seed")->capture_default_str();
  h->add_option("--tau", hist.tau)->capture_default_str();
  h->add_option("--spec", hist.spec, "Model route: network spec");
  h->add_option("--weights", hist.weights, "Model route: weights file");
  h->add_option("--clip-list", hist.clip_list, "Model route: file with one clip path per line");
  h->add_option("--out", hist.out, "CSV path (default stdout)");
  hist.train.attach(h);

  DemoArgs demo;
  auto* d = app.add_subcommand("demo", "Write a seeded demo network and clip");
  d->add_option("--spec", demo.spec)->required();
  d->add_option("--weights", demo.weights)->required();
  d->add_option("--clip", demo.clip);
  d->add_option("--seed", demo.seed)->capture_default_str();
  d->add_option("--frames", demo.frames)->capture_default_str();
  d->add_flag("--multiclass", demo.multiclass);
  d->add_option("--classes", demo.classes)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c) return run_classify(classify);
    if (*s) return run_sweep(sweep);
    if (*p) return run_pareto(pareto);
    if (*b) return run_bench(bench);
    if (*h) return run_hist(hist);
    if (*d) return run_demo(demo);
    return kUsage;
  } catch (const Failure& e) {
    std::cerr << "videxit: error: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "videxit: internal error: " << e.what() << '\n';
    return kInternal;
  }
}
