// SPDX-License-Identifier: Apache-2.0
#include "videxit/model_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <variant>

#include "json.hpp"
#include "videxit/errors.hpp"

namespace videxit {

using nlohmann::json;

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr char kWeightsMagic[4] = {'P', 'R', 'V', 'W'};
constexpr char kClipMagic[4] = {'P', 'R', 'V', 'C'};
constexpr const char* kSpecFormat = "videxit-network";

// ---------------------------------------------------------------------------
// Little-endian byte streams

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw FormatError(FormatErrorKind::truncated, std::string("unexpected end of data reading ") + what);
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

void check_header(Reader& r, const char (&magic)[4]) {
  if (r.remaining() < 4) throw FormatError(FormatErrorKind::truncated, "file shorter than its magic");
  const std::string got = r.str(4, "magic");
  if (got != std::string(magic, 4)) throw FormatError(FormatErrorKind::bad_magic, "expected " + std::string(magic, 4));
  const std::uint32_t version = r.u32("version");
  if (version != kFormatVersion) {
    throw FormatError(FormatErrorKind::bad_version, "unsupported version " + std::to_string(version));
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrorKind::io, "write failed for " + path.string());
}

std::uint64_t product(const std::vector<std::uint32_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > UINT64_MAX / d) return UINT64_MAX;
    n *= d;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Spec document helpers

std::string at(const std::string& base, const std::string& key) { return base + "/" + key; }

const json& field(const json& obj, const std::string& base, const std::string& key) {
  if (!obj.is_object()) throw ParseError(base, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at(base, key), "missing field");
  return *it;
}

std::size_t count_field(const json& obj, const std::string& base, const std::string& key, bool allow_zero = false) {
  const json& v = field(obj, base, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || (!allow_zero && v.get<std::int64_t>() == 0)) {
    throw ParseError(at(base, key), allow_zero ? "expected a non-negative integer" : "expected a positive integer");
  }
  return v.get<std::size_t>();
}

std::string string_field(const json& obj, const std::string& base, const std::string& key) {
  const json& v = field(obj, base, key);
  if (!v.is_string()) throw ParseError(at(base, key), "expected a string");
  return v.get<std::string>();
}

Extent3 extent_field(const json& obj, const std::string& base, const std::string& key) {
  const json& v = field(obj, base, key);
  if (!v.is_array() || v.size() != 3) throw ParseError(at(base, key), "expected [t, h, w]");
  std::size_t e[3];
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 1) {
      throw ParseError(at(base, key) + "/" + std::to_string(i), "expected a positive integer");
    }
    e[i] = v[i].get<std::size_t>();
  }
  return {e[0], e[1], e[2]};
}

json extent_json(const Extent3& e) { return json::array({e.t, e.h, e.w}); }

class TensorLookup {
 public:
  explicit TensorLookup(const TensorList& tensors) : tensors_(tensors) {}

  std::vector<float> take(const json& obj, const std::string& base, const std::string& key,
                          const std::vector<std::uint32_t>& dims) const {
    const std::string name = string_field(obj, base, key);
    for (const auto& t : tensors_) {
      if (t.name != name) continue;
      if (t.dims != dims) {
        std::string want;
        for (auto d : dims) want += (want.empty() ? "" : "x") + std::to_string(d);
        throw ParseError(at(base, key), "tensor '" + name + "' must have dims " + want);
      }
      return t.values;
    }
    throw ParseError(at(base, key), "tensor '" + name + "' not found in weights");
  }

 private:
  const TensorList& tensors_;
};

std::vector<std::uint32_t> dims_of(std::initializer_list<std::size_t> dims) {
  std::vector<std::uint32_t> out;
  for (auto d : dims) out.push_back(static_cast<std::uint32_t>(d));
  return out;
}

std::string layer_name(std::size_t i, const char* what) {
  return "layers." + std::to_string(i) + "." + what;
}

Layer parse_layer(const json& node, const std::string& loc, const TensorLookup& tensors) {
  const std::string kind = string_field(node, loc, "kind");
  if (kind == "conv") {
    CausalConvSpec s;
    s.in_channels = count_field(node, loc, "in_channels");
    s.out_channels = count_field(node, loc, "out_channels");
    s.kernel = extent_field(node, loc, "kernel");
    s.stride = extent_field(node, loc, "stride");
    const json& pad = field(node, loc, "spatial_padding");
    if (!pad.is_array() || pad.size() != 2 || !pad[0].is_number_integer() || !pad[1].is_number_integer() ||
        pad[0].get<std::int64_t>() < 0 || pad[1].get<std::int64_t>() < 0) {
      throw ParseError(at(loc, "spatial_padding"), "expected [h, w] non-negative integers");
    }
    s.pad_h = pad[0].get<std::size_t>();
    s.pad_w = pad[1].get<std::size_t>();
    s.front_replicate = count_field(node, loc, "front_replicate", true);
    s.weights = tensors.take(node, loc, "weight",
                             dims_of({s.out_channels, s.in_channels, s.kernel.t, s.kernel.h, s.kernel.w}));
    if (!field(node, loc, "bias").is_null()) s.bias = tensors.take(node, loc, "bias", dims_of({s.out_channels}));
    return s;
  }
  if (kind == "pool") {
    CausalPoolSpec s;
    const std::string mode = string_field(node, loc, "mode");
    if (mode == "max") {
      s.mode = PoolMode::max;
    } else if (mode == "average") {
      s.mode = PoolMode::average;
    } else {
      throw ParseError(at(loc, "mode"), "unknown pool mode '" + mode + "'");
    }
    s.kernel = extent_field(node, loc, "kernel");
    s.stride = extent_field(node, loc, "stride");
    s.front_replicate = count_field(node, loc, "front_replicate", true);
    return s;
  }
  if (kind == "batchnorm") {
    CausalBatchNormSpec s;
    const std::size_t c = count_field(node, loc, "channels");
    const json& eps = field(node, loc, "eps");
    if (!eps.is_number() || !(eps.get<double>() > 0.0)) throw ParseError(at(loc, "eps"), "expected a positive number");
    s.eps = eps.get<float>();
    s.stat_depth = count_field(node, loc, "stat_depth");
    s.gamma = tensors.take(node, loc, "gamma", dims_of({c}));
    s.beta = tensors.take(node, loc, "beta", dims_of({c}));
    s.running_mean = tensors.take(node, loc, "running_mean", dims_of({c}));
    s.running_var = tensors.take(node, loc, "running_var", dims_of({c}));
    return s;
  }
  if (kind == "activation") {
    const std::string fn = string_field(node, loc, "function");
    if (fn == "relu") return ActivationSpec{Activation::relu};
    if (fn == "sigmoid") return ActivationSpec{Activation::sigmoid};
    if (fn == "identity") return ActivationSpec{Activation::identity};
    throw ParseError(at(loc, "function"), "unknown activation '" + fn + "'");
  }
  throw ParseError(loc, "unknown layer kind '" + kind + "'");
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

}  // namespace

// ---------------------------------------------------------------------------
// Weights

std::vector<std::uint8_t> encode_weights(const TensorList& tensors) {
  Writer w;
  w.bytes(kWeightsMagic, 4);
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  std::set<std::string> seen;
  for (const auto& t : tensors) {
    if (!seen.insert(t.name).second) throw FormatError(FormatErrorKind::duplicate_name, "tensor '" + t.name + "'");
    if (t.name.size() > 0xFFFF) throw UsageError("tensor name too long");
    if (t.dims.size() > 0xFF) throw UsageError("tensor rank too large");
    if (product(t.dims) != t.values.size()) {
      throw FormatError(FormatErrorKind::dims_mismatch, "tensor '" + t.name + "' dims do not match its values");
    }
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(0);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(d);
    for (float v : t.values) w.f32(v);
  }
  return w.take();
}

TensorList decode_weights(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  check_header(r, kWeightsMagic);
  const std::uint32_t count = r.u32("entry count");
  TensorList out;
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorEntry t;
    const std::uint16_t len = r.u16("name length");
    t.name = r.str(len, "name");
    if (!seen.insert(t.name).second) throw FormatError(FormatErrorKind::duplicate_name, "tensor '" + t.name + "'");
    const std::uint8_t dtype = r.u8("dtype");
    if (dtype != 0) throw FormatError(FormatErrorKind::bad_dtype, "tensor '" + t.name + "' has dtype " + std::to_string(dtype));
    const std::uint8_t rank = r.u8("rank");
    for (std::uint8_t k = 0; k < rank; ++k) t.dims.push_back(r.u32("dims"));
    const std::uint64_t n = product(t.dims);
    if (n > r.remaining() / 4) {
      throw FormatError(FormatErrorKind::truncated, "payload of tensor '" + t.name + "' is cut short");
    }
    t.values.resize(static_cast<std::size_t>(n));
    for (auto& v : t.values) v = r.f32("payload");
    out.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatErrorKind::dims_mismatch, std::to_string(r.remaining()) + " bytes after the last entry");
  }
  return out;
}

void save_weights(const std::filesystem::path& path, const TensorList& tensors) {
  write_file(path, encode_weights(tensors));
}

TensorList load_weights(const std::filesystem::path& path) { return decode_weights(read_file(path)); }

// ---------------------------------------------------------------------------
// Clips

std::vector<std::uint8_t> encode_clip(const ClipTensor& clip) {
  Writer w;
  w.bytes(kClipMagic, 4);
  w.u32(kFormatVersion);
  const ClipShape& s = clip.shape();
  for (std::size_t d : {s.channels, s.time, s.height, s.width}) w.u32(static_cast<std::uint32_t>(d));
  for (float v : clip.data()) w.f32(v);
  return w.take();
}

ClipTensor decode_clip(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  check_header(r, kClipMagic);
  std::vector<std::uint32_t> dims;
  for (int i = 0; i < 4; ++i) dims.push_back(r.u32("dims"));
  for (auto d : dims) {
    if (d == 0) throw FormatError(FormatErrorKind::dims_mismatch, "clip dims must all be >= 1");
  }
  const std::uint64_t n = product(dims);
  if (n > r.remaining() / 4) throw FormatError(FormatErrorKind::truncated, "clip payload is cut short");
  if (n * 4 < r.remaining()) {
    throw FormatError(FormatErrorKind::dims_mismatch, "clip payload is longer than its dims");
  }
  std::vector<float> data(static_cast<std::size_t>(n));
  for (auto& v : data) {
    v = r.f32("payload");
    if (!std::isfinite(v)) throw FormatError(FormatErrorKind::non_finite, "clip payload holds a non-finite value");
  }
  return ClipTensor(ClipShape{dims[0], dims[1], dims[2], dims[3]}, std::move(data));
}

void save_clip(const std::filesystem::path& path, const ClipTensor& clip) { write_file(path, encode_clip(clip)); }

ClipTensor load_clip(const std::filesystem::path& path) { return decode_clip(read_file(path)); }

// ---------------------------------------------------------------------------
// Network spec

TensorList network_tensors(const NetworkSpec& net) {
  TensorList out;
  auto add = [&](std::string name, std::vector<std::uint32_t> dims, const std::vector<float>& values) {
    out.push_back({std::move(name), std::move(dims), values});
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    std::visit(Overloaded{
                   [&](const CausalConvSpec& s) {
                     add(layer_name(i, "weight"),
                         dims_of({s.out_channels, s.in_channels, s.kernel.t, s.kernel.h, s.kernel.w}), s.weights);
                     if (!s.bias.empty()) add(layer_name(i, "bias"), dims_of({s.out_channels}), s.bias);
                   },
                   [&](const CausalBatchNormSpec& s) {
                     const auto dims = dims_of({s.channels()});
                     add(layer_name(i, "gamma"), dims, s.gamma);
                     add(layer_name(i, "beta"), dims, s.beta);
                     add(layer_name(i, "running_mean"), dims, s.running_mean);
                     add(layer_name(i, "running_var"), dims, s.running_var);
                   },
                   [](const auto&) {},
               },
               net.layers[i]);
  }
  add("head.weight", dims_of({net.head.classes, net.head.dim}), net.head.weights);
  add("head.bias", dims_of({net.head.classes}), net.head.bias);
  return out;
}

std::string spec_to_text(const NetworkSpec& net) {
  json doc;
  doc["format"] = kSpecFormat;
  doc["version"] = kFormatVersion;
  doc["input"] = {{"channels", net.input.channels}, {"height", net.input.height}, {"width", net.input.width}};
  json layers = json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    layers.push_back(std::visit(
        Overloaded{
            [&](const CausalConvSpec& s) {
              return json{{"kind", "conv"},
                          {"in_channels", s.in_channels},
                          {"out_channels", s.out_channels},
                          {"kernel", extent_json(s.kernel)},
                          {"stride", extent_json(s.stride)},
                          {"spatial_padding", json::array({s.pad_h, s.pad_w})},
                          {"front_replicate", s.front_replicate},
                          {"weight", layer_name(i, "weight")},
                          {"bias", s.bias.empty() ? json(nullptr) : json(layer_name(i, "bias"))}};
            },
            [&](const CausalPoolSpec& s) {
              return json{{"kind", "pool"},
                          {"mode", s.mode == PoolMode::max ? "max" : "average"},
                          {"kernel", extent_json(s.kernel)},
                          {"stride", extent_json(s.stride)},
                          {"front_replicate", s.front_replicate}};
            },
            [&](const CausalBatchNormSpec& s) {
              return json{{"kind", "batchnorm"},
                          {"channels", s.channels()},
                          {"eps", s.eps},
                          {"stat_depth", s.stat_depth},
                          {"gamma", layer_name(i, "gamma")},
                          {"beta", layer_name(i, "beta")},
                          {"running_mean", layer_name(i, "running_mean")},
                          {"running_var", layer_name(i, "running_var")}};
            },
            [&](const ActivationSpec& s) {
              return json{{"kind", "activation"}, {"function", activation_name(s.kind)}};
            },
        },
        net.layers[i]));
  }
  doc["layers"] = std::move(layers);
  doc["head"] = {{"mode", net.head.mode == HeadMode::binary ? "binary" : "multiclass"},
                 {"classes", net.head.classes},
                 {"feature_dim", net.head.dim},
                 {"weight", "head.weight"},
                 {"bias", "head.bias"}};
  return doc.dump(2) + "\n";
}

NetworkSpec spec_from_text(const std::string& text, const TensorList& tensors) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("", "spec document must be a JSON object");
  if (string_field(doc, "", "format") != kSpecFormat) throw ParseError("/format", "expected '" + std::string(kSpecFormat) + "'");
  const json& version = field(doc, "", "version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kFormatVersion) {
    throw ParseError("/version", "unsupported spec version " + version.dump());
  }

  const TensorLookup lookup(tensors);
  NetworkSpec net;
  const json& input = field(doc, "", "input");
  net.input = {count_field(input, "/input", "channels"), count_field(input, "/input", "height"),
               count_field(input, "/input", "width")};

  const json& layers = field(doc, "", "layers");
  if (!layers.is_array()) throw ParseError("/layers", "expected an array");
  SliceShape sig = net.input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string loc = "/layers/" + std::to_string(i);
    net.layers.push_back(parse_layer(layers[i], loc, lookup));
    try {
      sig = output_signature(net.layers.back(), sig);
    } catch (const Error& e) {
      throw ParseError(loc, e.what());
    }
  }

  const json& head = field(doc, "", "head");
  const std::string mode = string_field(head, "/head", "mode");
  if (mode == "binary") {
    net.head.mode = HeadMode::binary;
  } else if (mode == "multiclass") {
    net.head.mode = HeadMode::multiclass;
  } else {
    throw ParseError("/head/mode", "unknown head mode '" + mode + "'");
  }
  net.head.classes = count_field(head, "/head", "classes");
  net.head.dim = count_field(head, "/head", "feature_dim");
  net.head.weights = lookup.take(head, "/head", "weight", dims_of({net.head.classes, net.head.dim}));
  net.head.bias = lookup.take(head, "/head", "bias", dims_of({net.head.classes}));
  try {
    validate(net.head);
  } catch (const Error& e) {
    throw ParseError("/head", e.what());
  }
  if (sig.channels != net.head.dim) {
    throw ParseError("/head/feature_dim", "last layer yields " + std::to_string(sig.channels) +
                                              " channels but the head expects " + std::to_string(net.head.dim));
  }
  return net;
}

void save_spec(const std::filesystem::path& path, const NetworkSpec& net) {
  const std::string text = spec_to_text(net);
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

NetworkSpec load_spec(const std::filesystem::path& path, const TensorList& tensors) {
  const auto bytes = read_file(path);
  return spec_from_text(std::string(bytes.begin(), bytes.end()), tensors);
}

void save_model(const NetworkSpec& net, const std::filesystem::path& spec_path,
                const std::filesystem::path& weights_path) {
  validate(net);
  save_spec(spec_path, net);
  save_weights(weights_path, network_tensors(net));
}

NetworkSpec load_model(const std::filesystem::path& spec_path, const std::filesystem::path& weights_path) {
  return load_spec(spec_path, load_weights(weights_path));
}

}  // namespace videxit
