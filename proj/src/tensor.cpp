// SPDX-License-Identifier: Apache-2.0
#include "videxit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "videxit/errors.hpp"

namespace videxit {

const char* to_string(FormatErrorKind kind) noexcept {
  switch (kind) {
    case FormatErrorKind::io: return "io";
    case FormatErrorKind::bad_magic: return "bad_magic";
    case FormatErrorKind::bad_version: return "bad_version";
    case FormatErrorKind::truncated: return "truncated";
    case FormatErrorKind::duplicate_name: return "duplicate_name";
    case FormatErrorKind::bad_dtype: return "bad_dtype";
    case FormatErrorKind::dims_mismatch: return "dims_mismatch";
    case FormatErrorKind::non_finite: return "non_finite";
  }
  return "unknown";
}

namespace {

void check_shape(const ClipShape& shape) {
  if (shape.channels == 0 || shape.time == 0 || shape.height == 0 ||
      shape.width == 0) {
    throw ConfigError("clip shape components must all be >= 1");
  }
}

}  // namespace

void require_finite(std::span<const float> values, const char* what) {
  auto bad = std::find_if(values.begin(), values.end(),
                          [](float v) { return !std::isfinite(v); });
  if (bad != values.end()) {
    throw DataError(std::string(what) + ": non-finite value at element " +
                    std::to_string(bad - values.begin()));
  }
}

ClipTensor::ClipTensor(ClipShape shape) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.numel(), 0.0f);
}

ClipTensor::ClipTensor(ClipShape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.numel()) {
    throw ConfigError("clip data length " + std::to_string(data_.size()) +
                      " does not match shape product " +
                      std::to_string(shape_.numel()));
  }
  require_finite(data_, "clip");
}

ClipTensor ClipTensor::frames(std::size_t begin, std::size_t count) const {
  if (count == 0 || begin + count > shape_.time) {
    throw UsageError("frame range out of bounds");
  }
  ClipShape out_shape = shape_;
  out_shape.time = count;
  ClipTensor out(out_shape);
  const std::size_t plane = shape_.plane();
  for (std::size_t c = 0; c < shape_.channels; ++c) {
    const float* src = data_.data() + (c * shape_.time + begin) * plane;
    float* dst = out.data_.data() + c * count * plane;
    std::copy(src, src + count * plane, dst);
  }
  return out;
}

std::vector<float> ClipTensor::slice(std::size_t t) const {
  std::vector<float> out(shape_.slice_numel());
  const std::size_t plane = shape_.plane();
  for (std::size_t c = 0; c < shape_.channels; ++c) {
    const float* src = data_.data() + (c * shape_.time + t) * plane;
    std::copy(src, src + plane, out.begin() + static_cast<std::ptrdiff_t>(c * plane));
  }
  return out;
}

void ClipTensor::set_slice(std::size_t t, std::span<const float> values) {
  const std::size_t plane = shape_.plane();
  for (std::size_t c = 0; c < shape_.channels; ++c) {
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(c * plane),
              values.begin() + static_cast<std::ptrdiff_t>((c + 1) * plane),
              data_.begin() + static_cast<std::ptrdiff_t>((c * shape_.time + t) * plane));
  }
}

ClipTensor ClipTensor::from_slices(std::size_t channels, std::size_t height,
                                   std::size_t width,
                                   const std::vector<std::vector<float>>& slices) {
  ClipTensor out(ClipShape{channels, slices.size(), height, width});
  for (std::size_t t = 0; t < slices.size(); ++t) {
    out.set_slice(t, slices[t]);
  }
  return out;
}

}  // namespace videxit
