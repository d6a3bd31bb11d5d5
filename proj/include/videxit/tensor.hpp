// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace videxit {

struct ClipShape {
  std::size_t channels = 1;
  std::size_t time = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t numel() const noexcept { return channels * time * height * width; }
  // Elements in one time slice across all channels.
  std::size_t slice_numel() const noexcept { return channels * height * width; }
  std::size_t plane() const noexcept { return height * width; }

  friend bool operator==(const ClipShape&, const ClipShape&) = default;
};

// Dense (channel, time, height, width) grid of finite floats, row-major.
class ClipTensor {
 public:
  ClipTensor() = default;
  // Zero-filled. Throws ConfigError if any extent is zero.
  explicit ClipTensor(ClipShape shape);
  // Throws ConfigError on size mismatch, DataError on non-finite values.
  ClipTensor(ClipShape shape, std::vector<float> data);

  const ClipShape& shape() const noexcept { return shape_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  float& at(std::size_t c, std::size_t t, std::size_t h, std::size_t w) {
    return data_[index(c, t, h, w)];
  }
  float at(std::size_t c, std::size_t t, std::size_t h, std::size_t w) const {
    return data_[index(c, t, h, w)];
  }

  // Copies frames [begin, begin + count) into a new clip.
  ClipTensor frames(std::size_t begin, std::size_t count) const;

  // Time slice t in (channel, height, width) order.
  std::vector<float> slice(std::size_t t) const;
  void set_slice(std::size_t t, std::span<const float> values);

  // Stacks (channel, height, width) slices along time.
  static ClipTensor from_slices(std::size_t channels, std::size_t height,
                                std::size_t width,
                                const std::vector<std::vector<float>>& slices);

  friend bool operator==(const ClipTensor&, const ClipTensor&) = default;

 private:
  std::size_t index(std::size_t c, std::size_t t, std::size_t h,
                    std::size_t w) const noexcept {
    return ((c * shape_.time + t) * shape_.height + h) * shape_.width + w;
  }

  ClipShape shape_{};
  std::vector<float> data_ = std::vector<float>(1, 0.0f);
};

// Throws DataError naming `what` if any value is NaN or infinite.
void require_finite(std::span<const float> values, const char* what);

}  // namespace videxit
