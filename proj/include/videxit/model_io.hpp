// SPDX-License-Identifier: Apache-2.0
#pragma once

// File formats.
//
// Network spec: JSON document {"format": "videxit-network", "version": 1, ...}
// describing the input signature, layers and head. Parameters are referenced
// by tensor name and live in a weights file.
//
// Weights file (little-endian):
//   "PRVW" | u32 version = 1 | u32 entry count |
//   per entry: u16 name length | name (UTF-8) | u8 dtype (0 = f32) | u8 rank |
//              u32 dims[rank] | f32 payload[prod(dims)], row-major
//
// Clip file (little-endian):
//   "PRVC" | u32 version = 1 | u32 C, T, H, W | f32 payload, (c, t, h, w) order

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "videxit/network.hpp"
#include "videxit/tensor.hpp"

namespace videxit {

struct TensorEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  friend bool operator==(const TensorEntry&, const TensorEntry&) = default;
};

using TensorList = std::vector<TensorEntry>;

std::vector<std::uint8_t> encode_weights(const TensorList& tensors);
// Throws FormatError with the kind matching the defect.
TensorList decode_weights(const std::vector<std::uint8_t>& bytes);
void save_weights(const std::filesystem::path& path, const TensorList& tensors);
TensorList load_weights(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_clip(const ClipTensor& clip);
ClipTensor decode_clip(const std::vector<std::uint8_t>& bytes);
void save_clip(const std::filesystem::path& path, const ClipTensor& clip);
ClipTensor load_clip(const std::filesystem::path& path);

// Parameters of `net` under the names its spec document refers to.
TensorList network_tensors(const NetworkSpec& net);
// Spec document text (pretty-printed JSON).
std::string spec_to_text(const NetworkSpec& net);
// Parses a spec document and binds parameters from `tensors`. Throws
// ParseError (with a JSON pointer location) on malformed, unknown, missing or
// chain-incompatible content.
NetworkSpec spec_from_text(const std::string& text, const TensorList& tensors);

void save_spec(const std::filesystem::path& path, const NetworkSpec& net);
NetworkSpec load_spec(const std::filesystem::path& path, const TensorList& tensors);

// Spec document plus weights file.
void save_model(const NetworkSpec& net, const std::filesystem::path& spec_path,
                const std::filesystem::path& weights_path);
NetworkSpec load_model(const std::filesystem::path& spec_path, const std::filesystem::path& weights_path);

}  // namespace videxit
