// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded generators for networks and clips, used by the demo command, the
// benchmarks and the property tests.

#include <cstdint>

#include "videxit/network.hpp"

namespace videxit {

struct RandomNetworkOptions {
  std::size_t min_layers = 2;
  std::size_t max_layers = 4;
  SliceShape input{2, 5, 5};
  HeadMode mode = HeadMode::binary;
  std::size_t classes = 1;
};

// Mixed conv / pool / batch norm / activation stack with random temporal
// kernels (1..3), strides (1..2) and front replication (0..k_t).
NetworkSpec random_network(std::uint64_t seed, const RandomNetworkOptions& options = {});

// Fixed 3x16x16 architecture (two causal 3x3x3 convs, batch norm, pooling)
// with seeded weights.
NetworkSpec demo_network(std::uint64_t seed, HeadMode mode = HeadMode::binary, std::size_t classes = 1);

// Values uniform in [-1, 1].
ClipTensor random_clip(std::uint64_t seed, const ClipShape& shape);

}  // namespace videxit
