#pragma once

#include <cstdint>

#include "limitnet/tensor.hpp"

namespace limitnet {

// Deterministic test scene: a smooth low-contrast background with one or two textured
// foreground objects. Used for experiments when no image set is configured.
Image synthetic_scene(int side, std::uint64_t seed, int channels = 3);

}  // namespace limitnet
