#pragma once

#include <filesystem>

#include "limitnet/tensor.hpp"

namespace limitnet {

// Portable any-map input: P2/P5 (grey) and P3/P6 (RGB), maxval up to 65535.
Image read_pnm(const std::filesystem::path& path);
// Writes binary P5 for one channel and P6 for three channels, 8 bits per sample.
void write_pnm(const std::filesystem::path& path, const Image& image);

}  // namespace limitnet
