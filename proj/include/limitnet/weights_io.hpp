#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "limitnet/convnet.hpp"

namespace limitnet {

// "LNWF" network weights file. Little-endian layout:
//   magic[4] "LNWF", version u16, role u8, precision u8, layer_count u16,
//   layer_count x {kind u8, kernel u8, stride u8, in_ch u16, out_ch u16},
//   for each parameterised layer: weights array then bias array, each as
//     count u32 + count x f32                                  (float32)
//     count u32 + count x i8 + scale f32 + zero_point i32      (int8-affine)
//   CRC32 (zlib polynomial) of every preceding byte.
inline constexpr std::uint16_t kWeightsFileVersion = 1;

std::vector<std::uint8_t> save_weights(const ConvNetSpec& spec);

// Throws BadMagicError, ChecksumError or ShapeInconsistencyError.
ConvNetSpec load_weights(std::span<const std::uint8_t> bytes);

ConvNetSpec load_weights_file(const std::filesystem::path& path);
void save_weights_file(const ConvNetSpec& spec, const std::filesystem::path& path);

}  // namespace limitnet
