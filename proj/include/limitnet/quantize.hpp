#pragma once

#include <cstdint>
#include <vector>

#include "limitnet/tensor.hpp"

namespace limitnet {

// Uniform scalar quantizer over [lo, hi] with 2^bits levels.
struct QuantParams {
  float lo = 0.0f;
  float hi = 1.0f;
  int bits = 6;

  int max_level() const noexcept { return (1 << bits) - 1; }
  bool degenerate() const noexcept { return !(lo < hi); }
  double step() const noexcept { return (static_cast<double>(hi) - lo) / max_level(); }
  // Level whose reconstruction is exactly 0.0 (lo <= 0 <= hi).
  int zero_level() const noexcept;
  // Throws Error if bits is outside [1,8] or lo > hi.
  void validate() const;
  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

// Per-latent range: [min(z), max(z)] widened to contain 0 and snapped so that 0.0 falls on
// a quantization level. An all-zero latent yields the degenerate range lo == hi == 0.
QuantParams choose_quant_params(const LatentTensor& latent, int bits = 6);

// level = clamp(round_half_away((v - lo) / (hi - lo) * (2^bits - 1)), 0, 2^bits - 1);
// degenerate ranges map every value to level 0.
std::uint8_t quantize_value(float v, const QuantParams& q);
std::vector<std::uint8_t> quantize_latent(const LatentTensor& latent, const QuantParams& q);

// (level - zero_level) * step; degenerate ranges dequantize to 0.
float dequantize_level(std::uint8_t level, const QuantParams& q);

}  // namespace limitnet
