#include "limitnet/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "limitnet/convnet.hpp"
#include "limitnet/errors.hpp"

namespace limitnet {

int QuantParams::zero_level() const noexcept {
  if (degenerate()) return 0;
  const double z = (0.0 - static_cast<double>(lo)) / (static_cast<double>(hi) - lo) * max_level();
  return static_cast<int>(std::clamp<long long>(round_half_away(z), 0, max_level()));
}

void QuantParams::validate() const {
  if (bits < 1 || bits > 8) throw Error("quantizer bits must lie in [1,8]");
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw Error("quantizer range is invalid");
}

QuantParams choose_quant_params(const LatentTensor& latent, int bits) {
  QuantParams q;
  q.bits = bits;
  double m = 0.0, big = 0.0;
  for (float v : latent.data()) {
    m = std::min(m, static_cast<double>(v));
    big = std::max(big, static_cast<double>(v));
  }
  if (m == big) {
    q.lo = q.hi = 0.0f;
    return q;
  }
  const int n = q.max_level();
  // Put zero on a level: lo = -z0 * step, hi = (n - z0) * step, covering [m, big].
  int z0;
  if (m == 0.0) {
    z0 = 0;
  } else if (big == 0.0) {
    z0 = n;
  } else {
    z0 = static_cast<int>(std::clamp<long long>(round_half_away(-m / ((big - m) / n)), 1, n - 1));
  }
  double step = 0.0;
  if (z0 > 0) step = std::max(step, -m / z0);
  if (z0 < n) step = std::max(step, big / (n - z0));
  q.lo = static_cast<float>(-z0 * step);
  q.hi = static_cast<float>((n - z0) * step);
  return q;
}

std::uint8_t quantize_value(float v, const QuantParams& q) {
  if (q.degenerate()) return 0;
  const double t = (static_cast<double>(v) - q.lo) / (static_cast<double>(q.hi) - q.lo) * q.max_level();
  return static_cast<std::uint8_t>(std::clamp<long long>(round_half_away(t), 0, q.max_level()));
}

std::vector<std::uint8_t> quantize_latent(const LatentTensor& latent, const QuantParams& q) {
  q.validate();
  std::vector<std::uint8_t> levels;
  levels.reserve(latent.size());
  for (float v : latent.data()) levels.push_back(quantize_value(v, q));
  return levels;
}

float dequantize_level(std::uint8_t level, const QuantParams& q) {
  if (q.degenerate()) return 0.0f;
  return static_cast<float>((static_cast<int>(level) - q.zero_level()) * q.step());
}

}  // namespace limitnet
