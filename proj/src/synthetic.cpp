#include "limitnet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace limitnet {

Image synthetic_scene(int side, std::uint64_t seed, int channels) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor3 px({channels, side, side});

  // Background: a gentle gradient plus two low-frequency ripples.
  std::vector<double> base(channels), tilt(channels);
  for (int c = 0; c < channels; ++c) {
    base[c] = 0.25 + 0.3 * u(rng);
    tilt[c] = 0.15 * (u(rng) - 0.5);
  }
  const double fx = 1.0 + 2.0 * u(rng), fy = 1.0 + 2.0 * u(rng), phase = 2.0 * std::numbers::pi * u(rng);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const double nx = static_cast<double>(x) / side, ny = static_cast<double>(y) / side;
        const double ripple = 0.04 * std::sin(2.0 * std::numbers::pi * (fx * nx + fy * ny) + phase);
        px.at(c, y, x) = static_cast<float>(base[c] + tilt[c] * (nx + ny) + ripple);
      }
    }
  }

  // Foreground objects: textured ellipses with contrasting colour.
  const int objects = 1 + static_cast<int>(u(rng) * 2.0);
  for (int o = 0; o < objects; ++o) {
    const double cx = side * (0.25 + 0.5 * u(rng)), cy = side * (0.25 + 0.5 * u(rng));
    const double rx = side * (0.08 + 0.12 * u(rng)), ry = side * (0.08 + 0.12 * u(rng));
    const double stripes = 3.0 + 5.0 * u(rng);
    std::vector<double> colour(channels);
    for (int c = 0; c < channels; ++c) colour[c] = u(rng) < 0.5 ? 0.05 + 0.2 * u(rng) : 0.75 + 0.2 * u(rng);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        const double r2 = dx * dx + dy * dy;
        if (r2 > 1.0) continue;
        const double texture = 0.12 * std::sin(stripes * (dx + 0.5 * dy) * std::numbers::pi);
        for (int c = 0; c < channels; ++c) px.at(c, y, x) = static_cast<float>(colour[c] + texture);
      }
    }
  }
  return Image::clamped(std::move(px));
}

}  // namespace limitnet
