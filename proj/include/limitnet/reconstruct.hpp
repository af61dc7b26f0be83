#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "limitnet/bitstream.hpp"
#include "limitnet/builtin_transform.hpp"
#include "limitnet/convnet.hpp"

namespace limitnet {

// Zero-filled latent: absent positions hold exactly 0.0.
struct PartialLatent {
  LatentTensor values;
  std::vector<bool> present;
  std::vector<std::uint16_t> rejected;

  double present_fraction() const;
};

PartialLatent rebuild_latent(const StreamHeader& header, std::span<const Packet> delivered);

// Dequantized latent for a full set of levels.
LatentTensor dequantize_latent(const StreamHeader& header, std::span<const std::uint8_t> levels);

using Synthesis = std::variant<SpaceToDepthTransform, ConvNetSpec>;

// Runs the synthesis transform and clamps to [0,1].
Image inverse_transform(const Synthesis& synthesis, const LatentTensor& latent, int image_channels = 3);
inline Image inverse_transform(const Synthesis& synthesis, const PartialLatent& partial,
                               int image_channels = 3) {
  return inverse_transform(synthesis, partial.values, image_channels);
}

struct QualityReport {
  double mse = 0.0;
  double salient_mse = 0.0;
  double delivered_fraction = 0.0;
  double latent_mse = 0.0;
};

double mse(const Image& a, const Image& b);
// Weighted MSE; the map is nearest-upsampled to the image grid and normalized to mean 1.
// An all-zero map falls back to uniform weights.
double salient_mse(const Image& original, const Image& reconstructed, const SaliencyMap& map);
double latent_mse(const LatentTensor& partial, const LatentTensor& reference);

// latent_mse is reported only when a reference latent is supplied (0 otherwise).
QualityReport quality(const Image& original, const Image& reconstructed, const SaliencyMap& map,
                      const PartialLatent& partial,
                      const std::optional<LatentTensor>& reference_latent = std::nullopt);

}  // namespace limitnet
