#include "limitnet/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "limitnet/errors.hpp"

namespace limitnet {

double PartialLatent::present_fraction() const {
  if (present.empty()) return 0.0;
  return static_cast<double>(std::count(present.begin(), present.end(), true)) / static_cast<double>(present.size());
}

LatentTensor dequantize_latent(const StreamHeader& header, std::span<const std::uint8_t> levels) {
  if (levels.size() != header.total_values()) throw ShapeError("level count does not match header shape");
  LatentTensor z(header.channels, header.side);
  auto data = z.data();
  for (std::size_t i = 0; i < levels.size(); ++i) data[i] = dequantize_level(levels[i], header.quant);
  return z;
}

PartialLatent rebuild_latent(const StreamHeader& header, std::span<const Packet> delivered) {
  PartialLevels levels = deserialize_partial(header, delivered);
  PartialLatent out;
  out.values = LatentTensor(header.channels, header.side);
  auto data = out.values.data();
  for (std::size_t i = 0; i < levels.levels.size(); ++i) {
    if (levels.present[i]) data[i] = dequantize_level(levels.levels[i], header.quant);
  }
  out.present = std::move(levels.present);
  out.rejected = std::move(levels.rejected);
  return out;
}

Image inverse_transform(const Synthesis& synthesis, const LatentTensor& latent, int image_channels) {
  if (const auto* builtin = std::get_if<SpaceToDepthTransform>(&synthesis)) {
    return builtin->inverse(latent, image_channels);
  }
  const auto& net = std::get<ConvNetSpec>(synthesis);
  Tensor3 out = conv_forward(net, latent.tensor());
  if (out.channels() != image_channels) throw ShapeError("decoder emits " + std::to_string(out.channels()) + " channels");
  return Image::clamped(std::move(out));
}

double mse(const Image& a, const Image& b) {
  if (a.pixels().shape() != b.pixels().shape()) throw ShapeError("images differ in shape");
  const auto x = a.pixels().data(), y = b.pixels().data();
  if (x.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

double salient_mse(const Image& original, const Image& reconstructed, const SaliencyMap& map) {
  if (original.pixels().shape() != reconstructed.pixels().shape()) throw ShapeError("images differ in shape");
  const int h = original.height(), w = original.width();
  if (map.side() <= 0 || h % map.side() != 0 || w % map.side() != 0) {
    throw ShapeError("image size is not a multiple of the saliency map side");
  }
  const int cy = h / map.side(), cx = w / map.side();
  double mean_weight = 0.0;
  for (double v : map.values()) mean_weight += v;
  mean_weight /= static_cast<double>(map.values().size());

  double sum = 0.0;
  for (int c = 0; c < original.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double weight = mean_weight > 0.0 ? map.at(y / cy, x / cx) / mean_weight : 1.0;
        const double d = static_cast<double>(original.at(c, y, x)) - reconstructed.at(c, y, x);
        sum += weight * d * d;
      }
    }
  }
  return sum / static_cast<double>(original.pixels().size());
}

double latent_mse(const LatentTensor& partial, const LatentTensor& reference) {
  if (partial.tensor().shape() != reference.tensor().shape()) throw ShapeError("latents differ in shape");
  const auto a = partial.data(), b = reference.data();
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

QualityReport quality(const Image& original, const Image& reconstructed, const SaliencyMap& map,
                      const PartialLatent& partial, const std::optional<LatentTensor>& reference_latent) {
  QualityReport r;
  r.mse = mse(original, reconstructed);
  r.salient_mse = salient_mse(original, reconstructed, map);
  r.delivered_fraction = partial.present_fraction();
  if (reference_latent) r.latent_mse = latent_mse(partial.values, *reference_latent);
  return r;
}

}  // namespace limitnet
