#pragma once

#include "limitnet/tensor.hpp"

namespace limitnet {

// Parameter-free analysis/synthesis pair: space-to-depth with a block x block window
// followed by an orthonormal Walsh-Hadamard mix of each window (a 1x1 layer whose first
// row is the scaled window average). Latent channel h * C + c holds Hadamard row h of
// colour channel c, so channels 0..C-1 are the per-colour averages.
//
// The transform is orthonormal: squared error in the latent equals squared error in the
// pixels, which is what makes zero-fill reconstruction error monotone in delivered data.
class SpaceToDepthTransform {
 public:
  // block must be 1, 2 or 4.
  explicit SpaceToDepthTransform(int block = 2);

  int block() const noexcept { return block_; }
  int latent_channels(int image_channels) const noexcept { return image_channels * block_ * block_; }

  LatentTensor forward(const Image& image) const;
  // Unclamped synthesis; `image_channels` selects the colour count the latent came from.
  Tensor3 inverse_raw(const LatentTensor& latent, int image_channels) const;
  // Synthesis clamped into [0,1].
  Image inverse(const LatentTensor& latent, int image_channels) const;

 private:
  int block_;
  int order_;
  // Sequency-unordered Sylvester Hadamard matrix, order_ x order_, scaled to orthonormal.
  std::vector<float> basis_;
};

}  // namespace limitnet
