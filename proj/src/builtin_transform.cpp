#include "limitnet/builtin_transform.hpp"

#include <cmath>

#include "limitnet/errors.hpp"

namespace limitnet {

SpaceToDepthTransform::SpaceToDepthTransform(int block) : block_(block), order_(block * block) {
  if (block != 1 && block != 2 && block != 4) throw ConfigError("space-to-depth block must be 1, 2 or 4");
  // Sylvester construction: H(2n) = [[H, H], [H, -H]]; row 0 is all ones.
  std::vector<int> h{1};
  int n = 1;
  while (n < order_) {
    std::vector<int> next(static_cast<std::size_t>(4) * n * n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const int v = h[r * n + c];
        next[r * 2 * n + c] = v;
        next[r * 2 * n + c + n] = v;
        next[(r + n) * 2 * n + c] = v;
        next[(r + n) * 2 * n + c + n] = -v;
      }
    }
    h = std::move(next);
    n *= 2;
  }
  const float norm = 1.0f / std::sqrt(static_cast<float>(order_));
  basis_.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) basis_[i] = static_cast<float>(h[i]) * norm;
}

LatentTensor SpaceToDepthTransform::forward(const Image& image) const {
  const int c_in = image.channels();
  if (image.height() != image.width()) throw ShapeError("built-in transform needs a square image");
  if (image.height() % block_ != 0) throw ShapeError("image side must be a multiple of the block size");
  const int side = image.height() / block_;
  Tensor3 out({c_in * order_, side, side});
  std::vector<float> window(order_);
  for (int c = 0; c < c_in; ++c) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        for (int dy = 0; dy < block_; ++dy) {
          for (int dx = 0; dx < block_; ++dx) window[dy * block_ + dx] = image.at(c, y * block_ + dy, x * block_ + dx);
        }
        for (int h = 0; h < order_; ++h) {
          double acc = 0.0;
          for (int j = 0; j < order_; ++j) acc += static_cast<double>(basis_[h * order_ + j]) * window[j];
          out.at(h * c_in + c, y, x) = static_cast<float>(acc);
        }
      }
    }
  }
  return LatentTensor(std::move(out));
}

Tensor3 SpaceToDepthTransform::inverse_raw(const LatentTensor& latent, int image_channels) const {
  if (image_channels <= 0 || latent.channels() != image_channels * order_) {
    throw ShapeError("latent has " + std::to_string(latent.channels()) + " channels, expected " +
                     std::to_string(image_channels * order_));
  }
  const int side = latent.side();
  Tensor3 out({image_channels, side * block_, side * block_});
  const Tensor3& z = latent.tensor();
  for (int c = 0; c < image_channels; ++c) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        for (int j = 0; j < order_; ++j) {
          // The basis is symmetric and orthonormal, so its transpose is its inverse.
          double acc = 0.0;
          for (int h = 0; h < order_; ++h) acc += static_cast<double>(basis_[h * order_ + j]) * z.at(h * image_channels + c, y, x);
          out.at(c, y * block_ + j / block_, x * block_ + j % block_) = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

Image SpaceToDepthTransform::inverse(const LatentTensor& latent, int image_channels) const {
  return Image::clamped(inverse_raw(latent, image_channels));
}

}  // namespace limitnet
