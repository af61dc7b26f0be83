#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace limitnet {

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

// Dense channel-major (C, H, W) float tensor with value semantics.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Shape3 shape, float fill = 0.0f);
  Tensor3(Shape3 shape, std::vector<float> data);

  const Shape3& shape() const noexcept { return shape_; }
  int channels() const noexcept { return shape_.channels; }
  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  std::size_t size() const noexcept { return data_.size(); }

  float& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x;
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  const std::vector<float>& values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Shape3 shape_{};
  std::vector<float> data_;
};

// C×H×W image with samples in [0,1].
class Image {
 public:
  Image() = default;
  // Throws ShapeError on length mismatch and Error on samples outside [0,1].
  explicit Image(Tensor3 pixels);
  Image(int channels, int height, int width, float fill = 0.0f);

  const Tensor3& pixels() const noexcept { return pixels_; }
  int channels() const noexcept { return pixels_.channels(); }
  int height() const noexcept { return pixels_.height(); }
  int width() const noexcept { return pixels_.width(); }
  float at(int c, int y, int x) const noexcept { return pixels_.at(c, y, x); }

  // Builds an image from arbitrary values, clamping into [0,1].
  static Image clamped(Tensor3 values);

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Tensor3 pixels_;
};

// L×K×K latent representation; all values finite.
class LatentTensor {
 public:
  LatentTensor() = default;
  explicit LatentTensor(Tensor3 values);
  LatentTensor(int channels, int side, float fill = 0.0f);

  const Tensor3& tensor() const noexcept { return values_; }
  Tensor3& tensor() noexcept { return values_; }
  int channels() const noexcept { return values_.channels(); }
  int side() const noexcept { return values_.height(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const float> data() const noexcept { return values_.data(); }
  std::span<float> data() noexcept { return values_.data(); }

  friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

 private:
  Tensor3 values_;
};

}  // namespace limitnet
