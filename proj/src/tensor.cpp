#include "limitnet/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "limitnet/errors.hpp"

namespace limitnet {

Tensor3::Tensor3(Shape3 shape, float fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.channels < 0 || shape.height < 0 || shape.width < 0) throw ShapeError("negative tensor extent");
}

Tensor3::Tensor3(Shape3 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     std::to_string(shape_.channels) + "x" + std::to_string(shape_.height) + "x" +
                     std::to_string(shape_.width));
  }
}

bool Tensor3::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Image::Image(Tensor3 pixels) : pixels_(std::move(pixels)) {
  for (float v : pixels_.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw Error("image sample outside [0,1]");
  }
}

Image::Image(int channels, int height, int width, float fill)
    : Image(Tensor3({channels, height, width}, fill)) {}

Image Image::clamped(Tensor3 values) {
  for (float& v : values.data()) v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  Image out;
  out.pixels_ = std::move(values);
  return out;
}

LatentTensor::LatentTensor(Tensor3 values) : values_(std::move(values)) {
  if (values_.height() != values_.width()) throw ShapeError("latent must be square");
  if (!values_.all_finite()) throw NumericError("latent contains non-finite values");
}

LatentTensor::LatentTensor(int channels, int side, float fill) : values_({channels, side, side}, fill) {}

}  // namespace limitnet
