#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "limitnet/tensor.hpp"

namespace limitnet {

enum class LayerKind : std::uint8_t {
  Convolution = 0,
  TransposedConvolution = 1,
  Relu = 2,
  Sigmoid = 3,
  // Adds the tensor that entered layer (index - kernel) to the running activation.
  ResidualAdd = 4,
};

enum class NetRole : std::uint8_t { Encoder = 0, Decoder = 1, Saliency = 2 };

enum class Precision : std::uint8_t { Float32 = 0, Int8Affine = 1 };

// Per-tensor affine int8 storage: real = scale * (q - zero_point).
struct Int8Affine {
  std::vector<std::int8_t> data;
  float scale = 1.0f;
  std::int32_t zero_point = 0;

  friend bool operator==(const Int8Affine&, const Int8Affine&) = default;
};

// A parameter array. `values` always holds the real-valued parameters; `quantized`
// is present for int8-affine networks and is what gets serialized.
struct ParamArray {
  std::vector<float> values;
  std::optional<Int8Affine> quantized;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const ParamArray&, const ParamArray&) = default;
};

// Weight layout: convolution [out][in][ky][kx]; transposed convolution [in][out][ky][kx].
// Convolutions use zero padding of kernel/2 on every side; transposed convolutions add
// stride-1 output padding so that their output side is exactly in * stride.
struct Layer {
  LayerKind kind = LayerKind::Convolution;
  int kernel = 3;
  int stride = 1;
  int in_channels = 0;
  int out_channels = 0;
  ParamArray weights;
  ParamArray bias;

  bool has_parameters() const noexcept {
    return kind == LayerKind::Convolution || kind == LayerKind::TransposedConvolution;
  }
  int padding() const noexcept { return kernel / 2; }
  // Output side for an input side; asserts the usual floor((in + 2p - k)/s) + 1 rule.
  int output_side(int input_side) const;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct ConvNetSpec {
  NetRole role = NetRole::Encoder;
  Precision precision = Precision::Float32;
  std::vector<Layer> layers;

  int input_channels() const;
  int output_channels() const;
  // Shape produced for an input shape; throws ShapeError naming the first bad layer.
  Shape3 output_shape(Shape3 input) const;
  // Checks channel chaining and parameter array lengths.
  void validate() const;

  friend bool operator==(const ConvNetSpec&, const ConvNetSpec&) = default;
};

// Convenience constructors used by tests, tools and the Python module.
Layer make_conv(int in_channels, int out_channels, int kernel, int stride,
                std::vector<float> weights, std::vector<float> bias);
Layer make_transposed_conv(int in_channels, int out_channels, int kernel, int stride,
                           std::vector<float> weights, std::vector<float> bias);
Layer make_activation(LayerKind kind, int channels);
Layer make_residual(int channels, int back);

// Float inference. Pure and deterministic.
Tensor3 conv_forward(const ConvNetSpec& spec, const Tensor3& input);

// Quantizes every parameter array to per-tensor affine int8 (zero included in range).
ConvNetSpec quantize_int8(const ConvNetSpec& spec);

struct Int8ForwardResult {
  Tensor3 output;
  float output_scale = 0.0f;  // int8 step of the last convolution output
};

// Integer-arithmetic inference for Int8Affine networks: inputs to every convolution are
// quantized to int8, products accumulate exactly in integers, and layer outputs are
// requantized to int8 (ReLU outputs stay on their input grid).
Int8ForwardResult conv_forward_int8(const ConvNetSpec& spec, const Tensor3& input);

// Round half away from zero, the rounding rule used throughout the codebase.
inline long long round_half_away(double v) { return std::llround(v); }

}  // namespace limitnet
