#include "limitnet/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

std::size_t expected_weight_count(const Layer& l) {
  return static_cast<std::size_t>(l.in_channels) * l.out_channels * l.kernel * l.kernel;
}

void check_finite(const Tensor3& t, int layer) {
  if (!t.all_finite()) throw NumericError("non-finite activation", layer);
}

// Accumulates convolution sums without bias. Acc is double for float inference and
// int64 for the integer path (int8 x int8 products summed exactly).
template <typename Acc, typename In, typename W>
std::vector<Acc> conv_accumulate(const Layer& l, Shape3 in_shape, const In* in, const W* w, int& oh, int& ow) {
  const int k = l.kernel, s = l.stride, p = l.padding();
  const int ih = in_shape.height, iw = in_shape.width;
  oh = (ih + 2 * p - k) / s + 1;
  ow = (iw + 2 * p - k) / s + 1;
  std::vector<Acc> acc(static_cast<std::size_t>(l.out_channels) * oh * ow, Acc{0});
  for (int o = 0; o < l.out_channels; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        Acc sum{0};
        for (int i = 0; i < l.in_channels; ++i) {
          const W* wk = w + ((static_cast<std::size_t>(o) * l.in_channels + i) * k) * k;
          const In* plane = in + static_cast<std::size_t>(i) * ih * iw;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y * s + ky - p;
            if (iy < 0 || iy >= ih) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x * s + kx - p;
              if (ix < 0 || ix >= iw) continue;
              sum += static_cast<Acc>(wk[ky * k + kx]) * static_cast<Acc>(plane[iy * iw + ix]);
            }
          }
        }
        acc[(static_cast<std::size_t>(o) * oh + y) * ow + x] = sum;
      }
    }
  }
  return acc;
}

// Scatter form: every input pixel spreads its kernel footprint onto the stride-s output grid.
template <typename Acc, typename In, typename W>
std::vector<Acc> transposed_accumulate(const Layer& l, Shape3 in_shape, const In* in, const W* w, int& oh,
                                       int& ow) {
  const int k = l.kernel, s = l.stride, p = l.padding();
  const int ih = in_shape.height, iw = in_shape.width;
  oh = ih * s;
  ow = iw * s;
  std::vector<Acc> acc(static_cast<std::size_t>(l.out_channels) * oh * ow, Acc{0});
  for (int i = 0; i < l.in_channels; ++i) {
    const In* plane = in + static_cast<std::size_t>(i) * ih * iw;
    for (int o = 0; o < l.out_channels; ++o) {
      const W* wk = w + ((static_cast<std::size_t>(i) * l.out_channels + o) * k) * k;
      Acc* dst = &acc[static_cast<std::size_t>(o) * oh * ow];
      for (int y = 0; y < ih; ++y) {
        for (int x = 0; x < iw; ++x) {
          const Acc v = static_cast<Acc>(plane[y * iw + x]);
          for (int ky = 0; ky < k; ++ky) {
            const int oy = y * s + ky - p;
            if (oy < 0 || oy >= oh) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ox = x * s + kx - p;
              if (ox < 0 || ox >= ow) continue;
              dst[static_cast<std::size_t>(oy) * ow + ox] += v * static_cast<Acc>(wk[ky * k + kx]);
            }
          }
        }
      }
    }
  }
  return acc;
}

Tensor3 float_layer(const Layer& l, const Tensor3& in) {
  int oh = 0, ow = 0;
  const std::vector<double> acc =
      l.kind == LayerKind::Convolution
          ? conv_accumulate<double>(l, in.shape(), in.data().data(), l.weights.values.data(), oh, ow)
          : transposed_accumulate<double>(l, in.shape(), in.data().data(), l.weights.values.data(), oh, ow);
  Tensor3 out({l.out_channels, oh, ow});
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  for (int o = 0; o < l.out_channels; ++o) {
    for (std::size_t j = 0; j < plane; ++j) {
      out.data()[o * plane + j] = static_cast<float>(acc[o * plane + j] + l.bias.values[o]);
    }
  }
  return out;
}

void apply_activation(LayerKind kind, Tensor3& t) {
  for (float& v : t.data()) {
    if (kind == LayerKind::Relu) {
      v = std::max(v, 0.0f);
    } else {
      v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    }
  }
}

Int8Affine quantize_array(std::span<const float> values) {
  float lo = 0.0f, hi = 0.0f;
  for (float v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Int8Affine q;
  q.scale = hi > lo ? (hi - lo) / 255.0f : 1.0f;
  q.zero_point = static_cast<std::int32_t>(std::clamp<long long>(round_half_away(-128.0 - lo / q.scale), -128, 127));
  q.data.reserve(values.size());
  for (float v : values) {
    const long long level = round_half_away(v / q.scale) + q.zero_point;
    q.data.push_back(static_cast<std::int8_t>(std::clamp<long long>(level, -128, 127)));
  }
  return q;
}

std::vector<float> dequantize_array(const Int8Affine& q) {
  std::vector<float> out;
  out.reserve(q.data.size());
  for (std::int8_t v : q.data) out.push_back(q.scale * static_cast<float>(v - q.zero_point));
  return out;
}

struct QuantizedActivation {
  std::vector<std::int32_t> centered;  // q - zero_point
  float scale = 1.0f;
};

QuantizedActivation quantize_activation(const Tensor3& t) {
  Int8Affine q = quantize_array(t.data());
  QuantizedActivation out;
  out.scale = q.scale;
  out.centered.reserve(q.data.size());
  for (std::int8_t v : q.data) out.centered.push_back(static_cast<std::int32_t>(v) - q.zero_point);
  return out;
}

}  // namespace

int Layer::output_side(int input_side) const {
  switch (kind) {
    case LayerKind::Convolution: {
      const int p = padding();
      const int side = (input_side + 2 * p - kernel) / stride + 1;
      return side;
    }
    case LayerKind::TransposedConvolution:
      return input_side * stride;
    default:
      return input_side;
  }
}

int ConvNetSpec::input_channels() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  return layers.front().in_channels;
}

int ConvNetSpec::output_channels() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  return layers.back().out_channels;
}

void ConvNetSpec::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const int idx = static_cast<int>(i);
    if (l.in_channels <= 0 || l.out_channels <= 0) throw ShapeError("channel counts must be positive", idx);
    if (i > 0 && layers[i - 1].out_channels != l.in_channels) {
      throw ShapeError("expects " + std::to_string(l.in_channels) + " input channels but previous layer emits " +
                           std::to_string(layers[i - 1].out_channels),
                       idx);
    }
    if (l.has_parameters()) {
      if (l.kernel < 1 || l.kernel % 2 == 0) throw ShapeError("kernel size must be odd", idx);
      if (l.stride < 1) throw ShapeError("stride must be positive", idx);
      if (l.weights.size() != expected_weight_count(l)) throw ShapeError("weight array length mismatch", idx);
      if (l.bias.size() != static_cast<std::size_t>(l.out_channels)) throw ShapeError("bias length mismatch", idx);
    } else {
      if (l.in_channels != l.out_channels) throw ShapeError("elementwise layer changes channel count", idx);
      if (l.kind == LayerKind::ResidualAdd && (l.kernel < 1 || l.kernel > idx)) {
        throw ShapeError("residual source out of range", idx);
      }
    }
  }
}

Shape3 ConvNetSpec::output_shape(Shape3 input) const {
  validate();
  if (input.channels != input_channels()) {
    throw ShapeError("input has " + std::to_string(input.channels) + " channels, network expects " +
                         std::to_string(input_channels()),
                     0);
  }
  std::vector<Shape3> entered;
  Shape3 s = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    entered.push_back(s);
    if (l.kind == LayerKind::ResidualAdd) {
      if (entered[i - l.kernel] != s) throw ShapeError("residual operands differ in shape", static_cast<int>(i));
      continue;
    }
    const int h = l.output_side(s.height), w = l.output_side(s.width);
    if (h <= 0 || w <= 0) throw ShapeError("spatial extent collapses to zero", static_cast<int>(i));
    s = {l.out_channels, h, w};
  }
  return s;
}

Layer make_conv(int in_channels, int out_channels, int kernel, int stride, std::vector<float> weights,
                std::vector<float> bias) {
  Layer l;
  l.kind = LayerKind::Convolution;
  l.kernel = kernel;
  l.stride = stride;
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  l.weights.values = std::move(weights);
  l.bias.values = std::move(bias);
  return l;
}

Layer make_transposed_conv(int in_channels, int out_channels, int kernel, int stride, std::vector<float> weights,
                           std::vector<float> bias) {
  Layer l = make_conv(in_channels, out_channels, kernel, stride, std::move(weights), std::move(bias));
  l.kind = LayerKind::TransposedConvolution;
  return l;
}

Layer make_activation(LayerKind kind, int channels) {
  Layer l;
  l.kind = kind;
  l.kernel = 1;
  l.stride = 1;
  l.in_channels = l.out_channels = channels;
  return l;
}

Layer make_residual(int channels, int back) {
  Layer l = make_activation(LayerKind::ResidualAdd, channels);
  l.kernel = back;
  return l;
}

Tensor3 conv_forward(const ConvNetSpec& spec, const Tensor3& input) {
  spec.output_shape(input.shape());
  std::vector<Tensor3> entered;
  const bool keep = std::any_of(spec.layers.begin(), spec.layers.end(),
                                [](const Layer& l) { return l.kind == LayerKind::ResidualAdd; });
  Tensor3 x = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Layer& l = spec.layers[i];
    if (keep) entered.push_back(x);
    switch (l.kind) {
      case LayerKind::Convolution:
      case LayerKind::TransposedConvolution:
        x = float_layer(l, x);
        break;
      case LayerKind::Relu:
      case LayerKind::Sigmoid:
        apply_activation(l.kind, x);
        break;
      case LayerKind::ResidualAdd: {
        const Tensor3& src = entered[i - l.kernel];
        auto dst = x.data();
        auto add = src.data();
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += add[j];
        break;
      }
    }
    check_finite(x, static_cast<int>(i));
  }
  return x;
}

ConvNetSpec quantize_int8(const ConvNetSpec& spec) {
  spec.validate();
  ConvNetSpec out = spec;
  out.precision = Precision::Int8Affine;
  for (Layer& l : out.layers) {
    if (!l.has_parameters()) continue;
    for (ParamArray* arr : {&l.weights, &l.bias}) {
      arr->quantized = quantize_array(arr->values);
      arr->values = dequantize_array(*arr->quantized);
    }
  }
  return out;
}

Int8ForwardResult conv_forward_int8(const ConvNetSpec& spec, const Tensor3& input) {
  if (spec.precision != Precision::Int8Affine) throw Error("conv_forward_int8 requires an int8-affine network");
  spec.output_shape(input.shape());
  Int8ForwardResult result;
  std::vector<Tensor3> entered;
  Tensor3 x = input;
  float scale = 0.0f;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Layer& l = spec.layers[i];
    entered.push_back(x);
    if (l.has_parameters()) {
      // Integer accumulation: (xq - zx) * (wq - zw) summed exactly, then scaled once.
      const QuantizedActivation act = quantize_activation(x);
      const Int8Affine& wq = *l.weights.quantized;
      std::vector<std::int32_t> centered_w(wq.data.size());
      for (std::size_t j = 0; j < wq.data.size(); ++j) centered_w[j] = wq.data[j] - wq.zero_point;
      int oh = 0, ow = 0;
      const std::vector<std::int64_t> sums =
          l.kind == LayerKind::Convolution
              ? conv_accumulate<std::int64_t>(l, x.shape(), act.centered.data(), centered_w.data(), oh, ow)
              : transposed_accumulate<std::int64_t>(l, x.shape(), act.centered.data(), centered_w.data(), oh, ow);
      const double product_scale = static_cast<double>(act.scale) * wq.scale;
      Tensor3 acc({l.out_channels, oh, ow});
      const std::size_t plane = static_cast<std::size_t>(oh) * ow;
      for (int o = 0; o < l.out_channels; ++o) {
        for (std::size_t j = 0; j < plane; ++j) {
          acc.data()[o * plane + j] =
              static_cast<float>(static_cast<double>(sums[o * plane + j]) * product_scale + l.bias.values[o]);
        }
      }
      x = std::move(acc);
    } else if (l.kind == LayerKind::ResidualAdd) {
      const Tensor3& src = entered[i - l.kernel];
      for (std::size_t j = 0; j < x.size(); ++j) x.data()[j] += src.data()[j];
    } else {
      apply_activation(l.kind, x);
    }
    check_finite(x, static_cast<int>(i));
    // ReLU maps grid points onto the same grid; everything else is requantized to int8.
    if (l.kind != LayerKind::Relu) {
      const Int8Affine q = quantize_array(x.data());
      const std::vector<float> deq = dequantize_array(q);
      std::copy(deq.begin(), deq.end(), x.data().begin());
      if (l.has_parameters()) scale = q.scale;
    }
  }
  result.output = std::move(x);
  result.output_scale = scale;
  return result;
}

}  // namespace limitnet
