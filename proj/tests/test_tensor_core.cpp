#include <doctest.h>

#include <cstring>
#include <random>

#include "limitnet/binary_io.hpp"
#include "limitnet/builtin_transform.hpp"
#include "limitnet/convnet.hpp"
#include "limitnet/errors.hpp"
#include "limitnet/weights_io.hpp"
#include "oracles.hpp"

using namespace limitnet;

namespace {

float max_abs_diff(const Tensor3& a, const Tensor3& b) {
  REQUIRE(a.shape() == b.shape());
  float m = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

ConvNetSpec single(Layer l) {
  ConvNetSpec spec;
  spec.layers.push_back(std::move(l));
  return spec;
}

}  // namespace

TEST_CASE("1x1 identity convolution reproduces its input") {
  std::mt19937_64 rng(1);
  const int c = 3;
  std::vector<float> w(c * c, 0.0f);
  for (int i = 0; i < c; ++i) w[i * c + i] = 1.0f;
  const ConvNetSpec spec = single(make_conv(c, c, 1, 1, w, std::vector<float>(c, 0.0f)));
  const Tensor3 x = oracle::random_tensor(rng, {c, 5, 7});
  CHECK(conv_forward(spec, x) == x);
}

TEST_CASE("all-zero 3x3 weights emit the bias everywhere") {
  std::mt19937_64 rng(2);
  const ConvNetSpec spec = single(make_conv(2, 3, 3, 1, std::vector<float>(2 * 3 * 9, 0.0f), {0.25f, -1.5f, 3.0f}));
  const Tensor3 out = conv_forward(spec, oracle::random_tensor(rng, {2, 6, 6}));
  for (int o = 0; o < 3; ++o)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) CHECK(out.at(o, y, x) == spec.layers[0].bias.values[o]);
}

TEST_CASE("stride-2 conv + relu on 3x8x8 matches the nested-loop oracle") {
  std::mt19937_64 rng(3);
  ConvNetSpec spec;
  spec.layers.push_back(oracle::random_conv(rng, 3, 4, 3, 2));
  spec.layers.push_back(make_activation(LayerKind::Relu, 4));
  const Tensor3 x = oracle::random_tensor(rng, {3, 8, 8});
  const Tensor3 got = conv_forward(spec, x);
  CHECK(got.shape() == Shape3{4, 4, 4});
  CHECK(max_abs_diff(got, oracle::forward(spec, x)) <= 1e-5f);
}

TEST_CASE("oracle equivalence across kernels and strides, forward and transposed") {
  std::mt19937_64 rng(4);
  for (int k : {3, 5, 7}) {
    for (int s : {1, 2}) {
      for (bool transposed : {false, true}) {
        CAPTURE(k);
        CAPTURE(s);
        CAPTURE(transposed);
        const ConvNetSpec spec = single(oracle::random_conv(rng, 2, 3, k, s, transposed));
        const Tensor3 x = oracle::random_tensor(rng, {2, 9, 9}, -1.0f, 1.0f);
        CHECK(max_abs_diff(conv_forward(spec, x), oracle::forward(spec, x)) <= 1e-5f);
      }
    }
  }
}

TEST_CASE("output side follows floor((in + 2p - k)/s) + 1 for every layer") {
  std::mt19937_64 rng(5);
  for (int k : {1, 3, 5, 7})
    for (int s : {1, 2, 3})
      for (int in : {5, 8, 9, 16}) {
        const ConvNetSpec spec = single(oracle::random_conv(rng, 1, 1, k, s));
        const int expected = (in + 2 * (k / 2) - k) / s + 1;
        CHECK(spec.output_shape({1, in, in}).height == expected);
        CHECK(conv_forward(spec, Tensor3({1, in, in}, 0.5f)).height() == expected);
      }
}

TEST_CASE("residual add and sigmoid head") {
  std::mt19937_64 rng(6);
  ConvNetSpec spec;
  spec.layers.push_back(oracle::random_conv(rng, 2, 2, 3, 1));
  spec.layers.push_back(make_activation(LayerKind::Relu, 2));
  spec.layers.push_back(make_residual(2, 2));
  spec.layers.push_back(oracle::random_conv(rng, 2, 1, 3, 1));
  spec.layers.push_back(make_activation(LayerKind::Sigmoid, 1));
  const Tensor3 x = oracle::random_tensor(rng, {2, 8, 8});
  const Tensor3 got = conv_forward(spec, x);
  CHECK(max_abs_diff(got, oracle::forward(spec, x)) <= 1e-5f);
  for (float v : got.data()) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("conv_forward is deterministic bit for bit") {
  std::mt19937_64 rng(7);
  ConvNetSpec spec;
  spec.layers.push_back(oracle::random_conv(rng, 3, 8, 5, 2));
  spec.layers.push_back(make_activation(LayerKind::Relu, 8));
  spec.layers.push_back(oracle::random_conv(rng, 8, 4, 3, 1, true));
  const Tensor3 x = oracle::random_tensor(rng, {3, 16, 16});
  const Tensor3 a = conv_forward(spec, x), b = conv_forward(spec, x);
  CHECK(std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0);
}

TEST_CASE("shape mismatch names the offending layer") {
  std::mt19937_64 rng(8);
  ConvNetSpec spec;
  spec.layers.push_back(oracle::random_conv(rng, 3, 4, 3, 1));
  spec.layers.push_back(oracle::random_conv(rng, 5, 2, 3, 1));
  try {
    conv_forward(spec, Tensor3({3, 8, 8}));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(e.layer() == 1);
  }
  ConvNetSpec ok = single(oracle::random_conv(rng, 3, 4, 3, 1));
  CHECK_THROWS_AS(conv_forward(ok, Tensor3({2, 8, 8})), ShapeError);
}

TEST_CASE("non-finite intermediates raise a numeric error") {
  ConvNetSpec spec = single(make_conv(1, 1, 1, 1, {3.0e38f}, {0.0f}));
  CHECK_THROWS_AS(conv_forward(spec, Tensor3({1, 2, 2}, 10.0f)), NumericError);
}

TEST_CASE("weights file round-trips float32 and int8 networks bit-exactly") {
  std::mt19937_64 rng(9);
  ConvNetSpec spec;
  spec.role = NetRole::Decoder;
  spec.layers.push_back(oracle::random_conv(rng, 12, 8, 3, 1, true));
  spec.layers.push_back(make_activation(LayerKind::Relu, 8));
  spec.layers.push_back(oracle::random_conv(rng, 8, 8, 5, 1));
  spec.layers.push_back(make_residual(8, 2));
  spec.layers.push_back(oracle::random_conv(rng, 8, 3, 7, 1));
  CHECK(load_weights(save_weights(spec)) == spec);
  const ConvNetSpec q = quantize_int8(spec);
  const auto bytes = save_weights(q);
  CHECK(load_weights(bytes) == q);
  CHECK(save_weights(load_weights(bytes)) == bytes);
}

TEST_CASE("weights file errors are distinct") {
  std::mt19937_64 rng(10);
  const ConvNetSpec spec = single(oracle::random_conv(rng, 2, 3, 3, 1));
  auto bytes = save_weights(spec);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 7);
  CHECK_THROWS_AS(load_weights(truncated), ChecksumError);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_weights(bad_magic), BadMagicError);

  auto flipped = bytes;
  flipped[20] ^= 0x01;
  CHECK_THROWS_AS(load_weights(flipped), ChecksumError);

  // Layer declares 3 output channels but carries only 2 bias values (valid CRC).
  ByteWriter w;
  w.tag("LNWF");
  w.u16(kWeightsFileVersion);
  w.u8(0);
  w.u8(0);
  w.u16(1);
  w.u8(0);
  w.u8(3);
  w.u8(1);
  w.u16(2);
  w.u16(3);
  w.u32(2 * 3 * 9);
  for (int i = 0; i < 2 * 3 * 9; ++i) w.f32(0.1f);
  w.u32(2);
  w.f32(0.0f);
  w.f32(0.0f);
  const std::uint32_t crc = crc32(w.buffer());
  w.u32(crc);
  CHECK_THROWS_AS(load_weights(w.take()), ShapeInconsistencyError);
}

TEST_CASE("int8-affine inference tracks float32 within two output scales") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    ConvNetSpec spec;
    const int k = (trial % 3) * 2 + 3;
    spec.layers.push_back(oracle::random_conv(rng, 3, 4, k, 1 + trial % 2));
    if (trial % 2 == 0) spec.layers.push_back(make_activation(LayerKind::Relu, 4));
    const ConvNetSpec q = quantize_int8(spec);
    const Tensor3 x = oracle::random_tensor(rng, {3, 8, 8});
    const Int8ForwardResult got = conv_forward_int8(q, x);
    // Float32 inference of the same int8-affine network (dequantized parameters).
    const Tensor3 ref = conv_forward(q, x);
    CAPTURE(trial);
    CHECK(max_abs_diff(got.output, ref) <= 2.0f * got.output_scale);
  }
}

TEST_CASE("built-in transform is orthonormal and invertible") {
  std::mt19937_64 rng(12);
  for (int block : {1, 2, 4}) {
    const SpaceToDepthTransform t(block);
    const Image img(oracle::random_tensor(rng, {3, 16, 16}));
    const LatentTensor z = t.forward(img);
    CHECK(z.channels() == 3 * block * block);
    CHECK(z.side() == 16 / block);
    double e_img = 0, e_lat = 0;
    for (float v : img.pixels().data()) e_img += double(v) * v;
    for (float v : z.data()) e_lat += double(v) * v;
    CHECK(e_lat == doctest::Approx(e_img).epsilon(1e-6));
    const Tensor3 back = t.inverse_raw(z, 3);
    CHECK(max_abs_diff(back, img.pixels()) <= 1e-5f);
  }
  // Channels 0..C-1 carry the scaled window average.
  const Image flat(3, 4, 4, 0.5f);
  const LatentTensor z = SpaceToDepthTransform(2).forward(flat);
  CHECK(z.tensor().at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(z.tensor().at(3, 1, 1) == doctest::Approx(0.0));
}
