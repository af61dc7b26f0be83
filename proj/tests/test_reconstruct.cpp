#include <doctest.h>

#include <cmath>
#include <random>

#include "limitnet/errors.hpp"
#include "limitnet/reconstruct.hpp"
#include "limitnet/synthetic.hpp"
#include "oracles.hpp"

using namespace limitnet;

namespace {

SaliencyMap random_map(std::mt19937_64& rng, int side) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(side) * side);
  for (auto& x : v) x = u(rng);
  return SaliencyMap(side, std::move(v));
}

struct Encoded {
  Image image;
  LatentTensor latent;
  EncodedImage enc;
};

Encoded encode_scene(std::uint64_t seed, double g = 0.2) {
  const Image img = synthetic_scene(64, seed);
  const LatentTensor z = SpaceToDepthTransform(2).forward(img);
  std::mt19937_64 rng(seed);
  CodecConfig config;
  config.g_factor = g;
  return {img, z, serialize(z, random_map(rng, 32), config)};
}

}  // namespace

TEST_CASE("full delivery rebuilds the dequantized latent") {
  const Encoded e = encode_scene(1);
  const PartialLatent full = rebuild_latent(e.enc.bitstream.header, e.enc.bitstream.packets);
  CHECK(full.present_fraction() == 1.0);
  CHECK(full.values == dequantize_latent(e.enc.bitstream.header, e.enc.levels));
}

TEST_CASE("empty delivery gives the all-zero latent") {
  const Encoded e = encode_scene(2);
  const PartialLatent none = rebuild_latent(e.enc.bitstream.header, {});
  CHECK(none.present_fraction() == 0.0);
  for (float v : none.values.data()) CHECK(v == 0.0f);
}

TEST_CASE("half delivery fills exactly the top half of the priority order") {
  const Encoded e = encode_scene(3);
  const auto& bs = e.enc.bitstream;
  const std::vector<Packet> half(bs.packets.begin(), bs.packets.begin() + bs.packets.size() / 2);
  const PartialLatent p = rebuild_latent(bs.header, half);
  const StreamHeader& h = bs.header;
  const PriorityOrder order =
      oracle::sort_order(gradual_scoring(ordering_map(h), h.channels, h.g_factor(), h.channel_order).values);
  const LatentTensor deq = dequantize_latent(h, e.enc.levels);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const bool top = r < order.size() / 2;
    CHECK(p.present[order[r]] == top);
    CHECK(p.values.data()[order[r]] == (top ? deq.data()[order[r]] : 0.0f));
  }
}

TEST_CASE("built-in inverse reproduces the image within the quantization bound") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Encoded e = encode_scene(seed);
    const auto& bs = e.enc.bitstream;
    const Image recon = inverse_transform(SpaceToDepthTransform(2), rebuild_latent(bs.header, bs.packets));
    const double half_step = bs.header.quant.step() / 2.0;
    // each pixel mixes block^2 = 4 latent values with weights of magnitude 1/2
    const double bound = 4 * 0.5 * half_step + 1e-5;
    for (std::size_t i = 0; i < recon.pixels().size(); ++i)
      CHECK(std::abs(recon.pixels().data()[i] - e.image.pixels().data()[i]) <= bound);
    CHECK(mse(recon, e.image) <= half_step * half_step + 1e-9);
  }
}

TEST_CASE("all-zero latent gives the constant zero-response image") {
  const Image out = inverse_transform(SpaceToDepthTransform(2), LatentTensor(12, 32, 0.0f));
  CHECK(out.pixels().shape() == Shape3{3, 64, 64});
  for (float v : out.pixels().data()) CHECK(v == out.pixels().data()[0]);
}

TEST_CASE("CNN decoder matches the nested-loop oracle") {
  std::mt19937_64 rng(4);
  ConvNetSpec spec;
  spec.role = NetRole::Decoder;
  spec.layers.push_back(oracle::random_conv(rng, 12, 8, 3, 2, true));
  spec.layers.push_back(make_activation(LayerKind::Relu, 8));
  spec.layers.push_back(oracle::random_conv(rng, 8, 3, 3, 1));
  spec.layers.push_back(make_activation(LayerKind::Sigmoid, 3));
  const LatentTensor z(oracle::random_tensor(rng, {12, 8, 8}, -1.0f, 1.0f));
  const Image out = inverse_transform(spec, z);
  const Tensor3 ref = oracle::forward(spec, z.tensor());
  REQUIRE(out.pixels().shape() == ref.shape());
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out.pixels().data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-5));
  CHECK_THROWS_AS(inverse_transform(spec, LatentTensor(5, 8)), ShapeError);
}

TEST_CASE("mse examples and symmetry") {
  std::mt19937_64 rng(5);
  const Image a(oracle::random_tensor(rng, {3, 16, 16}, 0.0f, 0.8f));
  CHECK(mse(a, a) == 0.0);
  Tensor3 shifted = a.pixels();
  for (auto& v : shifted.data()) v += 0.1f;
  const Image b(shifted);
  CHECK(mse(a, b) == doctest::Approx(0.01).epsilon(1e-5));
  const Image c(oracle::random_tensor(rng, {3, 16, 16}));
  CHECK(mse(a, c) == mse(c, a));
  CHECK_THROWS_AS(mse(a, Image(3, 8, 8)), ShapeError);
}

TEST_CASE("salient_mse is smaller when errors sit in non-salient regions") {
  const Image a(3, 32, 32, 0.5f);
  Tensor3 err = a.pixels();
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 16; x < 32; ++x) err.at(c, y, x) = 0.9f;  // right half wrong
  std::vector<double> m(8 * 8, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 4; ++x) m[y * 8 + x] = 1.0;  // left half salient
  const SaliencyMap map(8, m);
  const Image b(err);
  CHECK(salient_mse(a, b, map) < mse(a, b));
  CHECK(salient_mse(a, b, map) == doctest::Approx(0.0));
  CHECK(salient_mse(a, b, SaliencyMap::constant(8, 0.0)) == doctest::Approx(mse(a, b)));
  CHECK(salient_mse(a, b, SaliencyMap::constant(8, 0.3)) == doctest::Approx(mse(a, b)));
}

TEST_CASE("latent and pixel error are monotone in prefix delivery") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const Encoded e = encode_scene(seed, seed % 2 ? 0.0 : 0.2);
    const auto& bs = e.enc.bitstream;
    const LatentTensor full = dequantize_latent(bs.header, e.enc.levels);
    double prev_latent = 1e300, prev_pixel = 1e300;
    for (std::size_t n = 0; n <= bs.packets.size(); n += 4) {
      const std::vector<Packet> prefix(bs.packets.begin(), bs.packets.begin() + n);
      const PartialLatent p = rebuild_latent(bs.header, prefix);
      const double lm = latent_mse(p.values, full);
      const double pm = mse(inverse_transform(SpaceToDepthTransform(2), p), e.image);
      CHECK(lm <= prev_latent);
      CHECK(pm <= prev_pixel + 1e-12);
      bool nonzero = false;
      if (n >= 4)
        for (std::size_t r = (n - 4) * bs.header.values_per_packet; r < n * bs.header.values_per_packet; ++r)
          nonzero |= e.enc.levels[e.enc.order[r]] != bs.header.quant.zero_level();
      if (nonzero) CHECK(lm < prev_latent);
      prev_latent = lm;
      prev_pixel = pm;
    }
    CHECK(prev_latent == 0.0);
  }
}

TEST_CASE("quality report fields") {
  const Encoded e = encode_scene(20);
  const auto& bs = e.enc.bitstream;
  const std::vector<Packet> some(bs.packets.begin(), bs.packets.begin() + 48);
  const PartialLatent p = rebuild_latent(bs.header, some);
  const Image recon = inverse_transform(SpaceToDepthTransform(2), p);
  const QualityReport q = quality(e.image, recon, ordering_map(bs.header), p, dequantize_latent(bs.header, e.enc.levels));
  CHECK(q.delivered_fraction == doctest::Approx(0.25));
  CHECK(q.mse > 0.0);
  CHECK(q.salient_mse >= 0.0);
  CHECK(q.latent_mse > 0.0);
}
