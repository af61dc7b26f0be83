#include <doctest.h>

#include <filesystem>
#include <random>

#include "limitnet/binary_io.hpp"
#include "limitnet/builtin_transform.hpp"
#include "limitnet/errors.hpp"
#include "limitnet/saliency.hpp"
#include "limitnet/synthetic.hpp"
#include "limitnet/weights_io.hpp"
#include "oracles.hpp"

using namespace limitnet;

namespace {

WireSaliency random_wire(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, kWireMaxLevel);
  WireSaliency w;
  for (auto& v : w.levels) v = static_cast<std::uint8_t>(level(rng));
  return w;
}

SaliencyMap random_map(std::mt19937_64& rng, int side) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(side) * side);
  for (auto& x : v) x = u(rng);
  return SaliencyMap(side, std::move(v));
}

}  // namespace

TEST_CASE("uniform grey image gives a flat spectral-residual map") {
  const Image grey(3, 64, 64, 0.5f);
  const SaliencyMap map = SpectralResidualProvider().detect(grey, 32);
  const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
  CHECK(*hi - *lo <= 0.05);
}

TEST_CASE("spectral-residual map is in [0,1], K x K, and highlights the object") {
  const Image scene = synthetic_scene(64, 3);
  const SaliencyMap map = SpectralResidualProvider().detect(scene, 32);
  CHECK(map.side() == 32);
  for (double v : map.values()) CHECK((v >= 0.0 && v <= 1.0));
  CHECK(*std::max_element(map.values().begin(), map.values().end()) == doctest::Approx(1.0));
}

TEST_CASE("file provider returns the stored map") {
  std::mt19937_64 rng(1);
  const SaliencyMap map = random_map(rng, 16);
  const auto path = std::filesystem::temp_directory_path() / "limitnet_test_map.lnsm";
  save_saliency_map_file(map, path);
  const FileSaliencyProvider provider = FileSaliencyProvider::from_file(path);
  const SaliencyMap got = provider.detect(Image(3, 32, 32), LatentTensor(12, 16));
  for (std::size_t i = 0; i < map.values().size(); ++i) {
    CHECK(got.values()[i] == doctest::Approx(map.values()[i]).epsilon(1e-7));
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(FileSaliencyProvider::from_file(path), ConfigError);
  CHECK_THROWS_AS(CnnSaliencyProvider::from_file(path), ConfigError);
}

TEST_CASE("saliency map file rejects corruption") {
  auto bytes = save_saliency_map(SaliencyMap::constant(8, 0.25));
  auto bad = bytes;
  bad[9] ^= 0xff;
  CHECK_THROWS_AS(load_saliency_map(bad), ChecksumError);
  bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(load_saliency_map(bad), BadMagicError);
}

TEST_CASE("CNN provider with zero final weights and sigmoid head gives 0.5") {
  std::mt19937_64 rng(2);
  ConvNetSpec spec;
  spec.role = NetRole::Saliency;
  spec.layers.push_back(oracle::random_conv(rng, 12, 4, 3, 1));
  spec.layers.push_back(make_activation(LayerKind::Relu, 4));
  spec.layers.push_back(make_conv(4, 1, 3, 1, std::vector<float>(4 * 9, 0.0f), {0.0f}));
  spec.layers.push_back(make_activation(LayerKind::Sigmoid, 1));
  const CnnSaliencyProvider provider(spec);
  const LatentTensor latent(oracle::random_tensor(rng, {12, 16, 16}, -1.0f, 1.0f));
  const SaliencyMap map = provider.detect(Image(), latent);
  CHECK(map.side() == 16);
  for (double v : map.values()) CHECK(v == 0.5);
}

TEST_CASE("downsize_quantize examples") {
  CHECK(downsize_quantize(SaliencyMap::constant(32, 0.0)).levels == WireSaliency{}.levels);
  const WireSaliency ones = downsize_quantize(SaliencyMap::constant(32, 1.0));
  for (auto v : ones.levels) CHECK(v == 31);

  std::vector<double> v(32 * 32, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) v[y * 32 + x] = 0.5;
  const WireSaliency w = downsize_quantize(SaliencyMap(32, v));
  CHECK(w.at(0, 0) == 16);  // 15.5 rounds away from zero
  for (std::size_t i = 1; i < w.levels.size(); ++i) CHECK(w.levels[i] == 0);
  CHECK_THROWS_AS(downsize_quantize(SaliencyMap::constant(12, 0.5)), ShapeError);
}

TEST_CASE("block-mean oracle agrees with downsize_quantize") {
  std::mt19937_64 rng(3);
  for (int side : {8, 16, 32, 64}) {
    const SaliencyMap map = random_map(rng, side);
    const WireSaliency w = downsize_quantize(map);
    const int cell = side / 8;
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        double sum = 0;
        for (int y = r * cell; y < (r + 1) * cell; ++y)
          for (int x = c * cell; x < (c + 1) * cell; ++x) sum += map.at(y, x);
        CHECK(w.at(r, c) == std::lround(sum / (cell * cell) * 31.0));
      }
  }
}

TEST_CASE("reconstruct_map examples") {
  WireSaliency full;
  full.levels.fill(31);
  const SaliencyMap all = reconstruct_map(full, 32);
  for (double v : all.values()) CHECK(v == 1.0);

  WireSaliency single;
  single.levels[2 * 8 + 5] = 31;
  const SaliencyMap m = reconstruct_map(single, 32);
  CHECK(std::count(m.values().begin(), m.values().end(), 1.0) == 16);
  CHECK(std::count(m.values().begin(), m.values().end(), 0.0) == 32 * 32 - 16);
  CHECK(m.at(2 * 4, 5 * 4) == 1.0);
  CHECK_THROWS_AS(reconstruct_map(full, 20), ShapeError);
}

TEST_CASE("wire form is a quantization fixed point and serializes to 40 bytes") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const WireSaliency w = random_wire(rng);
    for (int side : {8, 32}) CHECK(downsize_quantize(reconstruct_map(w, side)) == w);
    const auto bytes = w.serialize();
    CHECK(bytes.size() == 40);
    CHECK(WireSaliency::parse(bytes) == w);
  }
}

TEST_CASE("5-bit packing is row-major MSB-first") {
  WireSaliency w;
  w.levels[0] = 0b10000;
  w.levels[1] = 0b00001;
  const auto bytes = w.serialize();
  CHECK(bytes[0] == 0b10000000);
  CHECK(bytes[1] == 0b01000000);
}

TEST_CASE("providers stay within [0,1] on random images") {
  std::mt19937_64 rng(5);
  const SpectralResidualProvider spectral;
  for (int trial = 0; trial < 20; ++trial) {
    const Image img(oracle::random_tensor(rng, {3, 64, 64}));
    const LatentTensor z = SpaceToDepthTransform(2).forward(img);
    const SaliencyMap map = spectral.detect(img, z);
    for (double v : map.values()) CHECK((v >= 0.0 && v <= 1.0));
  }
}
