#include <doctest.h>

#include <random>

#include "limitnet/errors.hpp"
#include "limitnet/scoring.hpp"
#include "oracles.hpp"

using namespace limitnet;

namespace {

SaliencyMap random_map(std::mt19937_64& rng, int side, int levels = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(side) * side);
  for (auto& x : v) x = levels > 0 ? std::floor(u(rng) * levels) / levels : u(rng);
  return SaliencyMap(side, std::move(v));
}

}  // namespace

TEST_CASE("g = 0 gives every channel the saliency map") {
  std::mt19937_64 rng(1);
  const SaliencyMap map = random_map(rng, 8);
  const ScoreTensor s = gradual_scoring(map, 4, 0.0);
  for (int c = 0; c < 4; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) CHECK(s.at(c, y, x) == map.at(y, x));
}

TEST_CASE("g = 0.2 and L = 2 offsets the second channel by 0.2") {
  std::vector<double> v(4, 0.0);
  v[3] = 0.3;
  const ScoreTensor s = gradual_scoring(SaliencyMap(2, v), 2, 0.2, ChannelOrder::Ascending);
  CHECK(s.at(0, 1, 1) == doctest::Approx(0.3));
  CHECK(s.at(1, 1, 1) == doctest::Approx(0.5));
  const ScoreTensor d = gradual_scoring(SaliencyMap(2, v), 2, 0.2, ChannelOrder::Descending);
  CHECK(d.at(0, 1, 1) == doctest::Approx(0.5));
  CHECK(d.at(1, 1, 1) == doctest::Approx(0.3));
}

TEST_CASE("ascending L=3 K=1 example") {
  const ScoreTensor s = gradual_scoring(SaliencyMap(1, {0.4}), 3, 1.0, ChannelOrder::Ascending);
  REQUIRE(s.values.size() == 3);
  CHECK(s.values[0] == doctest::Approx(0.4));
  CHECK(s.values[1] == doctest::Approx(1.4));
  CHECK(s.values[2] == doctest::Approx(2.4));
}

TEST_CASE("negative G_Factor is rejected") {
  CHECK_THROWS_AS(gradual_scoring(SaliencyMap::constant(8, 0.1), 2, -0.1), Error);
}

TEST_CASE("all-equal scores give the identity permutation") {
  const PriorityOrder order = priority_order(gradual_scoring(SaliencyMap::constant(4, 0.7), 3, 0.0));
  for (std::uint32_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
}

TEST_CASE("L=1 K=2 example visits (0,0),(1,1),(1,0),(0,1)") {
  const ScoreTensor s = gradual_scoring(SaliencyMap(2, {0.9, 0.1, 0.4, 0.6}), 1, 0.2);
  CHECK(priority_order(s) == PriorityOrder{0, 3, 2, 1});
  CHECK(priority_order(s) == oracle::sort_order(s.values));
}

TEST_CASE("priority_order matches the sort oracle and is non-increasing") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double g = std::array{0.0, 0.2, 1.0, 0.05}[trial % 4];
    const auto order = trial % 2 ? ChannelOrder::Ascending : ChannelOrder::Descending;
    const ScoreTensor s = gradual_scoring(random_map(rng, 8, trial % 3 == 0 ? 31 : 0), 6, g, order);
    const PriorityOrder p = priority_order(s);
    CHECK(p == oracle::sort_order(s.values));
    std::vector<bool> seen(p.size(), false);
    for (std::size_t i = 0; i < p.size(); ++i) {
      REQUIRE(p[i] < p.size());
      CHECK_FALSE(seen[p[i]]);
      seen[p[i]] = true;
      if (i > 0) CHECK(s.values[p[i - 1]] >= s.values[p[i]]);
    }
  }
}

TEST_CASE("drop_lowest examples") {
  const ScoreTensor s = gradual_scoring(SaliencyMap(2, {0.9, 0.1, 0.4, 0.6}), 1, 0.2);
  const LatentTensor z(Tensor3({1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f}));
  CHECK(drop_lowest(z, s, 0.0) == z);
  CHECK(drop_lowest(z, s, 100.0) == LatentTensor(1, 2, 0.0f));
  const LatentTensor half = drop_lowest(z, s, 50.0);
  CHECK(half.data()[0] == 1.0f);
  CHECK(half.data()[1] == 0.0f);  // (0,1)
  CHECK(half.data()[2] == 0.0f);  // (1,0)
  CHECK(half.data()[3] == 4.0f);
  CHECK_THROWS_AS(drop_lowest(z, s, 101.0), Error);
  CHECK_THROWS_AS(drop_lowest(LatentTensor(2, 2), s, 10.0), ShapeError);
}

TEST_CASE("drop_lowest equals zero-then-copy-back of the priority prefix") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoreTensor s = gradual_scoring(random_map(rng, 8, 31), 4, trial % 2 ? 0.2 : 0.0);
    const LatentTensor z(oracle::random_tensor(rng, {4, 8, 8}, -1.0f, 1.0f));
    const double p = trial == 0 ? 0.0 : trial == 1 ? 100.0 : pct(rng);
    const PriorityOrder order = oracle::sort_order(s.values);
    const std::size_t keep = z.size() - static_cast<std::size_t>(std::floor(p / 100.0 * z.size()));
    LatentTensor expected(4, 8, 0.0f);
    for (std::size_t r = 0; r < keep; ++r) expected.data()[order[r]] = z.data()[order[r]];
    CHECK(drop_lowest(z, s, p) == expected);
  }
}

TEST_CASE("large g blocks whole channels; g = 0 interleaves by saliency") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const SaliencyMap map = random_map(rng, 8);
    const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
    const double g = (*hi - *lo) + 0.01;
    const PriorityOrder desc = priority_order(gradual_scoring(map, 5, g, ChannelOrder::Descending));
    for (std::size_t r = 0; r < desc.size(); ++r) CHECK(desc[r] / 64 == r / 64);
    const PriorityOrder asc = priority_order(gradual_scoring(map, 5, g, ChannelOrder::Ascending));
    for (std::size_t r = 0; r < asc.size(); ++r) CHECK(asc[r] / 64 == 4 - r / 64);
  }
}
