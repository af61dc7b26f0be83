#include "limitnet/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

#include "limitnet/errors.hpp"

namespace limitnet {

ScoreTensor gradual_scoring(const SaliencyMap& map, int channels, double g_factor, ChannelOrder order) {
  if (!(g_factor >= 0.0) || !std::isfinite(g_factor)) throw Error("G_Factor must be finite and non-negative");
  if (channels <= 0) throw ShapeError("channel count must be positive");
  ScoreTensor s;
  s.channels = channels;
  s.side = map.side();
  const std::size_t plane = static_cast<std::size_t>(s.side) * s.side;
  s.values.resize(plane * channels);
  for (int i = 0; i < channels; ++i) {
    const int rank = order == ChannelOrder::Ascending ? i : channels - 1 - i;
    const double offset = g_factor * rank;
    for (std::size_t j = 0; j < plane; ++j) s.values[i * plane + j] = map.values()[j] + offset;
  }
  return s;
}

namespace {

// Scores derived from the 5-bit wire map take few distinct values; bucket them instead of
// sorting. Returns nullopt when there are too many distinct values for this to pay off.
std::optional<PriorityOrder> bucket_order(const std::vector<double>& values) {
  constexpr std::size_t kMaxDistinct = 2048;
  std::vector<double> distinct;  // kept sorted descending
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (double v : values) {
    if (v == prev) continue;  // neighbouring values often repeat
    prev = v;
    auto it = std::lower_bound(distinct.begin(), distinct.end(), v, std::greater<>());
    if (it != distinct.end() && *it == v) continue;
    if (distinct.size() == kMaxDistinct || std::isnan(v)) return std::nullopt;
    distinct.insert(it, v);
  }
  std::vector<std::uint16_t> bucket(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] == values[i - 1]) {
      bucket[i] = bucket[i - 1];
      continue;
    }
    bucket[i] = static_cast<std::uint16_t>(
        std::lower_bound(distinct.begin(), distinct.end(), values[i], std::greater<>()) - distinct.begin());
  }
  std::vector<std::size_t> start(distinct.size() + 1, 0);
  for (auto b : bucket) ++start[b + 1];
  for (std::size_t b = 1; b < start.size(); ++b) start[b] += start[b - 1];
  PriorityOrder order(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) order[start[bucket[i]]++] = static_cast<std::uint32_t>(i);
  return order;
}

}  // namespace

PriorityOrder priority_order(const ScoreTensor& scores) {
  // Descending score, ties by ascending flat index: the order a stable sort gives.
  if (auto fast = bucket_order(scores.values)) return std::move(*fast);
  std::vector<std::pair<double, std::uint32_t>> keyed(scores.size());
  for (std::uint32_t i = 0; i < keyed.size(); ++i) keyed[i] = {scores.values[i], i};
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  PriorityOrder order(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
  return order;
}

LatentTensor drop_lowest(const LatentTensor& latent, const ScoreTensor& scores, double percent) {
  if (!(percent >= 0.0 && percent <= 100.0)) throw Error("drop percentage must lie in [0,100]");
  if (latent.channels() != scores.channels || latent.side() != scores.side) {
    throw ShapeError("latent and score tensor shapes differ");
  }
  const std::size_t n = latent.size();
  const auto dropped = static_cast<std::size_t>(std::floor(percent / 100.0 * static_cast<double>(n)));
  const PriorityOrder order = priority_order(scores);
  LatentTensor out = latent;
  auto data = out.data();
  for (std::size_t r = n - dropped; r < n; ++r) data[order[r]] = 0.0f;
  return out;
}

}  // namespace limitnet
