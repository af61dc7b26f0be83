#pragma once

#include <cstdint>
#include <vector>

#include "limitnet/saliency.hpp"
#include "limitnet/tensor.hpp"

namespace limitnet {

// Which end of the channel axis receives the largest per-channel offset.
//   Ascending:  offset(i) = g * i            (later channels first)
//   Descending: offset(i) = g * (L - 1 - i)  (channel 0 first)
enum class ChannelOrder : std::uint8_t { Ascending = 0, Descending = 1 };

struct ScoreTensor {
  int channels = 0;
  int side = 0;
  std::vector<double> values;  // (channel, row, col) row-major

  std::size_t size() const noexcept { return values.size(); }
  double at(int c, int row, int col) const noexcept {
    return values[(static_cast<std::size_t>(c) * side + row) * side + col];
  }
};

// Permutation of flat latent indices, highest score first.
using PriorityOrder = std::vector<std::uint32_t>;

// Gradual scoring: score(i, j, k) = map(j, k) + g * offset(i). g must be >= 0.
ScoreTensor gradual_scoring(const SaliencyMap& map, int channels, double g_factor,
                            ChannelOrder order = ChannelOrder::Descending);

// Stable descending sort of scores; ties keep ascending flat index (channel, row, col).
PriorityOrder priority_order(const ScoreTensor& scores);

// Zeroes the floor(p/100 * N) lowest-scored positions (same tie-break as priority_order).
LatentTensor drop_lowest(const LatentTensor& latent, const ScoreTensor& scores, double percent);

}  // namespace limitnet
