#include "limitnet/huffman.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

constexpr int kMaxCodeLength = 24;

CodeLengths build_lengths(const std::array<std::uint64_t, kHuffmanSymbols>& counts) {
  struct Node {
    std::uint64_t weight;
    int id;
  };
  auto heavier = [](const Node& a, const Node& b) { return std::tie(a.weight, a.id) > std::tie(b.weight, b.id); };
  std::priority_queue<Node, std::vector<Node>, decltype(heavier)> heap(heavier);
  std::vector<int> parent(2 * kHuffmanSymbols, -1);
  for (int s = 0; s < kHuffmanSymbols; ++s) {
    if (counts[s] > 0) heap.push({counts[s], s});
  }
  CodeLengths lengths{};
  if (heap.empty()) return lengths;
  if (heap.size() == 1) {
    lengths[heap.top().id] = 1;
    return lengths;
  }
  int next_id = kHuffmanSymbols;
  while (heap.size() > 1) {
    const Node a = heap.top();
    heap.pop();
    const Node b = heap.top();
    heap.pop();
    parent[a.id] = parent[b.id] = next_id;
    heap.push({a.weight + b.weight, next_id++});
  }
  for (int s = 0; s < kHuffmanSymbols; ++s) {
    if (counts[s] == 0) continue;
    int depth = 0;
    for (int n = s; parent[n] >= 0; n = parent[n]) ++depth;
    lengths[s] = static_cast<std::uint8_t>(depth);
  }
  return lengths;
}

}  // namespace

CodeLengths huffman_code_lengths(std::span<const std::uint64_t> histogram) {
  if (histogram.size() != kHuffmanSymbols) throw Error("histogram must have 64 bins");
  std::array<std::uint64_t, kHuffmanSymbols> counts{};
  std::copy(histogram.begin(), histogram.end(), counts.begin());
  for (;;) {
    CodeLengths lengths = build_lengths(counts);
    if (*std::max_element(lengths.begin(), lengths.end()) <= kMaxCodeLength) return lengths;
    // Flatten the distribution until the deepest code fits.
    for (auto& c : counts) {
      if (c > 0) c = std::max<std::uint64_t>(1, c / 2);
    }
  }
}

CanonicalHuffman::CanonicalHuffman(const CodeLengths& lengths) : lengths_(lengths) {
  for (int s = 0; s < kHuffmanSymbols; ++s) {
    if (lengths_[s] > kMaxCodeLength) throw FormatError("huffman code length exceeds 24 bits");
    max_length_ = std::max<int>(max_length_, lengths_[s]);
    ++count_[lengths_[s]];
  }
  count_[0] = 0;
  // Kraft check: the code must not be over-subscribed.
  std::uint64_t kraft = 0;
  for (int len = 1; len <= max_length_; ++len) kraft += static_cast<std::uint64_t>(count_[len]) << (max_length_ - len);
  if (max_length_ > 0 && kraft > (std::uint64_t{1} << max_length_)) throw FormatError("huffman code lengths over-subscribed");

  std::uint32_t code = 0, index = 0;
  for (int len = 1; len <= max_length_; ++len) {
    code = (code + count_[len - 1]) << 1;
    first_code_[len] = code;
    first_index_[len] = index;
    index += count_[len];
  }
  for (int len = 1; len <= max_length_; ++len) {
    std::uint32_t next = first_code_[len];
    for (int s = 0; s < kHuffmanSymbols; ++s) {
      if (lengths_[s] == len) {
        codes_[s] = next++;
        sorted_symbols_.push_back(static_cast<std::uint8_t>(s));
      }
    }
  }
}

std::size_t CanonicalHuffman::encoded_bits(std::span<const std::uint8_t> symbols) const {
  std::size_t bits = 0;
  for (std::uint8_t s : symbols) bits += lengths_[s];
  return bits;
}

std::vector<std::uint8_t> CanonicalHuffman::encode(std::span<const std::uint8_t> symbols) const {
  std::vector<std::uint8_t> out((encoded_bits(symbols) + 7) / 8, 0);
  std::size_t bit = 0;
  for (std::uint8_t s : symbols) {
    const int len = lengths_[s];
    if (len == 0) throw Error("symbol " + std::to_string(s) + " has no code");
    for (int b = len - 1; b >= 0; --b, ++bit) {
      if ((codes_[s] >> b) & 1u) out[bit / 8] |= static_cast<std::uint8_t>(0x80u >> (bit % 8));
    }
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> CanonicalHuffman::decode(std::span<const std::uint8_t> bytes,
                                                                  std::size_t count) const {
  std::vector<std::uint8_t> out;
  out.reserve(count);
  const std::size_t total_bits = bytes.size() * 8;
  std::size_t bit = 0;
  while (out.size() < count) {
    std::uint32_t code = 0;
    bool matched = false;
    for (int len = 1; len <= max_length_; ++len) {
      if (bit >= total_bits) return std::nullopt;
      code = (code << 1) | ((bytes[bit / 8] >> (7 - bit % 8)) & 1u);
      ++bit;
      if (count_[len] > 0 && code >= first_code_[len] && code - first_code_[len] < count_[len]) {
        out.push_back(sorted_symbols_[first_index_[len] + (code - first_code_[len])]);
        matched = true;
        break;
      }
    }
    if (!matched) return std::nullopt;
  }
  // Padding must fit inside the final byte.
  if ((bit + 7) / 8 != bytes.size()) return std::nullopt;
  return out;
}

}  // namespace limitnet
