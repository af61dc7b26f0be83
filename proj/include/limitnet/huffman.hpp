#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace limitnet {

inline constexpr int kHuffmanSymbols = 64;

using CodeLengths = std::array<std::uint8_t, kHuffmanSymbols>;

// Code lengths of a Huffman code for the histogram. Zero-count symbols get length 0.
// A histogram with a single used symbol gives that symbol a 1-bit code.
CodeLengths huffman_code_lengths(std::span<const std::uint64_t> histogram);

// Canonical code assignment (shorter codes first, ties by symbol value).
class CanonicalHuffman {
 public:
  explicit CanonicalHuffman(const CodeLengths& lengths);

  const CodeLengths& lengths() const noexcept { return lengths_; }
  std::uint32_t code(int symbol) const noexcept { return codes_[symbol]; }
  int length(int symbol) const noexcept { return lengths_[symbol]; }

  // Bits needed to encode the symbols (no padding).
  std::size_t encoded_bits(std::span<const std::uint8_t> symbols) const;
  // MSB-first bit packing, zero-padded to a byte boundary.
  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> symbols) const;
  // Decodes exactly `count` symbols; nullopt on an invalid code or an overrun.
  std::optional<std::vector<std::uint8_t>> decode(std::span<const std::uint8_t> bytes,
                                                  std::size_t count) const;

 private:
  CodeLengths lengths_;
  std::array<std::uint32_t, kHuffmanSymbols> codes_{};
  // Canonical decoding tables indexed by code length.
  std::array<std::uint32_t, 33> first_code_{};
  std::array<std::uint32_t, 33> first_index_{};
  std::array<std::uint32_t, 33> count_{};
  std::vector<std::uint8_t> sorted_symbols_;
  int max_length_ = 0;
};

}  // namespace limitnet
