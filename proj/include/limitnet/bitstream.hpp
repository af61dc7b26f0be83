#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "limitnet/huffman.hpp"
#include "limitnet/quantize.hpp"
#include "limitnet/saliency.hpp"
#include "limitnet/scoring.hpp"

namespace limitnet {

enum class EntropyMode : std::uint8_t { Raw = 0, Huffman = 1 };

struct CodecConfig {
  double g_factor = 0.2;
  ChannelOrder channel_order = ChannelOrder::Descending;
  EntropyMode entropy = EntropyMode::Raw;
  int payload_bytes = 48;
  int bits = 6;
  // Recorded in the header so the decoder knows which synthesis to run.
  int image_channels = 3;
  int transform_block = 2;  // 0 = external decoder network
};

// G_Factor travels as unsigned 8.8 fixed point.
std::uint16_t g_to_fixed(double g);
double g_from_fixed(std::uint16_t fixed);

// Stream header. Byte layout (little-endian):
//   magic[4] "LNBS", version u8, flags u8, L u16, K u16, g u16 (8.8),
//   image_channels u8, transform_block u8, lo f32, hi f32, bits u8,
//   payload_bytes u16, values_per_packet u16, packet_count u16,
//   wire saliency [40], huffman code lengths [64] (only when flags bit 2 is set).
// flags: bit0 descending channel order, bit1 degenerate quantizer range, bit2 huffman.
struct StreamHeader {
  static constexpr std::uint8_t kVersion = 1;

  int channels = 0;  // L
  int side = 0;      // K
  std::uint16_t g_fixed = 0;
  ChannelOrder channel_order = ChannelOrder::Descending;
  EntropyMode entropy = EntropyMode::Raw;
  int image_channels = 3;
  int transform_block = 2;
  QuantParams quant;
  int payload_bytes = 48;
  int values_per_packet = 64;
  int packet_count = 0;
  WireSaliency wire;
  std::optional<CodeLengths> code_lengths;

  std::size_t total_values() const noexcept {
    return static_cast<std::size_t>(channels) * side * side;
  }
  double g_factor() const noexcept { return g_from_fixed(g_fixed); }
  // Number of values in packet `seq` (the last packet may be short).
  std::size_t values_in_packet(int seq) const noexcept;

  std::vector<std::uint8_t> serialize() const;
  static StreamHeader parse(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);
  std::size_t serialized_size() const noexcept;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

// Saliency map both ends use for ordering: the reconstruction of the wire form.
SaliencyMap ordering_map(const StreamHeader& header);
// Priority order recomputed from header fields only.
PriorityOrder header_priority_order(const StreamHeader& header);

struct Packet {
  std::uint16_t seq = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Packet&, const Packet&) = default;
};

struct OffloadBitstream {
  StreamHeader header;
  std::vector<Packet> packets;  // ascending seq == priority order

  // File form: header, then per packet: seq u16, payload length u16, payload.
  std::vector<std::uint8_t> to_bytes() const;
  static OffloadBitstream from_bytes(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static OffloadBitstream load(const std::filesystem::path& path);

  friend bool operator==(const OffloadBitstream&, const OffloadBitstream&) = default;
};

struct EncodedImage {
  OffloadBitstream bitstream;
  std::vector<std::uint8_t> levels;  // quantized levels, flat (channel, row, col) order
  PriorityOrder order;               // encoder-side order used to emit the payload
};

// Quantizes the latent, builds the header from the 8×8 wire map and emits values in the
// priority order derived from reconstruct_map(wire).
EncodedImage serialize(const LatentTensor& latent, const SaliencyMap& map, const CodecConfig& config);

struct PartialLevels {
  std::vector<std::uint8_t> levels;  // flat (channel, row, col); 0 where absent
  std::vector<bool> present;
  std::vector<std::uint16_t> rejected;  // seqs rejected as corrupt, duplicate or out of range

  std::size_t present_count() const;
};

// Places the values of every delivered packet; a pure function of the delivered set.
PartialLevels deserialize_partial(const StreamHeader& header, std::span<const Packet> delivered);

}  // namespace limitnet
