#include "limitnet/bitstream.hpp"

#include <algorithm>
#include <cmath>

#include "limitnet/binary_io.hpp"
#include "limitnet/convnet.hpp"
#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

constexpr std::uint8_t kFlagDescending = 1u << 0;
constexpr std::uint8_t kFlagDegenerate = 1u << 1;
constexpr std::uint8_t kFlagHuffman = 1u << 2;

// MSB-first fixed-width packing of levels.
std::vector<std::uint8_t> pack_fixed(std::span<const std::uint8_t> levels, int bits) {
  std::vector<std::uint8_t> out;
  out.reserve((levels.size() * bits + 7) / 8);
  std::uint32_t acc = 0;
  int held = 0;
  for (std::uint8_t v : levels) {
    acc = (acc << bits) | v;
    held += bits;
    while (held >= 8) {
      held -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> held));
    }
    acc &= (1u << held) - 1u;
  }
  if (held > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - held)));
  return out;
}

std::optional<std::vector<std::uint8_t>> unpack_fixed(std::span<const std::uint8_t> bytes, std::size_t count,
                                                      int bits) {
  if (bytes.size() != (count * bits + 7) / 8) return std::nullopt;
  std::vector<std::uint8_t> out(count);
  std::uint32_t acc = 0;
  int held = 0;
  std::size_t next = 0;
  const std::uint32_t mask = (1u << bits) - 1u;
  for (auto& v : out) {
    while (held < bits) {
      acc = (acc << 8) | bytes[next++];
      held += 8;
    }
    held -= bits;
    v = static_cast<std::uint8_t>((acc >> held) & mask);
    acc &= (1u << held) - 1u;
  }
  return out;
}


// Largest per-packet value count for which every chunk's code fits the payload.
std::size_t huffman_values_per_packet(const CanonicalHuffman& code, std::span<const std::uint8_t> ordered,
                                      std::size_t payload_bits) {
  auto fits = [&](std::size_t n) {
    for (std::size_t start = 0; start < ordered.size(); start += n) {
      const std::size_t len = std::min(n, ordered.size() - start);
      if (code.encoded_bits(ordered.subspan(start, len)) > payload_bits) return false;
    }
    return true;
  };
  std::size_t lo = 1, hi = std::min<std::size_t>(ordered.size(), 65535);
  if (!fits(lo)) throw Error("payload too small for the longest huffman code");
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (fits(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

}  // namespace

std::uint16_t g_to_fixed(double g) {
  if (!(g >= 0.0) || g * 256.0 > 65535.0) throw Error("G_Factor outside the 8.8 fixed-point range");
  return static_cast<std::uint16_t>(round_half_away(g * 256.0));
}

double g_from_fixed(std::uint16_t fixed) { return fixed / 256.0; }

std::size_t StreamHeader::values_in_packet(int seq) const noexcept {
  const std::size_t start = static_cast<std::size_t>(seq) * values_per_packet;
  const std::size_t total = total_values();
  if (start >= total) return 0;
  return std::min<std::size_t>(values_per_packet, total - start);
}

std::size_t StreamHeader::serialized_size() const noexcept {
  return 29 + kWireBytes + (entropy == EntropyMode::Huffman ? kHuffmanSymbols : 0);
}

std::vector<std::uint8_t> StreamHeader::serialize() const {
  ByteWriter w;
  w.tag("LNBS");
  w.u8(kVersion);
  std::uint8_t flags = 0;
  if (channel_order == ChannelOrder::Descending) flags |= kFlagDescending;
  if (quant.degenerate()) flags |= kFlagDegenerate;
  if (entropy == EntropyMode::Huffman) flags |= kFlagHuffman;
  w.u8(flags);
  w.u16(static_cast<std::uint16_t>(channels));
  w.u16(static_cast<std::uint16_t>(side));
  w.u16(g_fixed);
  w.u8(static_cast<std::uint8_t>(image_channels));
  w.u8(static_cast<std::uint8_t>(transform_block));
  w.f32(quant.lo);
  w.f32(quant.hi);
  w.u8(static_cast<std::uint8_t>(quant.bits));
  w.u16(static_cast<std::uint16_t>(payload_bytes));
  w.u16(static_cast<std::uint16_t>(values_per_packet));
  w.u16(static_cast<std::uint16_t>(packet_count));
  const auto wire_bytes = wire.serialize();
  w.bytes(wire_bytes);
  if (entropy == EntropyMode::Huffman) {
    if (!code_lengths) throw Error("huffman header without code lengths");
    w.bytes(*code_lengths);
  }
  return w.take();
}

StreamHeader StreamHeader::parse(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  ByteReader r(bytes);
  if (!r.tag("LNBS")) throw BadMagicError("not a LimitNet bitstream");
  if (r.u8() != kVersion) throw FormatError("unsupported bitstream version");
  StreamHeader h;
  const std::uint8_t flags = r.u8();
  h.channel_order = (flags & kFlagDescending) ? ChannelOrder::Descending : ChannelOrder::Ascending;
  h.entropy = (flags & kFlagHuffman) ? EntropyMode::Huffman : EntropyMode::Raw;
  h.channels = r.u16();
  h.side = r.u16();
  h.g_fixed = r.u16();
  h.image_channels = r.u8();
  h.transform_block = r.u8();
  h.quant.lo = r.f32();
  h.quant.hi = r.f32();
  h.quant.bits = r.u8();
  h.payload_bytes = r.u16();
  h.values_per_packet = r.u16();
  h.packet_count = r.u16();
  h.wire = WireSaliency::parse(r.bytes(kWireBytes));
  if (h.entropy == EntropyMode::Huffman) {
    CodeLengths lengths{};
    auto raw = r.bytes(kHuffmanSymbols);
    std::copy(raw.begin(), raw.end(), lengths.begin());
    h.code_lengths = lengths;
  }
  if (bool(flags & kFlagDegenerate) != h.quant.degenerate()) throw FormatError("degenerate-range flag disagrees with range");
  h.quant.validate();
  if (h.channels <= 0 || h.side <= 0 || h.side % kWireSide != 0) throw FormatError("invalid latent shape in header");
  if (h.values_per_packet <= 0) throw FormatError("invalid packet size in header");
  const std::size_t expected_packets = (h.total_values() + h.values_per_packet - 1) / h.values_per_packet;
  if (static_cast<std::size_t>(h.packet_count) != expected_packets) throw FormatError("packet count disagrees with shape");
  if (consumed) *consumed = r.position();
  return h;
}

SaliencyMap ordering_map(const StreamHeader& header) { return reconstruct_map(header.wire, header.side); }

PriorityOrder header_priority_order(const StreamHeader& header) {
  return priority_order(gradual_scoring(ordering_map(header), header.channels, header.g_factor(), header.channel_order));
}

std::vector<std::uint8_t> OffloadBitstream::to_bytes() const {
  ByteWriter w;
  w.bytes(header.serialize());
  for (const Packet& p : packets) {
    w.u16(p.seq);
    w.u16(static_cast<std::uint16_t>(p.payload.size()));
    w.bytes(p.payload);
  }
  return w.take();
}

OffloadBitstream OffloadBitstream::from_bytes(std::span<const std::uint8_t> bytes) {
  OffloadBitstream b;
  std::size_t consumed = 0;
  b.header = StreamHeader::parse(bytes, &consumed);
  ByteReader r(bytes.subspan(consumed));
  while (r.remaining() > 0) {
    Packet p;
    p.seq = r.u16();
    const std::uint16_t len = r.u16();
    auto payload = r.bytes(len);
    p.payload.assign(payload.begin(), payload.end());
    b.packets.push_back(std::move(p));
  }
  return b;
}

void OffloadBitstream::save(const std::filesystem::path& path) const { write_file(path, to_bytes()); }

OffloadBitstream OffloadBitstream::load(const std::filesystem::path& path) { return from_bytes(read_file(path)); }

EncodedImage serialize(const LatentTensor& latent, const SaliencyMap& map, const CodecConfig& config) {
  if (map.side() != latent.side()) throw ShapeError("saliency map side differs from latent side");
  if (config.payload_bytes <= 0 || config.payload_bytes > 65535) throw ConfigError("payload size out of range");

  EncodedImage enc;
  StreamHeader& h = enc.bitstream.header;
  h.channels = latent.channels();
  h.side = latent.side();
  h.g_fixed = g_to_fixed(config.g_factor);
  h.channel_order = config.channel_order;
  h.entropy = config.entropy;
  h.image_channels = config.image_channels;
  h.transform_block = config.transform_block;
  h.quant = choose_quant_params(latent, config.bits);
  h.payload_bytes = config.payload_bytes;
  h.wire = downsize_quantize(map);

  enc.levels = quantize_latent(latent, h.quant);
  // Order from the wire form only, exactly as the decoder will recompute it.
  enc.order = header_priority_order(h);
  std::vector<std::uint8_t> ordered(enc.order.size());
  for (std::size_t r = 0; r < ordered.size(); ++r) ordered[r] = enc.levels[enc.order[r]];

  const std::size_t payload_bits = static_cast<std::size_t>(config.payload_bytes) * 8;
  std::optional<CanonicalHuffman> code;
  if (config.entropy == EntropyMode::Raw) {
    h.values_per_packet = static_cast<int>(payload_bits / config.bits);
    if (h.values_per_packet == 0) throw ConfigError("payload smaller than one value");
  } else {
    std::array<std::uint64_t, kHuffmanSymbols> histogram{};
    for (std::uint8_t v : enc.levels) ++histogram[v];
    h.code_lengths = huffman_code_lengths(histogram);
    code.emplace(*h.code_lengths);
    h.values_per_packet = static_cast<int>(huffman_values_per_packet(*code, ordered, payload_bits));
  }
  const std::size_t per = static_cast<std::size_t>(h.values_per_packet);
  const std::size_t count = (ordered.size() + per - 1) / per;
  if (count > 65535) throw ConfigError("too many packets for a u16 sequence number");
  h.packet_count = static_cast<int>(count);

  enc.bitstream.packets.reserve(count);
  for (std::size_t seq = 0; seq < count; ++seq) {
    const auto chunk = std::span<const std::uint8_t>(ordered).subspan(seq * per, h.values_in_packet(static_cast<int>(seq)));
    Packet p;
    p.seq = static_cast<std::uint16_t>(seq);
    p.payload = code ? code->encode(chunk) : pack_fixed(chunk, config.bits);
    enc.bitstream.packets.push_back(std::move(p));
  }
  return enc;
}

std::size_t PartialLevels::present_count() const { return static_cast<std::size_t>(std::count(present.begin(), present.end(), true)); }

PartialLevels deserialize_partial(const StreamHeader& header, std::span<const Packet> delivered) {
  PartialLevels out;
  const std::size_t total = header.total_values();
  out.levels.assign(total, 0);
  out.present.assign(total, false);
  const PriorityOrder order = header_priority_order(header);
  std::optional<CanonicalHuffman> code;
  if (header.entropy == EntropyMode::Huffman) code.emplace(*header.code_lengths);

  std::vector<bool> seen(static_cast<std::size_t>(header.packet_count), false);
  for (const Packet& p : delivered) {
    if (p.seq >= header.packet_count || seen[p.seq]) {
      out.rejected.push_back(p.seq);
      continue;
    }
    seen[p.seq] = true;
    const std::size_t n = header.values_in_packet(p.seq);
    auto values = code ? code->decode(p.payload, n) : unpack_fixed(p.payload, n, header.quant.bits);
    if (!values || std::any_of(values->begin(), values->end(), [&](std::uint8_t v) { return v > header.quant.max_level(); })) {
      out.rejected.push_back(p.seq);
      continue;
    }
    const std::size_t start = static_cast<std::size_t>(p.seq) * header.values_per_packet;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t pos = order[start + j];
      out.levels[pos] = (*values)[j];
      out.present[pos] = true;
    }
  }
  std::sort(out.rejected.begin(), out.rejected.end());
  return out;
}

}  // namespace limitnet
