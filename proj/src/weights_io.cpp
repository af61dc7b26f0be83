#include "limitnet/weights_io.hpp"

#include "limitnet/binary_io.hpp"
#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

void write_array(ByteWriter& w, const ParamArray& arr, Precision precision) {
  if (precision == Precision::Float32) {
    w.u32(static_cast<std::uint32_t>(arr.values.size()));
    for (float v : arr.values) w.f32(v);
    return;
  }
  if (!arr.quantized) throw Error("int8-affine network carries an unquantized array");
  const Int8Affine& q = *arr.quantized;
  w.u32(static_cast<std::uint32_t>(q.data.size()));
  for (std::int8_t v : q.data) w.u8(static_cast<std::uint8_t>(v));
  w.f32(q.scale);
  w.i32(q.zero_point);
}

ParamArray read_array(ByteReader& r, Precision precision, std::size_t expected, int layer, const char* what) {
  const std::uint32_t count = r.u32();
  if (count != expected) {
    throw ShapeInconsistencyError("layer " + std::to_string(layer) + " declares " + std::to_string(expected) + " " +
                                  what + " values but stores " + std::to_string(count));
  }
  ParamArray arr;
  if (precision == Precision::Float32) {
    arr.values.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) arr.values.push_back(r.f32());
    return arr;
  }
  Int8Affine q;
  auto raw = r.bytes(count);
  q.data.assign(raw.begin(), raw.end());
  q.scale = r.f32();
  q.zero_point = r.i32();
  arr.values.reserve(count);
  for (std::int8_t v : q.data) arr.values.push_back(q.scale * static_cast<float>(v - q.zero_point));
  arr.quantized = std::move(q);
  return arr;
}

}  // namespace

std::vector<std::uint8_t> save_weights(const ConvNetSpec& spec) {
  spec.validate();
  ByteWriter w;
  w.tag("LNWF");
  w.u16(kWeightsFileVersion);
  w.u8(static_cast<std::uint8_t>(spec.role));
  w.u8(static_cast<std::uint8_t>(spec.precision));
  w.u16(static_cast<std::uint16_t>(spec.layers.size()));
  for (const Layer& l : spec.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u8(static_cast<std::uint8_t>(l.kernel));
    w.u8(static_cast<std::uint8_t>(l.stride));
    w.u16(static_cast<std::uint16_t>(l.in_channels));
    w.u16(static_cast<std::uint16_t>(l.out_channels));
  }
  for (const Layer& l : spec.layers) {
    if (!l.has_parameters()) continue;
    write_array(w, l.weights, spec.precision);
    write_array(w, l.bias, spec.precision);
  }
  const std::uint32_t crc = crc32(w.buffer());
  w.u32(crc);
  return w.take();
}

ConvNetSpec load_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LNWF", 4) != 0) throw BadMagicError("not a weights file");
  if (bytes.size() < 8) throw ChecksumError("weights file truncated");
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), 4);
  if (crc32(body) != stored) throw ChecksumError("weights file checksum mismatch");

  try {
    ByteReader r(body);
    r.bytes(4);
    const std::uint16_t version = r.u16();
    if (version != kWeightsFileVersion) throw ShapeInconsistencyError("unsupported weights version");
    ConvNetSpec spec;
    const std::uint8_t role = r.u8(), precision = r.u8();
    if (role > 2 || precision > 1) throw ShapeInconsistencyError("unknown role or precision");
    spec.role = static_cast<NetRole>(role);
    spec.precision = static_cast<Precision>(precision);
    const std::uint16_t count = r.u16();
    spec.layers.resize(count);
    for (Layer& l : spec.layers) {
      const std::uint8_t kind = r.u8();
      if (kind > static_cast<std::uint8_t>(LayerKind::ResidualAdd)) throw ShapeInconsistencyError("unknown layer kind");
      l.kind = static_cast<LayerKind>(kind);
      l.kernel = r.u8();
      l.stride = r.u8();
      l.in_channels = r.u16();
      l.out_channels = r.u16();
    }
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      Layer& l = spec.layers[i];
      if (!l.has_parameters()) continue;
      const std::size_t wcount = static_cast<std::size_t>(l.in_channels) * l.out_channels * l.kernel * l.kernel;
      l.weights = read_array(r, spec.precision, wcount, static_cast<int>(i), "weight");
      l.bias = read_array(r, spec.precision, static_cast<std::size_t>(l.out_channels), static_cast<int>(i), "bias");
    }
    if (r.remaining() != 0) throw ShapeInconsistencyError("trailing bytes after weight arrays");
    spec.validate();
    return spec;
  } catch (const FormatError& e) {
    throw ShapeInconsistencyError(std::string("weights payload shorter than declared shapes: ") + e.what());
  } catch (const ShapeError& e) {
    throw ShapeInconsistencyError(e.what());
  }
}

ConvNetSpec load_weights_file(const std::filesystem::path& path) { return load_weights(read_file(path)); }

void save_weights_file(const ConvNetSpec& spec, const std::filesystem::path& path) {
  write_file(path, save_weights(spec));
}

}  // namespace limitnet
