#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "limitnet/bd_metrics.hpp"
#include "limitnet/errors.hpp"
#include "limitnet/netsim.hpp"
#include "limitnet/pipeline.hpp"
#include "limitnet/synthetic.hpp"

namespace py = pybind11;
using namespace limitnet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor3 to_tensor(const FloatArray& a) {
  if (a.ndim() == 2) {
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return Tensor3({1, h, w}, std::vector<float>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 3) throw ShapeError("expected a (C, H, W) or (H, W) array");
  return Tensor3({static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2))},
                 std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const Tensor3& t) {
  FloatArray out({t.channels(), t.height(), t.width()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

SaliencyMap to_map(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ShapeError("saliency map must be square (K, K)");
  return SaliencyMap(static_cast<int>(a.shape(0)), std::vector<double>(a.data(), a.data() + a.size()));
}

DoubleArray map_array(const SaliencyMap& m) {
  DoubleArray out({m.side(), m.side()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

ChannelOrder parse_order(const std::string& s) {
  if (s == "descending") return ChannelOrder::Descending;
  if (s == "ascending") return ChannelOrder::Ascending;
  throw ConfigError("channel_order must be ascending or descending");
}

RQCurve to_curve(const std::vector<std::pair<double, double>>& pts) {
  std::vector<RatePoint> p;
  for (auto [r, q] : pts) p.push_back({r, q});
  return RQCurve(std::move(p));
}

OffloadBitstream from_py_bytes(const py::bytes& b) {
  const std::string s = b;
  return OffloadBitstream::from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

py::bytes to_py_bytes(std::span<const std::uint8_t> v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Saliency-prioritized progressive image offloading over LPWAN links";

  static py::exception<Error> base(m, "LimitnetError", PyExc_ValueError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("synthetic_scene", [](int side, std::uint64_t seed, int channels) {
    return to_array(synthetic_scene(side, seed, channels).pixels());
  }, py::arg("side") = 64, py::arg("seed") = 0, py::arg("channels") = 3);

  m.def("spectral_saliency", [](const FloatArray& image, int side) {
    return map_array(SpectralResidualProvider().detect(Image(to_tensor(image)), side));
  }, py::arg("image"), py::arg("side") = 32, "Classical saliency map (K, K) in [0, 1].");

  m.def("wire_saliency", [](const DoubleArray& map) { return to_py_bytes(downsize_quantize(to_map(map)).serialize()); },
        py::arg("map"), "The 40-byte 8x8 5-bit header form of a saliency map.");

  m.def("gradual_scoring", [](const DoubleArray& map, int channels, double g, const std::string& order) {
    const ScoreTensor s = gradual_scoring(to_map(map), channels, g, parse_order(order));
    DoubleArray out({s.channels, s.side, s.side});
    std::copy(s.values.begin(), s.values.end(), out.mutable_data());
    return out;
  }, py::arg("map"), py::arg("channels"), py::arg("g") = 0.2, py::arg("channel_order") = "descending");

  m.def("priority_order", [](const DoubleArray& scores) {
    if (scores.ndim() != 3) throw ShapeError("scores must be (L, K, K)");
    ScoreTensor s;
    s.channels = static_cast<int>(scores.shape(0));
    s.side = static_cast<int>(scores.shape(1));
    s.values.assign(scores.data(), scores.data() + scores.size());
    return priority_order(s);
  }, py::arg("scores"), "Flat latent indices, highest score first.");

  m.def("encode", [](const FloatArray& image, double g, const std::string& entropy, const std::string& channel_order,
                     int payload_bytes, const std::string& saliency) {
    CodecConfig config;
    config.g_factor = g;
    if (entropy != "raw" && entropy != "huffman") throw ConfigError("entropy must be raw or huffman");
    config.entropy = entropy == "huffman" ? EntropyMode::Huffman : EntropyMode::Raw;
    config.channel_order = parse_order(channel_order);
    config.payload_bytes = payload_bytes;
    const auto provider = make_saliency_provider(saliency);
    const EncodeResult enc = encode_image(Image(to_tensor(image)), SpaceToDepthTransform(2), *provider, config);
    return to_py_bytes(enc.encoded.bitstream.to_bytes());
  }, py::arg("image"), py::arg("g") = 0.2, py::arg("entropy") = "raw", py::arg("channel_order") = "descending",
     py::arg("payload_bytes") = 48, py::arg("saliency") = "spectral",
     "Encode a (C, H, W) image in [0, 1] with the built-in transform; returns the bitstream file bytes.");

  m.def("bitstream_info", [](const py::bytes& data) {
    const OffloadBitstream bs = from_py_bytes(data);
    const StreamHeader& h = bs.header;
    py::dict d;
    d["channels"] = h.channels;
    d["side"] = h.side;
    d["g"] = h.g_factor();
    d["entropy"] = h.entropy == EntropyMode::Huffman ? "huffman" : "raw";
    d["packet_count"] = h.packet_count;
    d["values_per_packet"] = h.values_per_packet;
    d["header_bytes"] = h.serialized_size();
    d["lo"] = h.quant.lo;
    d["hi"] = h.quant.hi;
    return d;
  }, py::arg("bitstream"));

  m.def("decode", [](const py::bytes& data, std::optional<std::vector<int>> delivered) {
    const OffloadBitstream bs = from_py_bytes(data);
    std::vector<Packet> packets;
    if (!delivered) {
      packets = bs.packets;
    } else {
      for (int s : *delivered) {
        if (s < 0 || s >= static_cast<int>(bs.packets.size())) throw Error("delivered seq out of range");
        packets.push_back(bs.packets[static_cast<std::size_t>(s)]);
      }
    }
    const DecodeResult dec = decode_delivered(bs.header, packets, synthesis_for(bs.header));
    return py::make_tuple(to_array(dec.image.pixels()), dec.latent.present_fraction());
  }, py::arg("bitstream"), py::arg("delivered") = py::none(),
     "Reconstruct from the delivered packet seqs (all when None); returns (image, delivered_fraction).");

  m.def("simulate", [](const py::bytes& data, const std::string& policy, double deadline, double loss,
                       std::uint64_t seed, double bandwidth, double airtime, double window, bool gamma) {
    LinkModel link;
    if (gamma) link.bandwidth = GammaBandwidth{};
    else link.bandwidth = ConstantBandwidth{bandwidth};
    link.window = window;
    link.duty_cycle = airtime / window;
    link.loss = loss;
    link.seed = seed;
    link.validate();
    const LinkTrace t = simulate(from_py_bytes(data), link, parse_policy(policy), deadline);
    const DeliveryFractions f = delivered_prefix_fraction(t);
    py::dict d;
    d["header_delivered"] = t.header_delivered;
    d["delivered"] = t.delivered;
    d["total_packets"] = t.total_packets;
    d["received_bytes"] = t.received_bytes;
    d["delivered_payload_bytes"] = t.delivered_payload_bytes;
    d["prefix_fraction"] = f.prefix;
    d["raw_fraction"] = f.raw;
    d["sends"] = t.sends;
    py::list events;
    for (const TraceEvent& e : t.events) events.append(py::make_tuple(e.time, e.seq, std::string(to_string(e.outcome))));
    d["events"] = events;
    return d;
  }, py::arg("bitstream"), py::arg("policy") = "priority_retransmit", py::arg("deadline") = 60.0,
     py::arg("loss") = 0.0, py::arg("seed") = 1, py::arg("bandwidth") = 2500.0, py::arg("airtime") = 0.74,
     py::arg("window") = 60.0, py::arg("gamma_bandwidth") = false);

  m.def("mse", [](const FloatArray& a, const FloatArray& b) { return mse(Image(to_tensor(a)), Image(to_tensor(b))); });
  m.def("salient_mse", [](const FloatArray& a, const FloatArray& b, const DoubleArray& map) {
    return salient_mse(Image(to_tensor(a)), Image(to_tensor(b)), to_map(map));
  });

  m.def("bd_rate", [](const std::vector<std::pair<double, double>>& ref, const std::vector<std::pair<double, double>>& test) {
    return bd_rate(to_curve(ref), to_curve(test));
  }, py::arg("reference"), py::arg("test"), "Percent rate change at equal quality; curves are (rate, quality) pairs.");
  m.def("bd_quality", [](const std::vector<std::pair<double, double>>& ref, const std::vector<std::pair<double, double>>& test) {
    return bd_quality(to_curve(ref), to_curve(test));
  }, py::arg("reference"), py::arg("test"));
}
