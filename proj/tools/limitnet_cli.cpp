// limitnet: encode images into prioritized bitstreams, simulate LPWAN delivery,
// reconstruct from partial data and run experiment sweeps.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "limitnet/bd_metrics.hpp"
#include "limitnet/binary_io.hpp"
#include "limitnet/config.hpp"
#include "limitnet/errors.hpp"
#include "limitnet/experiment.hpp"
#include "limitnet/image_io.hpp"
#include "limitnet/pipeline.hpp"
#include "limitnet/weights_io.hpp"

namespace {

using namespace limitnet;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

Config load_config(const std::string& path) { return path.empty() ? Config{} : Config::load(path); }

std::vector<Packet> read_delivered(const OffloadBitstream& bs, const std::string& spec) {
  if (spec.empty() || spec == "all") return bs.packets;
  std::ifstream in(spec);
  if (!in) throw IoError("cannot open delivered-packet file " + spec);
  std::vector<Packet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const unsigned long seq = std::stoul(line);
    const auto it = std::find_if(bs.packets.begin(), bs.packets.end(), [&](const Packet& p) { return p.seq == seq; });
    if (it == bs.packets.end()) throw FormatError("delivered seq " + line + " is not in the bitstream");
    out.push_back(*it);
  }
  return out;
}

struct EncodeArgs {
  std::string image, out, config, saliency, entropy, channel_order, encoder_weights;
  std::optional<double> g;
  std::optional<int> payload;
};

int cmd_encode(const EncodeArgs& a) {
  const Config config = load_config(a.config);
  CodecConfig codec = codec_from_config(config);
  if (a.g) codec.g_factor = *a.g;
  if (a.payload) codec.payload_bytes = *a.payload;
  if (!a.entropy.empty()) codec.entropy = a.entropy == "huffman" ? EntropyMode::Huffman : EntropyMode::Raw;
  if (!a.channel_order.empty()) {
    codec.channel_order = a.channel_order == "ascending" ? ChannelOrder::Ascending : ChannelOrder::Descending;
  }
  const std::string saliency = a.saliency.empty() ? config.get_or("experiment.saliency", "spectral") : a.saliency;
  const std::string weights = a.encoder_weights.empty() ? config.get_or("experiment.encoder_weights", "") : a.encoder_weights;

  const Image image = read_pnm(a.image);
  Analysis analysis = SpaceToDepthTransform(static_cast<int>(config.integer("experiment.block", 2)));
  if (!weights.empty()) analysis = load_weights_file(weights);
  const auto provider = make_saliency_provider(saliency);
  const EncodeResult enc = encode_image(image, analysis, *provider, codec);
  const auto bytes = enc.encoded.bitstream.to_bytes();
  write_file(a.out, bytes);

  const StreamHeader& h = enc.encoded.bitstream.header;
  std::cout << "L=" << h.channels << " K=" << h.side << " packets=" << h.packet_count
            << " values_per_packet=" << h.values_per_packet << " header_bytes=" << h.serialized_size()
            << " total_bytes=" << bytes.size() << " entropy=" << (h.entropy == EntropyMode::Huffman ? "huffman" : "raw")
            << " g=" << h.g_factor() << '\n';
  return 0;
}

struct TransmitArgs {
  std::string bitstream, config, policy, out, delivered_out;
  std::optional<double> deadline, loss;
  std::optional<std::uint64_t> seed;
};

int cmd_transmit(const TransmitArgs& a) {
  const Config config = load_config(a.config);
  LinkModel link = link_from_config(config);
  if (a.loss) link.loss = *a.loss;
  if (a.seed) link.seed = *a.seed;
  const Policy policy = parse_policy(a.policy.empty() ? config.get_or("transmit.policy", "priority_retransmit") : a.policy);
  const double deadline = a.deadline.value_or(config.number("transmit.deadline", link.window));

  const OffloadBitstream bs = OffloadBitstream::load(a.bitstream);
  const LinkTrace trace = simulate(bs, link, policy, deadline);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write " + a.out);
    trace.write_csv(out);
  }
  const std::string delivered_path = a.delivered_out.empty() ? (a.out.empty() ? "" : a.out + ".delivered") : a.delivered_out;
  if (!delivered_path.empty()) {
    std::ofstream out(delivered_path);
    if (!out) throw IoError("cannot write " + delivered_path);
    if (trace.header_delivered) {
      for (int s : trace.delivered) out << s << '\n';
    }
  }
  const DeliveryFractions f = delivered_prefix_fraction(trace);
  std::cout << "policy=" << to_string(policy) << " header=" << (trace.header_delivered ? "delivered" : "lost")
            << " delivered=" << trace.delivered.size() << '/' << trace.total_packets << " prefix_fraction=" << f.prefix
            << " raw_fraction=" << f.raw << " received_bytes=" << trace.received_bytes << " sends=" << trace.sends
            << " duty_ok=" << (duty_cycle_respected(trace) ? 1 : 0) << '\n';
  return 0;
}

struct DecodeArgs {
  std::string bitstream, delivered, original, out, report, decoder_weights;
};

int cmd_decode(const DecodeArgs& a) {
  const OffloadBitstream bs = OffloadBitstream::load(a.bitstream);
  const std::vector<Packet> delivered = read_delivered(bs, a.delivered);
  std::optional<ConvNetSpec> decoder;
  if (!a.decoder_weights.empty()) decoder = load_weights_file(a.decoder_weights);
  const Synthesis synthesis = synthesis_for(bs.header, decoder ? &*decoder : nullptr);
  const DecodeResult dec = decode_delivered(bs.header, delivered, synthesis);
  if (!a.out.empty()) write_pnm(a.out, dec.image);

  // Reference latent: every packet of the file, dequantized.
  const PartialLatent full = rebuild_latent(bs.header, bs.packets);
  const double lat = latent_mse(dec.latent.values, full.values);
  std::ostringstream row;
  row << std::setprecision(10);
  std::string header_line = "schema_version,delivered_packets,total_packets,delivered_fraction,latent_mse";
  row << kCsvSchemaVersion << ',' << delivered.size() - dec.latent.rejected.size() << ',' << bs.header.packet_count << ','
      << dec.latent.present_fraction() << ',' << lat;
  if (!a.original.empty()) {
    const Image original = read_pnm(a.original);
    const QualityReport q = quality(original, dec.image, ordering_map(bs.header), dec.latent, full.values);
    header_line += ",mse,salient_mse";
    row << ',' << q.mse << ',' << q.salient_mse;
  }
  if (!dec.latent.rejected.empty()) std::cerr << "warning: " << dec.latent.rejected.size() << " packet(s) rejected\n";
  if (a.report.empty()) {
    std::cout << header_line << '\n' << row.str() << '\n';
  } else {
    std::ofstream out(a.report);
    if (!out) throw IoError("cannot write " + a.report);
    out << header_line << '\n' << row.str() << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string config, out, policy;
  std::optional<double> deadline, loss, g;
  std::optional<std::uint64_t> seed;
};

int cmd_sweep(const SweepArgs& a) {
  Config config = load_config(a.config);
  if (!a.out.empty()) config.set("experiment.output_dir", a.out);
  if (a.policy.size()) config.set("experiment.policies", a.policy);
  if (a.deadline) config.set("experiment.deadlines", std::to_string(*a.deadline));
  if (a.loss) config.set("experiment.losses", std::to_string(*a.loss));
  if (a.g) config.set("experiment.g_values", std::to_string(*a.g));
  if (a.seed) config.set("experiment.seeds", std::to_string(*a.seed));
  const ExperimentConfig experiment = experiment_from_config(config);
  const SweepResult result = run_sweep(experiment);
  for (const auto& path : write_sweep_outputs(result, experiment)) std::cout << "wrote " << path.string() << '\n';
  const auto failed = std::count_if(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return !r.ok; });
  std::cout << result.rows.size() << " rows, " << failed << " failed\n";
  return failed == 0 ? 0 : kExitPartial;
}

int cmd_bd(const std::string& reference, const std::string& test) {
  const RQCurve ref = read_curve_csv_file(reference);
  const RQCurve tst = read_curve_csv_file(test);
  if (ref.non_monotone() || tst.non_monotone()) std::cerr << "warning: non-monotone quality; fitting as-is\n";
  std::cout << std::setprecision(10) << "bd_rate_percent=" << bd_rate(ref, tst) << '\n'
            << "bd_quality=" << bd_quality(ref, tst) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LimitNet progressive offloading codec and LPWAN simulator"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a PPM/PGM image into a bitstream file");
  encode->add_option("image", enc.image, "Input image")->required()->check(CLI::ExistingFile);
  encode->add_option("--out,-o", enc.out, "Output bitstream")->required();
  encode->add_option("--config", enc.config, "Config file")->check(CLI::ExistingFile);
  encode->add_option("--g", enc.g, "G_Factor");
  encode->add_option("--saliency", enc.saliency, "spectral | cnn:<weights> | file:<map>");
  encode->add_option("--entropy", enc.entropy, "raw | huffman")->check(CLI::IsMember({"raw", "huffman"}));
  encode->add_option("--channel-order", enc.channel_order, "ascending | descending")
      ->check(CLI::IsMember({"ascending", "descending"}));
  encode->add_option("--payload", enc.payload, "Packet payload bytes");
  encode->add_option("--encoder-weights", enc.encoder_weights, "LNWF analysis network (default: built-in)");

  TransmitArgs tx;
  auto* transmit = app.add_subcommand("transmit", "Simulate delivery of a bitstream over an LPWAN link");
  transmit->add_option("bitstream", tx.bitstream, "Bitstream file")->required()->check(CLI::ExistingFile);
  transmit->add_option("--config", tx.config, "Config file")->check(CLI::ExistingFile);
  transmit->add_option("--policy", tx.policy, "priority_retransmit | index_retransmit | index_skip");
  transmit->add_option("--deadline", tx.deadline, "Deadline in seconds");
  transmit->add_option("--loss", tx.loss, "Packet loss probability");
  transmit->add_option("--seed", tx.seed, "RNG seed");
  transmit->add_option("--out,-o", tx.out, "Trace CSV (time,seq,outcome)");
  transmit->add_option("--delivered-out", tx.delivered_out, "Delivered seq list (default: <out>.delivered)");

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Reconstruct an image from delivered packets");
  decode->add_option("bitstream", dec.bitstream, "Bitstream file")->required()->check(CLI::ExistingFile);
  decode->add_option("--delivered", dec.delivered, "Delivered seq list or 'all'")->default_val("all");
  decode->add_option("--original", dec.original, "Original image for quality metrics")->check(CLI::ExistingFile);
  decode->add_option("--out,-o", dec.out, "Reconstructed PPM/PGM");
  decode->add_option("--report", dec.report, "Quality report CSV (default: stdout)");
  decode->add_option("--decoder-weights", dec.decoder_weights, "LNWF synthesis network")->check(CLI::ExistingFile);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run a deadline x policy x seed experiment matrix");
  sweep->add_option("--config", sw.config, "Experiment config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out,-o", sw.out, "Output directory");
  sweep->add_option("--policy", sw.policy, "Comma-separated policies");
  sweep->add_option("--deadline", sw.deadline, "Single deadline override");
  sweep->add_option("--loss", sw.loss, "Single loss override");
  sweep->add_option("--g", sw.g, "Single G_Factor override");
  sweep->add_option("--seed", sw.seed, "Single seed override");

  std::string bd_ref, bd_test;
  auto* bd = app.add_subcommand("bd", "Bjontegaard deltas between two rate,quality CSV curves");
  bd->add_option("reference", bd_ref, "Reference curve CSV")->required()->check(CLI::ExistingFile);
  bd->add_option("test", bd_test, "Test curve CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*encode) return cmd_encode(enc);
    if (*transmit) return cmd_transmit(tx);
    if (*decode) return cmd_decode(dec);
    if (*sweep) return cmd_sweep(sw);
    if (*bd) return cmd_bd(bd_ref, bd_test);
  } catch (const limitnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
