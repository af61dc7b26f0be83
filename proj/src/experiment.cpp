#include "limitnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "limitnet/errors.hpp"
#include "limitnet/image_io.hpp"
#include "limitnet/pipeline.hpp"
#include "limitnet/synthetic.hpp"
#include "limitnet/weights_io.hpp"

namespace limitnet {

namespace {

std::vector<std::filesystem::path> expand_images(const std::string& spec) {
  namespace fs = std::filesystem;
  fs::path dir = spec;
  std::string pattern_ext;
  if (const auto star = spec.find('*'); star != std::string::npos) {
    dir = fs::path(spec.substr(0, star)).parent_path();
    const std::string tail = spec.substr(star + 1);
    pattern_ext = tail;
  }
  if (dir.empty()) dir = ".";
  if (!fs::is_directory(dir)) {
    if (fs::exists(spec)) return {fs::path(spec)};
    throw ConfigError("image set not found: " + spec);
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string ext = entry.path().extension().string();
    if (!pattern_ext.empty()) {
      if (name.size() < pattern_ext.size() || name.compare(name.size() - pattern_ext.size(), pattern_ext.size(), pattern_ext) != 0) continue;
    } else if (ext != ".ppm" && ext != ".pgm" && ext != ".pnm") {
      continue;
    }
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no images match " + spec);
  return out;
}

struct SourceImage {
  std::string name;
  Image image;
  std::filesystem::path path;
};

std::string format_g(double g) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << g;
  return ss.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::unique_ptr<SaliencyProvider> provider_for(const ExperimentConfig& config, const SourceImage& src) {
  if (!config.saliency.starts_with("file:")) return make_saliency_provider(config.saliency);
  std::filesystem::path target = config.saliency.substr(5);
  if (std::filesystem::is_directory(target)) target /= src.name + ".lnsm";
  if (std::filesystem::exists(target)) return std::make_unique<FileSaliencyProvider>(load_saliency_map_file(target));
  std::clog << "notice: no saliency map for " << src.name << ", using the spectral-residual detector\n";
  return std::make_unique<SpectralResidualProvider>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (g_values.empty() || policies.empty() || deadlines.empty() || losses.empty()) {
    throw ConfigError("experiment lists must be non-empty");
  }
  for (const auto& p : images) {
    if (!std::filesystem::exists(p)) throw ConfigError("image not found: " + p.string());
  }
  if (!encoder_weights.empty()) {
    if (!std::filesystem::exists(encoder_weights)) throw ConfigError("encoder weights not found: " + encoder_weights.string());
    if (decoder_weights.empty() || !std::filesystem::exists(decoder_weights)) {
      throw ConfigError("CNN analysis requires an existing decoder_weights file");
    }
  }
  for (double d : deadlines) {
    if (!(d > 0.0)) throw ConfigError("deadlines must be positive");
  }
  for (double g : g_values) {
    if (!(g >= 0.0)) throw ConfigError("G_Factor values must be non-negative");
  }
  link.validate();
}

ExperimentConfig experiment_from_config(const Config& config) {
  ExperimentConfig e;
  if (const auto images = config.get("experiment.images"); images && !images->empty()) e.images = expand_images(*images);
  e.synthetic_count = static_cast<int>(config.integer("experiment.synthetic_count", e.synthetic_count));
  e.synthetic_side = static_cast<int>(config.integer("experiment.synthetic_side", e.synthetic_side));
  e.synthetic_seed = static_cast<std::uint64_t>(config.integer("experiment.synthetic_seed", static_cast<long long>(e.synthetic_seed)));
  e.block = static_cast<int>(config.integer("experiment.block", e.block));
  e.encoder_weights = config.get_or("experiment.encoder_weights", "");
  e.decoder_weights = config.get_or("experiment.decoder_weights", "");
  e.saliency = config.get_or("experiment.saliency", e.saliency);
  e.codec = codec_from_config(config);
  e.g_values = config.numbers("experiment.g_values", {e.codec.g_factor});
  e.link = link_from_config(config);
  e.policies.clear();
  for (const auto& p : config.strings("experiment.policies", {"priority_retransmit", "index_retransmit", "index_skip"})) {
    e.policies.push_back(parse_policy(p));
  }
  e.deadlines = config.numbers("experiment.deadlines", e.deadlines);
  e.losses = config.numbers("experiment.losses", e.losses);
  e.seeds.clear();
  for (double s : config.numbers("experiment.seeds", {1.0})) {
    if (s < 0 || s != std::floor(s)) throw ConfigError("seeds must be non-negative integers");
    e.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  e.output_dir = config.get_or("experiment.output_dir", e.output_dir.string());
  e.validate();
  return e;
}

bool duty_cycle_respected(const LinkTrace& trace) {
  return std::all_of(trace.windows.begin(), trace.windows.end(), [&](const WindowUsage& w) {
    return w.airtime <= trace.airtime_budget + trace.max_frame_airtime + 1e-12;
  });
}

bool SweepResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  std::vector<SourceImage> sources;
  if (config.images.empty()) {
    for (int i = 0; i < config.synthetic_count; ++i) {
      sources.push_back({"synthetic_" + std::to_string(i),
                         synthetic_scene(config.synthetic_side, config.synthetic_seed + static_cast<std::uint64_t>(i)), {}});
    }
  } else {
    for (const auto& p : config.images) sources.push_back({p.stem().string(), Image(), p});
  }

  Analysis analysis = SpaceToDepthTransform(config.block);
  std::optional<ConvNetSpec> decoder;
  if (!config.encoder_weights.empty()) {
    analysis = load_weights_file(config.encoder_weights);
    decoder = load_weights_file(config.decoder_weights);
  }

  SweepResult result;
  for (SourceImage& src : sources) {
    auto fail_all = [&](const std::string& message) {
      for (double g : config.g_values)
        for (double loss : config.losses)
          for (double deadline : config.deadlines)
            for (Policy policy : config.policies)
              for (std::uint64_t seed : config.seeds) {
                SweepRow row;
                row.image = src.name;
                row.g = g;
                row.loss = loss;
                row.deadline = deadline;
                row.policy = policy;
                row.seed = seed;
                row.ok = false;
                row.error = message;
                result.rows.push_back(std::move(row));
              }
    };
    try {
      if (!src.path.empty()) src.image = read_pnm(src.path);
      const auto provider = provider_for(config, src);
      for (double g : config.g_values) {
        CodecConfig codec = config.codec;
        codec.g_factor = g;
        const EncodeResult enc = encode_image(src.image, analysis, *provider, codec);
        const OffloadBitstream& bs = enc.encoded.bitstream;
        const LatentTensor reference = dequantize_latent(bs.header, enc.encoded.levels);
        const SaliencyMap weights = ordering_map(bs.header);
        const Synthesis synthesis = synthesis_for(bs.header, decoder ? &*decoder : nullptr);
        const TransmissionPlan plan = TransmissionPlan::from_bitstream(bs);
        for (double loss : config.losses) {
          for (double deadline : config.deadlines) {
            for (Policy policy : config.policies) {
              for (std::uint64_t seed : config.seeds) {
                SweepRow row;
                row.image = src.name;
                row.g = g;
                row.loss = loss;
                row.deadline = deadline;
                row.policy = policy;
                row.seed = seed;
                try {
                  LinkModel link = config.link;
                  link.loss = loss;
                  link.seed = seed;
                  const LinkTrace trace = simulate(plan, link, policy, deadline);
                  std::vector<Packet> delivered;
                  if (trace.header_delivered) {
                    for (int s : trace.delivered) delivered.push_back(bs.packets[static_cast<std::size_t>(s)]);
                  }
                  const DecodeResult dec = decode_delivered(bs.header, delivered, synthesis);
                  const QualityReport q = quality(src.image, dec.image, weights, dec.latent, reference);
                  const DeliveryFractions f = delivered_prefix_fraction(trace);
                  row.delivered_packets = static_cast<int>(delivered.size());
                  row.total_packets = trace.total_packets;
                  row.prefix_fraction = f.prefix;
                  row.raw_fraction = f.raw;
                  row.received_bytes = trace.received_bytes;
                  for (const auto& w : trace.windows) row.max_window_airtime = std::max(row.max_window_airtime, w.airtime);
                  row.duty_ok = duty_cycle_respected(trace);
                  row.latent_mse = q.latent_mse;
                  row.mse = q.mse;
                  row.salient_mse = q.salient_mse;
                } catch (const std::exception& e) {
                  row.ok = false;
                  row.error = e.what();
                }
                result.rows.push_back(std::move(row));
              }
            }
          }
        }
      }
    } catch (const std::exception& e) {
      fail_all(e.what());
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.image, a.g, a.loss, a.deadline, a.policy, a.seed) <
           std::tie(b.image, b.g, b.loss, b.deadline, b.policy, b.seed);
  });
  return result;
}

std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& result, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  std::vector<fs::path> written;

  const fs::path rows_path = config.output_dir / "rows.csv";
  {
    std::ofstream out(rows_path);
    if (!out) throw IoError("cannot write " + rows_path.string());
    out << std::setprecision(10);
    out << "schema_version,image,g,loss,deadline,policy,seed,status,delivered_packets,total_packets,"
           "prefix_fraction,raw_fraction,received_bytes,max_window_airtime,duty_ok,latent_mse,mse,salient_mse\n";
    for (const SweepRow& r : result.rows) {
      out << kCsvSchemaVersion << ',' << csv_escape(r.image) << ',' << r.g << ',' << r.loss << ',' << r.deadline << ','
          << to_string(r.policy) << ',' << r.seed << ',' << (r.ok ? "ok" : "error") << ',' << r.delivered_packets << ','
          << r.total_packets << ',' << r.prefix_fraction << ',' << r.raw_fraction << ',' << r.received_bytes << ','
          << r.max_window_airtime << ',' << (r.duty_ok ? 1 : 0) << ',' << r.latent_mse << ',' << r.mse << ','
          << r.salient_mse << '\n';
    }
  }
  written.push_back(rows_path);

  // Means per (g, loss, deadline, policy) cell over images and seeds.
  struct Cell {
    int n = 0;
    double delivered = 0, bytes = 0, latent = 0, mse = 0, salient = 0;
  };
  using Key = std::tuple<double, double, double, int>;
  std::map<Key, Cell> cells;
  for (const SweepRow& r : result.rows) {
    if (!r.ok) continue;
    Cell& c = cells[{r.g, r.loss, r.deadline, static_cast<int>(r.policy)}];
    ++c.n;
    c.delivered += r.delivered_packets;
    c.bytes += static_cast<double>(r.received_bytes);
    c.latent += r.latent_mse;
    c.mse += r.mse;
    c.salient += r.salient_mse;
  }
  auto write_cells = [&](const fs::path& path, std::optional<double> only_g) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(10);
    out << "schema_version,g,loss,deadline,policy,runs,mean_delivered_packets,mean_received_bytes,mean_latent_mse,"
           "mean_mse,mean_salient_mse\n";
    for (const auto& [key, c] : cells) {
      const auto& [g, loss, deadline, policy] = key;
      if (only_g && g != *only_g) continue;
      out << kCsvSchemaVersion << ',' << g << ',' << loss << ',' << deadline << ','
          << to_string(static_cast<Policy>(policy)) << ',' << c.n << ',' << c.delivered / c.n << ',' << c.bytes / c.n
          << ',' << c.latent / c.n << ',' << c.mse / c.n << ',' << c.salient / c.n << '\n';
    }
    written.push_back(path);
  };
  write_cells(config.output_dir / "summary.csv", std::nullopt);
  for (double g : config.g_values) write_cells(config.output_dir / ("curve_g" + format_g(g) + ".csv"), g);

  if (!result.all_ok()) {
    const fs::path err_path = config.output_dir / "errors.jsonl";
    std::ofstream out(err_path);
    for (const SweepRow& r : result.rows) {
      if (r.ok) continue;
      const nlohmann::json line = {{"image", r.image}, {"g", r.g},           {"loss", r.loss},
                                   {"deadline", r.deadline}, {"policy", to_string(r.policy)},
                                   {"seed", r.seed},         {"error", r.error}};
      out << line.dump() << '\n';
    }
    written.push_back(err_path);
  }
  return written;
}

}  // namespace limitnet
