#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "limitnet/bitstream.hpp"
#include "limitnet/config.hpp"
#include "limitnet/netsim.hpp"

namespace limitnet {

inline constexpr int kCsvSchemaVersion = 1;

struct ExperimentConfig {
  std::vector<std::filesystem::path> images;  // empty: synthetic scenes
  int synthetic_count = 4;
  int synthetic_side = 64;
  std::uint64_t synthetic_seed = 7;
  int block = 2;                                // built-in transform block
  std::filesystem::path encoder_weights;        // non-empty: CNN analysis
  std::filesystem::path decoder_weights;        // required with CNN analysis
  std::string saliency = "spectral";            // spectral | cnn:<file> | file:<dir-or-file>
  std::vector<double> g_values{0.2};
  CodecConfig codec;
  LinkModel link;
  std::vector<Policy> policies{Policy::PriorityRetransmit, Policy::IndexRetransmit, Policy::IndexSkip};
  std::vector<double> deadlines{60.0};
  std::vector<double> losses{0.10, 0.40, 0.70};
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "sweep_out";

  // Checks referenced files and non-empty lists; throws ConfigError.
  void validate() const;
};

// [experiment] images (directory or glob), synthetic_count, synthetic_side, synthetic_seed,
// block, encoder_weights, decoder_weights, saliency, g_values, policies, deadlines,
// losses, seeds, output_dir; plus the [codec] and [link] sections.
ExperimentConfig experiment_from_config(const Config& config);

struct SweepRow {
  std::string image;
  double g = 0.0;
  double loss = 0.0;
  double deadline = 0.0;
  Policy policy = Policy::PriorityRetransmit;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  int delivered_packets = 0;
  int total_packets = 0;
  double prefix_fraction = 0.0;
  double raw_fraction = 0.0;
  long long received_bytes = 0;
  double max_window_airtime = 0.0;
  bool duty_ok = true;
  double latent_mse = 0.0;
  double mse = 0.0;
  double salient_mse = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (image, g, loss, deadline, policy, seed)
  bool all_ok() const;
};

SweepResult run_sweep(const ExperimentConfig& config);

// Writes rows.csv, summary.csv (means per cell), one curve_g<g>.csv per G_Factor and,
// when any row failed, errors.jsonl. Returns the files written.
std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& result, const ExperimentConfig& config);

// Per-window airtime within budget plus one frame of slack.
bool duty_cycle_respected(const LinkTrace& trace);

}  // namespace limitnet
