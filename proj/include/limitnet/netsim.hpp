#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "limitnet/bitstream.hpp"

namespace limitnet {

// Bandwidths are in bytes per second.
struct ConstantBandwidth {
  double bytes_per_second = 2500.0;
};

// Gamma(shape, scale) resampled every `interval` seconds and clamped to [min, max].
struct GammaBandwidth {
  double shape = 2.0;
  double scale = 3125.0;  // mean 6.25 KB/s
  double min = 300.0;
  double max = 50000.0;
  double interval = 1.0;
  bool clamp = true;
};

using BandwidthModel = std::variant<ConstantBandwidth, GammaBandwidth>;

struct LinkModel {
  BandwidthModel bandwidth = ConstantBandwidth{};
  double duty_cycle = 0.74 / 60.0;  // fraction of each window usable for airtime
  double window = 60.0;             // seconds
  double loss = 0.0;                // i.i.d. per-frame loss probability in [0,1)
  std::uint64_t seed = 1;
  int overhead_bytes = 13;          // PHY/MAC bytes added to every frame
  int seq_bytes = 2;                // sequence number carried with every packet

  double airtime_budget() const noexcept { return duty_cycle * window; }
  // Throws ConfigError on out-of-range parameters.
  void validate() const;
};

enum class Policy : std::uint8_t {
  PriorityRetransmit = 0,  // always the lowest-seq unacknowledged packet next
  IndexRetransmit = 1,     // one pass in seq order, lost packets retried after the pass
  IndexSkip = 2,           // one pass in seq order, no retries
};

std::string_view to_string(Policy policy) noexcept;
// Accepts "priority_retransmit", "index_retransmit", "index_skip"; throws ConfigError.
Policy parse_policy(std::string_view text);

// What the link carries: a loss-protected header frame, then one frame per packet.
struct TransmissionPlan {
  int header_bytes = 0;
  std::vector<int> packet_bytes;  // payload bytes of each packet, by seq

  static TransmissionPlan from_bitstream(const OffloadBitstream& bitstream);
};

enum class Outcome : std::uint8_t { Sent, Lost, Delivered, Acked };
std::string_view to_string(Outcome outcome) noexcept;

inline constexpr int kHeaderSeq = -1;

struct TraceEvent {
  double time = 0.0;
  int seq = 0;  // kHeaderSeq for the stream header
  Outcome outcome = Outcome::Sent;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct WindowUsage {
  double airtime = 0.0;
  long long bytes = 0;

  friend bool operator==(const WindowUsage&, const WindowUsage&) = default;
};

struct LinkTrace {
  std::vector<TraceEvent> events;
  std::vector<WindowUsage> windows;
  double deadline = 0.0;
  double airtime_budget = 0.0;
  double max_frame_airtime = 0.0;  // longest single frame sent
  bool header_delivered = false;
  std::vector<int> delivered;      // sorted seqs
  int total_packets = 0;
  long long received_bytes = 0;    // on-air bytes of every delivered frame, header included
  long long delivered_payload_bytes = 0;  // packet payload bytes delivered
  int sends = 0;

  void write_csv(std::ostream& out) const;

  friend bool operator==(const LinkTrace&, const LinkTrace&) = default;
};

// Discrete-event simulation of one transmission session. Deterministic in its inputs.
LinkTrace simulate(const TransmissionPlan& plan, const LinkModel& link, Policy policy, double deadline);
LinkTrace simulate(const OffloadBitstream& bitstream, const LinkModel& link, Policy policy,
                   double deadline);

struct DeliveryFractions {
  double prefix = 0.0;  // length of the fully delivered prefix / total
  double raw = 0.0;     // delivered / total
};

DeliveryFractions delivered_prefix_fraction(const LinkTrace& trace);

// Samples the configured bandwidth process for a number of intervals (used for checks).
std::vector<double> sample_bandwidths(const GammaBandwidth& model, std::uint64_t seed, std::size_t count);

}  // namespace limitnet
