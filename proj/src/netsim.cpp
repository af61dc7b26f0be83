#include "limitnet/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <random>

#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

// Bandwidth process indexed by resampling interval; samples are drawn in interval order
// from a dedicated stream so lookups never perturb the loss stream.
class BandwidthProcess {
 public:
  BandwidthProcess(const BandwidthModel& model, std::uint64_t seed) : model_(model), rng_(seed ^ 0x9E3779B97F4A7C15ull) {}

  double at(double time) {
    if (const auto* c = std::get_if<ConstantBandwidth>(&model_)) return c->bytes_per_second;
    const auto& g = std::get<GammaBandwidth>(model_);
    const auto interval = static_cast<std::size_t>(std::floor(time / g.interval));
    while (samples_.size() <= interval) samples_.push_back(draw(g));
    return samples_[interval];
  }

  double draw(const GammaBandwidth& g) {
    std::gamma_distribution<double> dist(g.shape, g.scale);
    const double v = dist(rng_);
    return g.clamp ? std::clamp(v, g.min, g.max) : v;
  }

 private:
  BandwidthModel model_;
  std::mt19937_64 rng_;
  std::vector<double> samples_;
};

// Chooses the next packet to send under each policy.
class Scheduler {
 public:
  Scheduler(Policy policy, int packets) : policy_(policy), acked_(static_cast<std::size_t>(packets), false) {
    for (int s = 0; s < packets; ++s) queue_.push_back(s);
  }

  // -1 when there is nothing left to send.
  int next() {
    if (policy_ == Policy::PriorityRetransmit) {
      while (lowest_unacked_ < static_cast<int>(acked_.size()) && acked_[lowest_unacked_]) ++lowest_unacked_;
      return lowest_unacked_ < static_cast<int>(acked_.size()) ? lowest_unacked_ : -1;
    }
    return queue_.empty() ? -1 : queue_.front();
  }

  void report(int seq, bool delivered) {
    if (delivered) acked_[seq] = true;
    if (policy_ == Policy::PriorityRetransmit) return;
    queue_.pop_front();
    if (!delivered && policy_ == Policy::IndexRetransmit) queue_.push_back(seq);
  }

 private:
  Policy policy_;
  std::vector<bool> acked_;
  std::deque<int> queue_;
  int lowest_unacked_ = 0;
};

}  // namespace

void LinkModel::validate() const {
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) throw ConfigError("duty cycle must lie in (0,1]");
  if (!(window > 0.0)) throw ConfigError("window length must be positive");
  if (!(loss >= 0.0 && loss < 1.0)) throw ConfigError("loss probability must lie in [0,1)");
  if (overhead_bytes < 0 || seq_bytes < 0) throw ConfigError("frame overhead must be non-negative");
  if (const auto* c = std::get_if<ConstantBandwidth>(&bandwidth)) {
    if (!(c->bytes_per_second > 0.0)) throw ConfigError("bandwidth must be positive");
  } else {
    const auto& g = std::get<GammaBandwidth>(bandwidth);
    if (!(g.shape > 0.0 && g.scale > 0.0 && g.interval > 0.0)) throw ConfigError("gamma parameters must be positive");
    if (g.clamp && !(g.min > 0.0 && g.min <= g.max)) throw ConfigError("gamma clamp range is invalid");
  }
}

std::string_view to_string(Policy policy) noexcept {
  switch (policy) {
    case Policy::PriorityRetransmit:
      return "priority_retransmit";
    case Policy::IndexRetransmit:
      return "index_retransmit";
    case Policy::IndexSkip:
      return "index_skip";
  }
  return "unknown";
}

Policy parse_policy(std::string_view text) {
  for (Policy p : {Policy::PriorityRetransmit, Policy::IndexRetransmit, Policy::IndexSkip}) {
    if (text == to_string(p)) return p;
  }
  throw ConfigError("unknown policy '" + std::string(text) + "'");
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Sent:
      return "sent";
    case Outcome::Lost:
      return "lost";
    case Outcome::Delivered:
      return "delivered";
    case Outcome::Acked:
      return "acked";
  }
  return "unknown";
}

TransmissionPlan TransmissionPlan::from_bitstream(const OffloadBitstream& bitstream) {
  TransmissionPlan plan;
  plan.header_bytes = static_cast<int>(bitstream.header.serialized_size());
  plan.packet_bytes.resize(static_cast<std::size_t>(bitstream.header.packet_count), 0);
  for (const Packet& p : bitstream.packets) {
    if (p.seq < plan.packet_bytes.size()) plan.packet_bytes[p.seq] = static_cast<int>(p.payload.size());
  }
  return plan;
}

void LinkTrace::write_csv(std::ostream& out) const {
  out << "time,seq,outcome\n";
  const auto precision = out.precision(17);
  for (const TraceEvent& e : events) {
    out << e.time << ',';
    if (e.seq == kHeaderSeq) {
      out << "header";
    } else {
      out << e.seq;
    }
    out << ',' << to_string(e.outcome) << '\n';
  }
  out.precision(precision);
}

LinkTrace simulate(const TransmissionPlan& plan, const LinkModel& link, Policy policy, double deadline) {
  link.validate();
  if (!(deadline > 0.0)) throw ConfigError("deadline must be positive");

  LinkTrace trace;
  trace.deadline = deadline;
  trace.airtime_budget = link.airtime_budget();
  trace.total_packets = static_cast<int>(plan.packet_bytes.size());

  BandwidthProcess bandwidth(link.bandwidth, link.seed);
  std::mt19937_64 loss_rng(link.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Scheduler scheduler(policy, trace.total_packets);

  const double budget = link.airtime_budget();
  double t = 0.0;
  int delivered_count = 0;
  while (t < deadline) {
    int seq = kHeaderSeq;
    if (trace.header_delivered) {
      if (delivered_count == trace.total_packets) break;
      seq = scheduler.next();
      if (seq < 0) break;
    }
    const int frame_bytes = seq == kHeaderSeq ? plan.header_bytes + link.overhead_bytes
                                              : plan.packet_bytes[seq] + link.seq_bytes + link.overhead_bytes;
    const auto window = static_cast<std::size_t>(std::floor(t / link.window));
    if (trace.windows.size() <= window) trace.windows.resize(window + 1);
    WindowUsage& usage = trace.windows[window];
    const double airtime = frame_bytes / bandwidth.at(t);
    if (usage.airtime + airtime > budget) {
      // Budget for this window is spent; wait for the next one.
      t = (window + 1) * link.window;
      continue;
    }
    if (t + airtime > deadline) break;

    trace.events.push_back({t, seq, Outcome::Sent});
    ++trace.sends;
    t += airtime;
    usage.airtime += airtime;
    usage.bytes += frame_bytes;
    trace.max_frame_airtime = std::max(trace.max_frame_airtime, airtime);
    const bool lost = uniform(loss_rng) < link.loss;
    if (lost) {
      trace.events.push_back({t, seq, Outcome::Lost});
    } else {
      trace.events.push_back({t, seq, Outcome::Delivered});
      trace.events.push_back({t, seq, Outcome::Acked});
      trace.received_bytes += frame_bytes;
    }
    if (seq == kHeaderSeq) {
      trace.header_delivered = !lost;
      continue;
    }
    if (!lost) {
      trace.delivered.push_back(seq);
      trace.delivered_payload_bytes += plan.packet_bytes[seq];
      ++delivered_count;
    }
    scheduler.report(seq, !lost);
  }
  std::sort(trace.delivered.begin(), trace.delivered.end());
  return trace;
}

LinkTrace simulate(const OffloadBitstream& bitstream, const LinkModel& link, Policy policy, double deadline) {
  return simulate(TransmissionPlan::from_bitstream(bitstream), link, policy, deadline);
}

DeliveryFractions delivered_prefix_fraction(const LinkTrace& trace) {
  DeliveryFractions f;
  if (trace.total_packets == 0) return f;
  int prefix = 0;
  for (int seq : trace.delivered) {
    if (seq != prefix) break;
    ++prefix;
  }
  f.prefix = static_cast<double>(prefix) / trace.total_packets;
  f.raw = static_cast<double>(trace.delivered.size()) / trace.total_packets;
  return f;
}

std::vector<double> sample_bandwidths(const GammaBandwidth& model, std::uint64_t seed, std::size_t count) {
  BandwidthProcess process(model, seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(process.at((static_cast<double>(i) + 0.5) * model.interval));
  return out;
}

}  // namespace limitnet
