#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "limitnet/bitstream.hpp"
#include "limitnet/netsim.hpp"

namespace limitnet {

// Flat "key = value" text with [section] headers. Lookups use "section.key".
// Environment variables LIMITNET_<SECTION>_<KEY> (upper case) override file values.
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  // Comma-separated numbers; "a-b" expands to every integer in the range.
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// [codec] g, channel_order, entropy, payload_bytes, bits
CodecConfig codec_from_config(const Config& config);
// [link] bandwidth (constant|gamma), bandwidth_bps, gamma_shape, gamma_scale, gamma_min,
//        gamma_max, gamma_interval, duty_cycle | airtime, window, loss, overhead_bytes, seed
LinkModel link_from_config(const Config& config);

}  // namespace limitnet
