#include "limitnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string env_name(const std::string& key) {
  std::string name = "LIMITNET_";
  for (char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

double to_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Config config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      config.values_[section] = trim(body.data());
      continue;
    }
    for (const auto& [key, value] : body) config.values_[section + "." + key] = trim(value.data());
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  if (const char* env = std::getenv(env_name(key).c_str())) return trim(env);
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return std::nullopt;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::number(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? to_number(key, *v) : fallback;
}

long long Config::integer(const std::string& key, long long fallback) const {
  const double v = number(key, static_cast<double>(fallback));
  if (v != std::floor(v)) throw ConfigError("'" + key + "' expects an integer");
  return static_cast<long long>(v);
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(*v)) {
    // Integer range "a-b" (only when the dash is not a sign).
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos && item.find_first_of(".eE") == std::string::npos) {
      const double a = to_number(key, item.substr(0, dash)), b = to_number(key, item.substr(dash + 1));
      if (b < a) throw ConfigError("'" + key + "' has an empty range " + item);
      for (double x = a; x <= b; x += 1.0) out.push_back(x);
    } else {
      out.push_back(to_number(key, item));
    }
  }
  return out;
}

std::vector<std::string> Config::strings(const std::string& key, const std::vector<std::string>& fallback) const {
  const auto v = get(key);
  return v ? split_list(*v) : fallback;
}

CodecConfig codec_from_config(const Config& config) {
  CodecConfig c;
  c.g_factor = config.number("codec.g", c.g_factor);
  const std::string order = config.get_or("codec.channel_order", "descending");
  if (order == "descending") {
    c.channel_order = ChannelOrder::Descending;
  } else if (order == "ascending") {
    c.channel_order = ChannelOrder::Ascending;
  } else {
    throw ConfigError("codec.channel_order must be ascending or descending");
  }
  const std::string entropy = config.get_or("codec.entropy", "raw");
  if (entropy == "raw") {
    c.entropy = EntropyMode::Raw;
  } else if (entropy == "huffman") {
    c.entropy = EntropyMode::Huffman;
  } else {
    throw ConfigError("codec.entropy must be raw or huffman");
  }
  c.payload_bytes = static_cast<int>(config.integer("codec.payload_bytes", c.payload_bytes));
  c.bits = static_cast<int>(config.integer("codec.bits", c.bits));
  if (c.bits < 1 || c.bits > 6) throw ConfigError("codec.bits must lie in [1,6]");
  return c;
}

LinkModel link_from_config(const Config& config) {
  LinkModel link;
  const std::string kind = config.get_or("link.bandwidth", "constant");
  if (kind == "constant") {
    link.bandwidth = ConstantBandwidth{config.number("link.bandwidth_bps", 2500.0)};
  } else if (kind == "gamma") {
    GammaBandwidth g;
    g.shape = config.number("link.gamma_shape", g.shape);
    g.scale = config.number("link.gamma_scale", 6250.0 / g.shape);
    g.min = config.number("link.gamma_min", g.min);
    g.max = config.number("link.gamma_max", g.max);
    g.interval = config.number("link.gamma_interval", g.interval);
    g.clamp = config.get_or("link.gamma_clamp", "true") != "false";
    link.bandwidth = g;
  } else {
    throw ConfigError("link.bandwidth must be constant or gamma");
  }
  link.window = config.number("link.window", link.window);
  if (config.get("link.airtime")) {
    link.duty_cycle = config.number("link.airtime", 0.74) / link.window;
  } else {
    link.duty_cycle = config.number("link.duty_cycle", link.duty_cycle);
  }
  link.loss = config.number("link.loss", link.loss);
  link.overhead_bytes = static_cast<int>(config.integer("link.overhead_bytes", link.overhead_bytes));
  link.seed = static_cast<std::uint64_t>(config.integer("link.seed", static_cast<long long>(link.seed)));
  link.validate();
  return link;
}

}  // namespace limitnet
