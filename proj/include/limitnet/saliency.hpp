#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "limitnet/convnet.hpp"
#include "limitnet/tensor.hpp"

namespace limitnet {

// K×K importance map with values in [0,1].
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(int side, std::vector<double> values);
  static SaliencyMap constant(int side, double value);

  int side() const noexcept { return side_; }
  double at(int row, int col) const noexcept { return values_[static_cast<std::size_t>(row) * side_ + col]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;

 private:
  int side_ = 0;
  std::vector<double> values_;
};

inline constexpr int kWireSide = 8;
inline constexpr int kWireBits = 5;
inline constexpr int kWireMaxLevel = (1 << kWireBits) - 1;
inline constexpr std::size_t kWireBytes = kWireSide * kWireSide * kWireBits / 8;  // 40

// 8×8 grid of 5-bit levels, row-major.
struct WireSaliency {
  std::array<std::uint8_t, kWireSide * kWireSide> levels{};

  std::uint8_t at(int row, int col) const noexcept { return levels[row * kWireSide + col]; }
  // Row-major cells, MSB-first within each 5-bit field.
  std::array<std::uint8_t, kWireBytes> serialize() const;
  static WireSaliency parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const WireSaliency&, const WireSaliency&) = default;
};

// Block-mean downsizing to 8×8, then round-half-away(mean * 31). K must be a multiple of 8.
WireSaliency downsize_quantize(const SaliencyMap& map);

// Nearest-neighbour upsampling of level/31 to K×K. K must be a multiple of 8.
SaliencyMap reconstruct_map(const WireSaliency& wire, int side);

class SaliencyProvider {
 public:
  virtual ~SaliencyProvider() = default;
  // Returns a map whose side equals latent.side().
  virtual SaliencyMap detect(const Image& image, const LatentTensor& latent) const = 0;
  virtual const char* name() const noexcept = 0;
};

// Spectral-residual detector on a grey working image. Constant inputs yield an all-zero map.
class SpectralResidualProvider final : public SaliencyProvider {
 public:
  explicit SpectralResidualProvider(int working_side = 64, double sigma = 2.5)
      : working_side_(working_side), sigma_(sigma) {}
  SaliencyMap detect(const Image& image, const LatentTensor& latent) const override;
  SaliencyMap detect(const Image& image, int side) const;
  const char* name() const noexcept override { return "spectral"; }

 private:
  int working_side_;
  double sigma_;
};

// Saliency branch network over the latent; its last layer must emit one channel.
class CnnSaliencyProvider final : public SaliencyProvider {
 public:
  explicit CnnSaliencyProvider(ConvNetSpec spec);
  // Throws ConfigError when the file is missing.
  static CnnSaliencyProvider from_file(const std::filesystem::path& path);
  SaliencyMap detect(const Image& image, const LatentTensor& latent) const override;
  const char* name() const noexcept override { return "cnn"; }

 private:
  ConvNetSpec spec_;
};

// Returns a precomputed map.
class FileSaliencyProvider final : public SaliencyProvider {
 public:
  explicit FileSaliencyProvider(SaliencyMap map) : map_(std::move(map)) {}
  // Throws ConfigError when the file is missing.
  static FileSaliencyProvider from_file(const std::filesystem::path& path);
  SaliencyMap detect(const Image& image, const LatentTensor& latent) const override;
  const char* name() const noexcept override { return "file"; }

 private:
  SaliencyMap map_;
};

// "LNSM" precomputed map file: magic[4], side u16, side*side f32, CRC32.
std::vector<std::uint8_t> save_saliency_map(const SaliencyMap& map);
SaliencyMap load_saliency_map(std::span<const std::uint8_t> bytes);
void save_saliency_map_file(const SaliencyMap& map, const std::filesystem::path& path);
SaliencyMap load_saliency_map_file(const std::filesystem::path& path);

}  // namespace limitnet
