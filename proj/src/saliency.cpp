#include "limitnet/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "limitnet/binary_io.hpp"
#include "limitnet/errors.hpp"
#include "limitnet/weights_io.hpp"

namespace limitnet {

namespace {

void require_multiple_of_wire(int side) {
  if (side <= 0 || side % kWireSide != 0) {
    throw ShapeError("saliency side " + std::to_string(side) + " is not a multiple of 8");
  }
}

// Mirror index without repeating the edge sample (gfedcb|abcdefgh|gfedcba).
int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

// Bilinear resize of a single plane with half-pixel centres.
std::vector<double> resize_bilinear(const std::vector<double>& src, int sh, int sw, int dh, int dw) {
  std::vector<double> dst(static_cast<std::size_t>(dh) * dw);
  const double fy = static_cast<double>(sh) / dh, fx = static_cast<double>(sw) / dw;
  for (int y = 0; y < dh; ++y) {
    const double sy = std::clamp((y + 0.5) * fy - 0.5, 0.0, static_cast<double>(sh - 1));
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double wy = sy - y0;
    for (int x = 0; x < dw; ++x) {
      const double sx = std::clamp((x + 0.5) * fx - 0.5, 0.0, static_cast<double>(sw - 1));
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double wx = sx - x0;
      const double top = src[y0 * sw + x0] * (1 - wx) + src[y0 * sw + x1] * wx;
      const double bot = src[y1 * sw + x0] * (1 - wx) + src[y1 * sw + x1] * wx;
      dst[static_cast<std::size_t>(y) * dw + x] = top * (1 - wy) + bot * wy;
    }
  }
  return dst;
}

std::vector<double> separable_filter(const std::vector<double>& src, int n, const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  std::vector<double> tmp(src.size()), dst(src.size()), line(static_cast<std::size_t>(n + 2 * r));
  // Border indices are resolved once per line; the inner loop is a plain dot product.
  auto run = [&](auto load, auto store) {
    for (int i = 0; i < n; ++i) {
      for (int x = -r; x < n + r; ++x) line[x + r] = load(i, reflect101(x, n));
      for (int x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int t = 0; t <= 2 * r; ++t) acc += taps[t] * line[x + t];
        store(i, x, acc);
      }
    }
  };
  run([&](int y, int x) { return src[y * n + x]; }, [&](int y, int x, double v) { tmp[y * n + x] = v; });
  run([&](int x, int y) { return tmp[y * n + x]; }, [&](int x, int y, double v) { dst[y * n + x] = v; });
  return dst;
}

std::vector<double> gaussian_taps(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += taps[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& t : taps) t /= sum;
  return taps;
}

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans are cached per (size, direction); fftw_execute_dft is safe to call concurrently.
fftw_plan cached_plan(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard lock(fftw_planner_mutex());
  auto& plan = plans[{n, sign}];
  if (!plan) {
    std::vector<std::complex<double>> a(static_cast<std::size_t>(n) * n), b(a.size());
    plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()), reinterpret_cast<fftw_complex*>(b.data()),
                            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  return plan;
}

std::vector<std::complex<double>> dft2(const std::vector<std::complex<double>>& in, int n, int sign) {
  std::vector<std::complex<double>> out(in.size());
  std::vector<std::complex<double>> src = in;  // FFTW may scribble on its input
  fftw_execute_dft(cached_plan(n, sign), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> normalize_min_max(std::vector<double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo, range = *hi - *lo;
  if (!(range > 1e-12 * std::max(1.0, std::abs(*hi)))) {
    std::fill(v.begin(), v.end(), 0.0);
    return v;
  }
  for (double& x : v) x = std::clamp((x - min) / range, 0.0, 1.0);
  return v;
}

}  // namespace

SaliencyMap::SaliencyMap(int side, std::vector<double> values) : side_(side), values_(std::move(values)) {
  if (side <= 0 || values_.size() != static_cast<std::size_t>(side) * side) throw ShapeError("saliency map length mismatch");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("saliency value outside [0,1]");
  }
}

SaliencyMap SaliencyMap::constant(int side, double value) {
  return SaliencyMap(side, std::vector<double>(static_cast<std::size_t>(side) * side, value));
}

std::array<std::uint8_t, kWireBytes> WireSaliency::serialize() const {
  std::array<std::uint8_t, kWireBytes> out{};
  std::size_t bit = 0;
  for (std::uint8_t level : levels) {
    for (int b = kWireBits - 1; b >= 0; --b, ++bit) {
      if ((level >> b) & 1u) out[bit / 8] |= static_cast<std::uint8_t>(0x80u >> (bit % 8));
    }
  }
  return out;
}

WireSaliency WireSaliency::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kWireBytes) throw FormatError("wire saliency must be exactly 40 bytes");
  WireSaliency w;
  std::size_t bit = 0;
  for (std::uint8_t& level : w.levels) {
    std::uint8_t v = 0;
    for (int b = 0; b < kWireBits; ++b, ++bit) v = static_cast<std::uint8_t>((v << 1) | ((bytes[bit / 8] >> (7 - bit % 8)) & 1u));
    level = v;
  }
  return w;
}

WireSaliency downsize_quantize(const SaliencyMap& map) {
  require_multiple_of_wire(map.side());
  const int cell = map.side() / kWireSide;
  WireSaliency w;
  for (int r = 0; r < kWireSide; ++r) {
    for (int c = 0; c < kWireSide; ++c) {
      double sum = 0.0;
      for (int y = 0; y < cell; ++y) {
        for (int x = 0; x < cell; ++x) sum += map.at(r * cell + y, c * cell + x);
      }
      const double mean = sum / (static_cast<double>(cell) * cell);
      w.levels[r * kWireSide + c] =
          static_cast<std::uint8_t>(std::clamp<long long>(round_half_away(mean * kWireMaxLevel), 0, kWireMaxLevel));
    }
  }
  return w;
}

SaliencyMap reconstruct_map(const WireSaliency& wire, int side) {
  require_multiple_of_wire(side);
  const int cell = side / kWireSide;
  std::vector<double> values(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      values[static_cast<std::size_t>(y) * side + x] = wire.at(y / cell, x / cell) / static_cast<double>(kWireMaxLevel);
    }
  }
  return SaliencyMap(side, std::move(values));
}

SaliencyMap SpectralResidualProvider::detect(const Image& image, const LatentTensor& latent) const {
  return detect(image, latent.side());
}

SaliencyMap SpectralResidualProvider::detect(const Image& image, int side) const {
  const int h = image.height(), w = image.width(), n = working_side_;
  std::vector<double> gray(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v;
      if (image.channels() == 3) {
        v = 0.299 * image.at(0, y, x) + 0.587 * image.at(1, y, x) + 0.114 * image.at(2, y, x);
      } else {
        v = 0.0;
        for (int c = 0; c < image.channels(); ++c) v += image.at(c, y, x);
        v /= image.channels();
      }
      gray[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  const std::vector<double> small = resize_bilinear(gray, h, w, n, n);
  const auto [lo, hi] = std::minmax_element(small.begin(), small.end());
  if (*hi - *lo < 1e-9) return SaliencyMap::constant(side, 0.0);

  std::vector<std::complex<double>> spatial(small.begin(), small.end());
  const auto spectrum = dft2(spatial, n, FFTW_FORWARD);
  std::vector<double> log_amplitude(spectrum.size()), phase(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    log_amplitude[i] = std::log1p(std::abs(spectrum[i]));
    phase[i] = std::arg(spectrum[i]);
  }
  const std::vector<double> box(3, 1.0 / 3.0);
  const std::vector<double> smooth = separable_filter(log_amplitude, n, box);
  std::vector<std::complex<double>> residual(spectrum.size());
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] = std::polar(std::exp(log_amplitude[i] - smooth[i]), phase[i]);
  }
  const auto back = dft2(residual, n, FFTW_BACKWARD);
  std::vector<double> energy(back.size());
  for (std::size_t i = 0; i < back.size(); ++i) energy[i] = std::norm(back[i]);
  const std::vector<double> blurred = separable_filter(energy, n, gaussian_taps(sigma_));
  return SaliencyMap(side, normalize_min_max(resize_bilinear(blurred, n, n, side, side)));
}

CnnSaliencyProvider::CnnSaliencyProvider(ConvNetSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.output_channels() != 1) throw ConfigError("saliency network must emit one channel");
}

CnnSaliencyProvider CnnSaliencyProvider::from_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("saliency weights file not found: " + path.string());
  return CnnSaliencyProvider(load_weights_file(path));
}

SaliencyMap CnnSaliencyProvider::detect(const Image&, const LatentTensor& latent) const {
  const Tensor3 out = conv_forward(spec_, latent.tensor());
  if (out.height() != latent.side() || out.width() != latent.side()) {
    throw ShapeError("saliency network output is not K x K");
  }
  std::vector<double> values(out.data().begin(), out.data().end());
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
  return SaliencyMap(latent.side(), std::move(values));
}

FileSaliencyProvider FileSaliencyProvider::from_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("saliency map file not found: " + path.string());
  return FileSaliencyProvider(load_saliency_map_file(path));
}

SaliencyMap FileSaliencyProvider::detect(const Image&, const LatentTensor& latent) const {
  if (map_.side() != latent.side()) throw ShapeError("stored saliency map does not match latent side");
  return map_;
}

std::vector<std::uint8_t> save_saliency_map(const SaliencyMap& map) {
  ByteWriter w;
  w.tag("LNSM");
  w.u16(static_cast<std::uint16_t>(map.side()));
  for (double v : map.values()) w.f32(static_cast<float>(v));
  const std::uint32_t crc = crc32(w.buffer());
  w.u32(crc);
  return w.take();
}

SaliencyMap load_saliency_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LNSM", 4) != 0) throw BadMagicError("not a saliency map file");
  if (bytes.size() < 10) throw ChecksumError("saliency map file truncated");
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), 4);
  if (crc32(body) != stored) throw ChecksumError("saliency map checksum mismatch");
  ByteReader r(body);
  r.bytes(4);
  const int side = r.u16();
  if (r.remaining() != static_cast<std::size_t>(side) * side * 4) {
    throw ShapeInconsistencyError("saliency map length does not match its side");
  }
  std::vector<double> values(static_cast<std::size_t>(side) * side);
  for (double& v : values) v = r.f32();
  return SaliencyMap(side, std::move(values));
}

void save_saliency_map_file(const SaliencyMap& map, const std::filesystem::path& path) {
  write_file(path, save_saliency_map(map));
}

SaliencyMap load_saliency_map_file(const std::filesystem::path& path) { return load_saliency_map(read_file(path)); }

}  // namespace limitnet
