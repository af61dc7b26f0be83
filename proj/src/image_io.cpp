#include "limitnet/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "limitnet/binary_io.hpp"
#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

class PnmTokenizer {
 public:
  explicit PnmTokenizer(const std::vector<std::uint8_t>& data) : data_(data) {}

  int integer() {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) throw FormatError("malformed PNM header");
    long v = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      v = v * 10 + (data_[pos_++] - '0');
      if (v > 1'000'000) throw FormatError("PNM value too large");
    }
    return static_cast<int>(v);
  }
  // Exactly one whitespace byte separates the header from binary samples.
  void single_space() {
    if (pos_ >= data_.size() || !std::isspace(data_[pos_])) throw FormatError("malformed PNM header");
    ++pos_;
  }
  std::size_t position() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(data_[pos_])) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  const std::vector<std::uint8_t>& data_;
  std::size_t pos_ = 2;
};

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> data = read_file(path);
  if (data.size() < 2 || data[0] != 'P') throw FormatError(path.string() + " is not a PNM file");
  const char kind = static_cast<char>(data[1]);
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') throw FormatError("unsupported PNM variant P" + std::string(1, kind));
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  PnmTokenizer tok(data);
  const int width = tok.integer(), height = tok.integer(), maxval = tok.integer();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw FormatError("invalid PNM dimensions");

  Tensor3 pixels({channels, height, width});
  const std::size_t count = pixels.size();
  std::vector<int> samples(count);
  if (kind == '2' || kind == '3') {
    for (auto& s : samples) s = tok.integer();
  } else {
    tok.single_space();
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::size_t pos = tok.position();
    if (data.size() - pos < count * bytes_per) throw FormatError("PNM pixel data truncated");
    for (auto& s : samples) {
      s = bytes_per == 2 ? (data[pos] << 8) | data[pos + 1] : data[pos];
      pos += bytes_per;
    }
  }
  // Interleaved RGB -> planar.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const int s = samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
        pixels.at(c, y, x) = std::min(1.0f, static_cast<float>(s) / static_cast<float>(maxval));
      }
    }
  }
  return Image(std::move(pixels));
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) throw FormatError("PNM output needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << (image.channels() == 3 ? "P6" : "P5") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(image.width()) * image.channels());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        row[static_cast<std::size_t>(x) * image.channels() + c] =
            static_cast<char>(static_cast<unsigned char>(std::lround(image.at(c, y, x) * 255.0f)));
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace limitnet
