#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "priorfill/io.hpp"

namespace priorfill {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
    std::string t;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) {
      t.push_back(static_cast<char>(bytes_[pos_++]));
      if (t.size() > 64) throw Error(Errc::BadHeader, "header token too long");
    }
    if (t.empty()) throw Error(Errc::BadHeader, "unexpected end of header");
    return t;
  }

  // Exactly one whitespace byte separates the scale line from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(Errc::BadHeader, "missing separator before payload");
    }
    return pos_ + 1;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

int parse_dim(const std::string& t) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(t, &used);
  } catch (const std::exception&) {
    throw Error(Errc::BadHeader, "bad dimension '" + t + "'");
  }
  if (used != t.size() || v <= 0 || v > (1 << 20)) {
    throw Error(Errc::BadHeader, "bad dimension '" + t + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

Grid read_pfm(std::span<const std::uint8_t> bytes) {
  HeaderReader hdr(bytes);
  const std::string magic = hdr.token();
  if (magic == "PF") throw Error(Errc::UnsupportedChannels, "color PFM is not supported");
  if (magic != "Pf") throw Error(Errc::BadHeader, "not a PFM file");
  const int w = parse_dim(hdr.token());
  const int h = parse_dim(hdr.token());
  const std::string scale_tok = hdr.token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(Errc::BadHeader, "bad scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw Error(Errc::BadHeader, "scale must be nonzero");

  const std::size_t offset = hdr.payload_offset();
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t need = count * 4;
  if (bytes.size() < offset + need) {
    throw Error(Errc::TruncatedPayload, "expected " + std::to_string(need) + " payload bytes, got " +
                                            std::to_string(bytes.size() - offset));
  }
  if (bytes.size() > offset + need) throw Error(Errc::BadHeader, "trailing bytes after payload");

  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  std::vector<float> values(count);
  for (int row = 0; row < h; ++row) {
    // File rows run bottom to top.
    const std::uint8_t* src = bytes.data() + offset + static_cast<std::size_t>(row) * w * 4;
    const std::size_t y = static_cast<std::size_t>(h - 1 - row);
    for (int x = 0; x < w; ++x) {
      std::uint32_t u = 0;
      std::memcpy(&u, src + static_cast<std::size_t>(x) * 4, 4);
      if (swap) u = __builtin_bswap32(u);
      values[y * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = std::bit_cast<float>(u);
    }
  }
  return Grid(w, h, std::move(values));
}

Bytes write_pfm(const Grid& grid) {
  const std::string header =
      "Pf\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n-1\n";
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + grid.size() * 4);
  for (int row = 0; row < grid.height(); ++row) {
    const int y = grid.height() - 1 - row;
    for (int x = 0; x < grid.width(); ++x) {
      const auto u = std::bit_cast<std::uint32_t>(grid.at(x, y));
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
  }
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "short write to '" + path.string() + "'");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace priorfill
