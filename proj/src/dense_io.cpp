#include "qdepth/dense_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qdepth/errors.hpp"

namespace qdepth {

namespace {

constexpr std::size_t kMaxDim = 1u << 16;

// Netpbm-style header token: skips whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (tok.empty()) throw FormatError("unexpected end of header");
  // The single whitespace byte after the last header token has been consumed.
  return tok;
}

std::size_t parse_dim(const std::string& tok) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    throw FormatError("bad dimension '" + tok + "'");
  }
  if (pos != tok.size() || v == 0 || v > kMaxDim) throw FormatError("bad dimension '" + tok + "'");
  return v;
}

void read_exact(std::istream& in, std::vector<std::uint8_t>& buf) {
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw FormatError("truncated raster");
}

DenseMap read_pfm(std::istream& in, bool colour) {
  DenseMap map;
  map.format = DenseFormat::pfm;
  map.channels = colour ? 3 : 1;
  map.width = parse_dim(next_token(in));
  map.height = parse_dim(next_token(in));
  const std::string scale_tok = next_token(in);
  double scale = 0.0;
  try {
    std::size_t pos = 0;
    scale = std::stod(scale_tok, &pos);
    if (pos != scale_tok.size()) throw FormatError("bad PFM scale");
  } catch (const std::invalid_argument&) {
    throw FormatError("bad PFM scale '" + scale_tok + "'");
  } catch (const std::out_of_range&) {
    throw FormatError("bad PFM scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError("PFM scale must be nonzero");
  const bool little = scale < 0.0;

  const std::size_t row = map.width * map.channels;
  std::vector<std::uint8_t> buf(map.height * row * 4);
  read_exact(in, buf);
  map.samples.resize(map.height * row);
  for (std::size_t r = 0; r < map.height; ++r) {
    // Stored bottom row first.
    const std::size_t dst = (map.height - 1 - r) * row;
    for (std::size_t i = 0; i < row; ++i) {
      const std::uint8_t* p = buf.data() + (r * row + i) * 4;
      const std::uint32_t bits =
          little ? (std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
                    std::uint32_t{p[3]} << 24)
                 : (std::uint32_t{p[3]} | std::uint32_t{p[2]} << 8 | std::uint32_t{p[1]} << 16 |
                    std::uint32_t{p[0]} << 24);
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw ValueError("PFM contains a non-finite sample");
      map.samples[dst + i] = v;
    }
  }
  return map;
}

DenseMap read_pnm(std::istream& in, bool colour) {
  DenseMap map;
  map.format = colour ? DenseFormat::ppm : DenseFormat::pgm;
  map.channels = colour ? 3 : 1;
  map.width = parse_dim(next_token(in));
  map.height = parse_dim(next_token(in));
  const std::string maxval_tok = next_token(in);
  if (maxval_tok == "65535" && !colour) {
    map.maxval = 65535;
  } else if (maxval_tok == "255") {
    map.maxval = 255;
  } else {
    throw FormatError("unsupported maxval " + maxval_tok);
  }
  const std::size_t bytes_per = map.maxval == 65535 ? 2 : 1;
  const std::size_t n = map.height * map.width * map.channels;
  std::vector<std::uint8_t> buf(n * bytes_per);
  read_exact(in, buf);
  map.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    map.samples[i] = bytes_per == 2 ? static_cast<double>(buf[2 * i] << 8 | buf[2 * i + 1])
                                    : static_cast<double>(buf[i]);
  }
  return map;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot create " + path);
  return f;
}

void put_f32_le(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char b[4] = {static_cast<char>(bits & 0xFF), static_cast<char>(bits >> 8 & 0xFF),
                     static_cast<char>(bits >> 16 & 0xFF), static_cast<char>(bits >> 24 & 0xFF)};
  out.write(b, 4);
}

}  // namespace

DenseMap read_dense(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2) throw FormatError("empty input");
  if (magic[0] != 'P') throw FormatError("unrecognised dense map format");
  switch (magic[1]) {
    case 'f': return read_pfm(in, false);
    case 'F': return read_pfm(in, true);
    case '5': return read_pnm(in, false);
    case '6': return read_pnm(in, true);
    default: throw FormatError("unrecognised dense map format");
  }
}

DenseMap read_dense(const std::string& path) {
  std::ifstream f = open_in(path);
  return read_dense(f);
}

DisparityGrid to_disparity(const DenseMap& map, std::optional<double> pgm_divisor) {
  if (map.channels != 1) throw ShapeError("disparity maps must have a single channel");
  double divisor = 1.0;
  if (map.format == DenseFormat::pgm) {
    divisor = pgm_divisor.value_or(map.maxval == 65535 ? 256.0 : 1.0);
    if (!(divisor > 0.0)) throw ValueError("PGM divisor must be positive");
  }
  DisparityGrid grid(map.height, map.width);
  for (std::size_t i = 0; i < map.samples.size(); ++i) {
    const double v = map.samples[i] / divisor;
    if (!std::isfinite(v) || v < 0.0) throw ValueError("disparity must be finite and >= 0");
    grid.data()[i] = v;
  }
  return grid;
}

Image to_image(const DenseMap& map) {
  Image img(map.height, map.width, map.channels);
  const double div = map.format == DenseFormat::pfm ? 1.0 : static_cast<double>(map.maxval);
  for (std::size_t i = 0; i < map.samples.size(); ++i) {
    const double v = map.samples[i] / div;
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValueError("image intensities must lie in [0, 1]");
    }
    img.data()[i] = v;
  }
  return img;
}

DisparityGrid read_disparity(const std::string& path, std::optional<double> pgm_divisor) {
  return to_disparity(read_dense(path), pgm_divisor);
}

Image read_image(const std::string& path) { return to_image(read_dense(path)); }

void write_pfm(const DisparityGrid& grid, std::ostream& out) {
  if (grid.empty()) throw ShapeError("cannot write an empty grid");
  out << "Pf\n" << grid.width() << ' ' << grid.height() << "\n-1.0\n";
  for (std::size_t r = grid.height(); r-- > 0;)
    for (std::size_t x = 0; x < grid.width(); ++x) {
      const double v = grid(r, x);
      if (!std::isfinite(v)) throw ValueError("cannot write a non-finite sample");
      put_f32_le(out, static_cast<float>(v));
    }
  if (!out) throw FormatError("failed to write PFM");
}

void write_pfm(const DisparityGrid& grid, const std::string& path) {
  std::ofstream f = open_out(path);
  write_pfm(grid, f);
}

void write_pfm(const Image& image, std::ostream& out) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("PFM holds 1 or 3 channels");
  }
  out << (image.channels() == 3 ? "PF\n" : "Pf\n") << image.width() << ' ' << image.height()
      << "\n-1.0\n";
  for (std::size_t r = image.height(); r-- > 0;)
    for (std::size_t x = 0; x < image.width(); ++x)
      for (std::size_t c = 0; c < image.channels(); ++c)
        put_f32_le(out, static_cast<float>(image(r, x, c)));
  if (!out) throw FormatError("failed to write PFM");
}

void write_ppm(const Image& image, std::ostream& out) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("PPM output holds 1 or 3 channels");
  }
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = image(y, x, image.channels() == 3 ? c : 0);
        const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
        out.put(static_cast<char>(q));
      }
    }
  }
  if (!out) throw FormatError("failed to write PPM");
}

void write_ppm(const Image& image, const std::string& path) {
  std::ofstream f = open_out(path);
  write_ppm(image, f);
}

}  // namespace qdepth
