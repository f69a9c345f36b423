#include "qdepth/codec.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include "qdepth/errors.hpp"

namespace qdepth {

namespace {

constexpr std::uint8_t kMagic[4] = {'Q', 'F', 'M', '1'};
constexpr std::size_t kHeaderSize = 20;
// Refuse headers describing more than 2^31 cells at level 0.
constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 31;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_bitmap(std::vector<std::uint8_t>& out, const Mask& m) {
  const std::size_t row_bytes = (m.width() + 7) / 8;
  for (std::size_t y = 0; y < m.height(); ++y) {
    const std::size_t base = out.size();
    out.resize(base + row_bytes, 0);
    for (std::size_t x = 0; x < m.width(); ++x)
      if (m(y, x)) out[base + x / 8] |= static_cast<std::uint8_t>(0x80u >> (x % 8));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  const std::uint8_t* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated QFM1 stream while reading ") + what);
    }
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Mask get_bitmap(Reader& r, std::size_t h, std::size_t w, const char* what) {
  const std::size_t row_bytes = (w + 7) / 8;
  const std::uint8_t* p = r.take(h * row_bytes, what);
  Mask m(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::uint8_t* row = p + y * row_bytes;
    for (std::size_t x = 0; x < w; ++x)
      m(y, x) = (row[x / 8] >> (7 - x % 8)) & 1u;
    if (w % 8 != 0) {
      const auto pad = static_cast<std::uint8_t>(0xFFu >> (w % 8));
      if (row[row_bytes - 1] & pad) throw FormatError(std::string(what) + " has nonzero padding");
    }
  }
  return m;
}

}  // namespace

bool is_qfm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, kMagic);
}

std::vector<std::uint8_t> write_forest(const QuadForest& forest) {
  forest.validate();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(forest.level_count()));
  put_u32(out, static_cast<std::uint32_t>(forest.base_height()));
  put_u32(out, static_cast<std::uint32_t>(forest.base_width()));
  out.push_back(kQfmValueFloat32);
  out.push_back(kQfmLittleEndian);
  out.push_back(0);
  out.push_back(0);
  for (int l = forest.root_level(); l >= 0; --l) {
    const LevelSlice& s = forest.slice(l);
    put_bitmap(out, s.present);
    put_bitmap(out, s.active);
    for (std::size_t y = 0; y < s.height(); ++y)
      for (std::size_t x = 0; x < s.width(); ++x)
        if (s.is_present(y, x)) put_u32(out, std::bit_cast<std::uint32_t>(s.values(y, x)));
  }
  return out;
}

void write_forest(const QuadForest& forest, std::ostream& out) {
  const std::vector<std::uint8_t> bytes = write_forest(forest);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed to write QFM1 stream");
}

QuadForest read_forest(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint8_t* hdr = r.take(kHeaderSize, "header");
  if (!std::equal(hdr, hdr + 4, kMagic)) throw FormatError("bad magic, expected QFM1");
  const std::uint32_t levels = get_u32(hdr + 4);
  const std::uint32_t base_h = get_u32(hdr + 8);
  const std::uint32_t base_w = get_u32(hdr + 12);
  if (hdr[16] != kQfmValueFloat32) throw FormatError("unsupported value encoding");
  if (hdr[17] != kQfmLittleEndian) throw FormatError("unsupported endianness tag");
  if (hdr[18] != 0 || hdr[19] != 0) throw FormatError("reserved header bytes must be zero");
  if (levels < 1 || levels > static_cast<std::uint32_t>(kMaxLevels)) throw FormatError("level count out of range");
  if (base_h == 0 || base_w == 0) throw FormatError("empty root grid");
  const std::uint64_t scale = std::uint64_t{1} << (levels - 1);
  if (static_cast<std::uint64_t>(base_h) * scale > kMaxCells ||
      static_cast<std::uint64_t>(base_w) * scale > kMaxCells ||
      static_cast<std::uint64_t>(base_h) * base_w * scale * scale > kMaxCells) {
    throw FormatError("forest dimensions too large");
  }

  QuadForest forest(static_cast<int>(levels), base_h, base_w);
  for (int l = forest.root_level(); l >= 0; --l) {
    LevelSlice& s = forest.slice(l);
    s.present = get_bitmap(r, s.height(), s.width(), "present bitmap");
    s.active = get_bitmap(r, s.height(), s.width(), "active bitmap");
    const auto flags = s.present.data();
    const auto n = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
    const std::uint8_t* p = r.take(4 * n, "values");
    for (std::size_t y = 0, i = 0; y < s.height(); ++y)
      for (std::size_t x = 0; x < s.width(); ++x)
        if (s.is_present(y, x)) s.values(y, x) = std::bit_cast<float>(get_u32(p + 4 * i++));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after QFM1 payload");
  forest.validate();
  return forest;
}

QuadForest read_forest(std::istream& in) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_forest(bytes);
}

}  // namespace qdepth
