#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "qdepth/codec.hpp"
#include "qdepth/errors.hpp"
#include "support.hpp"

using namespace qdepth;

namespace {

using Bytes = std::vector<std::uint8_t>;

void append_f32(Bytes& b, float v) {
  std::uint32_t u = 0;
  std::memcpy(&u, &v, 4);
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

// Two-level forest with a 1x1 root split into four children, written out by hand.
Bytes tiny_stream() {
  Bytes b = {'Q', 'F', 'M', '1', 2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
  b.push_back(0x80);  // root present
  b.push_back(0x80);  // root active
  append_f32(b, 2.5f);
  b.push_back(0xC0);  // children present, row 0
  b.push_back(0xC0);  // row 1
  b.push_back(0x00);  // children inactive
  b.push_back(0x00);
  for (float v : {1.0f, 2.0f, 3.0f, 4.0f}) append_f32(b, v);
  return b;
}

QuadForest tiny_forest() {
  QuadForest f(2, 1, 1);
  f.slice(1).set(0, 0, 2.5f);
  f.slice(1).active(0, 0) = 1;
  f.slice(0).set(0, 0, 1.0f);
  f.slice(0).set(0, 1, 2.0f);
  f.slice(0).set(1, 0, 3.0f);
  f.slice(0).set(1, 1, 4.0f);
  return f;
}

}  // namespace

TEST_CASE("canonical byte layout") {
  const Bytes bytes = write_forest(tiny_forest());
  CHECK(bytes == tiny_stream());
  CHECK(read_forest(tiny_stream()) == tiny_forest());
  CHECK(is_qfm(bytes));
  CHECK_FALSE(is_qfm(Bytes{'Q', 'F', 'M'}));
  CHECK(bytes.size() == 20 + 2 + 4 + 4 + 16);
}

TEST_CASE("bitmap packing past one byte") {
  QuadForest f(1, 2, 9);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 9; ++x) f.slice(0).set(y, x, static_cast<float>(x + 10 * y));
  const Bytes b = write_forest(f);
  // Each 9-wide row takes two bytes: 0xFF then 0x80.
  CHECK(b[20] == 0xFF);
  CHECK(b[21] == 0x80);
  CHECK(b[22] == 0xFF);
  CHECK(b[23] == 0x80);
  CHECK(b.size() == 20 + 4 + 4 + 18 * 4);
  CHECK(read_forest(b) == f);
}

TEST_CASE("random roundtrip is bit exact") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const int levels = 1 + static_cast<int>(rng.below(6));
    const std::size_t bh = 1 + rng.below(4);
    const std::size_t bw = 1 + rng.below(4);
    const QuadForest f = test::random_forest(rng, levels, bh, bw, rng.unit());
    const Bytes b = write_forest(f);
    const QuadForest g = read_forest(b);
    REQUIRE(g == f);
    REQUIRE(write_forest(g) == b);
  }
}

TEST_CASE("stream interface") {
  std::stringstream ss;
  write_forest(tiny_forest(), ss);
  CHECK(read_forest(ss) == tiny_forest());
}

TEST_CASE("malformed streams are rejected") {
  const Bytes good = tiny_stream();
  SUBCASE("every truncation") {
    for (std::size_t n = 0; n < good.size(); ++n)
      CHECK_THROWS_AS(read_forest(std::span(good.data(), n)), FormatError);
  }
  SUBCASE("trailing bytes") {
    Bytes b = good;
    b.push_back(0);
    CHECK_THROWS_AS(read_forest(b), FormatError);
  }
  SUBCASE("header fields") {
    auto with = [&](std::size_t at, std::uint8_t v) {
      Bytes b = good;
      b[at] = v;
      return b;
    };
    CHECK_THROWS_AS(read_forest(with(0, 'X')), FormatError);
    CHECK_THROWS_AS(read_forest(with(3, '2')), FormatError);
    CHECK_THROWS_AS(read_forest(with(4, 0)), FormatError);    // zero levels
    CHECK_THROWS_AS(read_forest(with(4, 99)), FormatError);   // too many levels
    CHECK_THROWS_AS(read_forest(with(8, 0)), FormatError);    // empty root grid
    CHECK_THROWS_AS(read_forest(with(16, 2)), FormatError);   // value encoding
    CHECK_THROWS_AS(read_forest(with(17, 1)), FormatError);   // big-endian tag
    CHECK_THROWS_AS(read_forest(with(18, 1)), FormatError);   // reserved
    CHECK_THROWS_AS(read_forest(with(19, 1)), FormatError);
  }
  SUBCASE("oversize dimensions fail before allocation") {
    Bytes b = good;
    b[4] = 20;
    b[8] = 0xFF;
    b[9] = 0xFF;
    b[12] = 0xFF;
    b[13] = 0xFF;
    CHECK_THROWS_AS(read_forest(b), FormatError);
  }
  SUBCASE("nonzero bitmap padding") {
    Bytes b = good;
    b[20] = 0x81;
    CHECK_THROWS_AS(read_forest(b), FormatError);
  }
  SUBCASE("structural violations") {
    Bytes b = good;
    b[26] = 0x80;  // child row 0 loses a cell while the root stays active
    b.resize(b.size() - 4);
    CHECK_THROWS_AS(read_forest(b), InvariantError);

    Bytes leaf_active = good;
    leaf_active[28] = 0x80;  // an active leaf
    CHECK_THROWS_AS(read_forest(leaf_active), InvariantError);

    Bytes neg = good;
    neg[25] = 0xC0;  // root value becomes -2.5
    CHECK_THROWS_AS(read_forest(neg), InvariantError);

    Bytes nan = good;
    nan[22] = 0x00;
    nan[23] = 0x00;
    nan[24] = 0xC0;
    nan[25] = 0x7F;
    CHECK_THROWS_AS(read_forest(nan), InvariantError);
  }
  SUBCASE("writer refuses broken forests") {
    QuadForest f = tiny_forest();
    f.slice(0).present(1, 1) = 0;
    f.slice(0).values(1, 1) = 0.0f;
    CHECK_THROWS_AS(write_forest(f), InvariantError);
  }
}
