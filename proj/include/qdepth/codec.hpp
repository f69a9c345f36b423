#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qdepth/quadtree.hpp"

namespace qdepth {

/*
 * QFM1 forest container. All multi-byte integers are little-endian.
 *
 *   offset  size  field
 *   0       4     magic "QFM1"
 *   4       4     level_count (u32)
 *   8       4     base_h (u32)
 *   12      4     base_w (u32)
 *   16      1     value encoding, 1 = IEEE-754 binary32
 *   17      1     endianness, 0 = little
 *   18      2     reserved, zero
 *
 * Then one block per level, coarsest (root) level first:
 *   present bitmap  rows of ceil(w / 8) bytes, MSB = leftmost cell, zero padded
 *   active bitmap   same packing
 *   values          one binary32 per present cell, row-major
 */
inline constexpr std::uint8_t kQfmValueFloat32 = 1;
inline constexpr std::uint8_t kQfmLittleEndian = 0;

std::vector<std::uint8_t> write_forest(const QuadForest& forest);
void write_forest(const QuadForest& forest, std::ostream& out);

/// Parses and validates; throws FormatError or InvariantError and never returns a partial forest.
QuadForest read_forest(std::span<const std::uint8_t> bytes);
QuadForest read_forest(std::istream& in);

/// True when the buffer starts with the QFM1 magic.
bool is_qfm(std::span<const std::uint8_t> bytes);

}  // namespace qdepth
