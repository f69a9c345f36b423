#pragma once

#include <array>
#include <cstdint>

#include "qdepth/grid.hpp"
#include "qdepth/quadtree.hpp"

namespace qdepth {

/// Border colour of cells whose value originates at `level`.
std::array<std::uint8_t, 3> level_color(int level);

/**
 * Grey disparity shading of the rasterised forest with 1px cell borders on the top and
 * left edge of every leaf larger than one pixel, coloured by the leaf's level.
 * Returns an RGB image whose samples are k / 255.
 */
Image render_quadtree(const QuadForest& forest);

}  // namespace qdepth
