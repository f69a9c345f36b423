#pragma once

#include <cstddef>

#include "qdepth/grid.hpp"

namespace qdepth {

/**
 * Synthetic street-like disparity map: far sky above a horizon, a road whose disparity
 * grows quadratically towards the bottom row, and three fronto-parallel boxes standing
 * on it. Disparities are in pixels and float-representable.
 */
DisparityGrid street_scene(std::size_t height = 192, std::size_t width = 640);

}  // namespace qdepth
