#include "qdepth/render.hpp"

#include <algorithm>
#include <cmath>

#include "qdepth/metrics.hpp"

namespace qdepth {

std::array<std::uint8_t, 3> level_color(int level) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette{{
      {255, 255, 255},  // 0, never drawn: one-pixel cells carry no border
      {0, 200, 255},
      {0, 220, 0},
      {255, 220, 0},
      {255, 128, 0},
      {230, 0, 0},
      {200, 0, 200},
      {0, 0, 255},
  }};
  return kPalette[static_cast<std::size_t>(level) % kPalette.size()];
}

Image render_quadtree(const QuadForest& forest) {
  const DisparityGrid disp = rasterize(forest);
  const Grid<std::uint8_t> origin = origin_levels(forest);
  const auto [lo, hi] = std::minmax_element(disp.data().begin(), disp.data().end());
  const double vmin = *lo;
  const double range = *hi - *lo;

  Image img(disp.height(), disp.width(), 3);
  for (std::size_t y = 0; y < disp.height(); ++y) {
    for (std::size_t x = 0; x < disp.width(); ++x) {
      const int level = origin(y, x);
      const std::size_t cell = std::size_t{1} << level;
      if (cell > 1 && (y % cell == 0 || x % cell == 0)) {
        const auto rgb = level_color(level);
        for (std::size_t c = 0; c < 3; ++c) img(y, x, c) = rgb[c] / 255.0;
        continue;
      }
      const long grey = range > 0.0 ? std::lround(32.0 + 191.0 * (disp(y, x) - vmin) / range) : 128;
      for (std::size_t c = 0; c < 3; ++c) img(y, x, c) = static_cast<double>(grey) / 255.0;
    }
  }
  return img;
}

}  // namespace qdepth
