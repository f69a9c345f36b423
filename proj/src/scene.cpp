#include "qdepth/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qdepth {

namespace {

struct Box {
  double x0, x1, top, bottom;  // fractions of width / height
};

constexpr std::array<Box, 3> kBoxes{{
    {0.09, 0.28, 0.36, 0.78},
    {0.47, 0.59, 0.31, 0.62},
    {0.75, 0.94, 0.47, 0.89},
}};

constexpr double kHorizon = 0.42;
constexpr double kSky = 0.5;
constexpr double kBottom = 84.0;

}  // namespace

DisparityGrid street_scene(std::size_t height, std::size_t width) {
  DisparityGrid d(height, width);
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);
  const double horizon = std::floor(kHorizon * h);
  // Disparity grows quadratically below the horizon, reaching about 84 px at the bottom
  // of a 640-wide frame. A straight ramp would give every ground cell the same child
  // spread, so the whole road would split at a single tau.
  const double bottom = kBottom * w / 640.0;
  auto ground = [&](double row) {
    if (row < horizon) return kSky;
    const double t = (row - horizon) / (h - horizon);
    return kSky + bottom * t * t;
  };
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      d(y, x) = static_cast<float>(ground(static_cast<double>(y)));

  // Farthest box first so nearer boxes occlude it.
  std::array<std::size_t, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [](std::size_t a, std::size_t b) { return kBoxes[a].bottom < kBoxes[b].bottom; });
  for (std::size_t i : order) {
    const Box& b = kBoxes[i];
    const auto x0 = static_cast<std::size_t>(std::floor(b.x0 * w));
    const auto x1 = static_cast<std::size_t>(std::floor(b.x1 * w));
    const auto y0 = static_cast<std::size_t>(std::floor(b.top * h));
    const auto y1 = static_cast<std::size_t>(std::floor(b.bottom * h));
    const auto value = static_cast<float>(ground(static_cast<double>(y1)));
    for (std::size_t y = y0; y < y1 && y < height; ++y)
      for (std::size_t x = x0; x < x1 && x < width; ++x) d(y, x) = value;
  }
  return d;
}

}  // namespace qdepth
