#pragma once

// Generators and brute-force oracles shared by the test binaries. Oracles here never call
// the library routine they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qdepth/grid.hpp"
#include "qdepth/quadtree.hpp"
#include "qdepth/rng.hpp"
#include "qdepth/sparse_conv.hpp"

namespace qdepth::test {

/// Float-representable values uniform in [lo, hi).
inline DisparityGrid random_grid(std::size_t h, std::size_t w, Rng& rng, double lo = 0.0,
                                 double hi = 10.0) {
  DisparityGrid g(h, w);
  for (double& v : g.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return g;
}

inline Image random_image(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
  Image img(h, w, c);
  for (double& v : img.data()) v = rng.unit();
  return img;
}

/// Random structurally valid forest; each present non-leaf cell splits with probability p.
inline QuadForest random_forest(Rng& rng, int levels, std::size_t base_h, std::size_t base_w,
                                double p_split) {
  QuadForest f(levels, base_h, base_w);
  LevelSlice& root = f.slice(levels - 1);
  for (std::size_t y = 0; y < root.height(); ++y)
    for (std::size_t x = 0; x < root.width(); ++x)
      root.set(y, x, static_cast<float>(rng.uniform(0.0, 100.0)));
  for (int l = levels - 1; l >= 1; --l) {
    LevelSlice& s = f.slice(l);
    LevelSlice& c = f.slice(l - 1);
    for (std::size_t y = 0; y < s.height(); ++y)
      for (std::size_t x = 0; x < s.width(); ++x) {
        if (!s.is_present(y, x) || !rng.bernoulli(p_split)) continue;
        s.active(y, x) = 1;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx)
            c.set(2 * y + dy, 2 * x + dx, static_cast<float>(rng.uniform(0.0, 100.0)));
      }
  }
  return f;
}

/// Mean of the (size x size) pixel block whose top-left pixel is (y0, x0), summed directly.
inline double block_mean(const DisparityGrid& d, std::size_t y0, std::size_t x0, std::size_t size) {
  double s = 0.0;
  for (std::size_t y = y0; y < y0 + size; ++y)
    for (std::size_t x = x0; x < x0 + size; ++x) s += d(y, x);
  return s / static_cast<double>(size * size);
}

/**
 * Top-down subdivision oracle on raw pixels: counts the nodes per level of the tree cut
 * where a cell splits iff its four child block means spread by more than tau.
 */
inline void oracle_subdivide(const DisparityGrid& d, int level, std::size_t y, std::size_t x,
                             double tau, std::vector<std::size_t>& counts) {
  ++counts[static_cast<std::size_t>(level)];
  if (level == 0) return;
  const std::size_t half = std::size_t{1} << (level - 1);
  const std::size_t py = y << level;
  const std::size_t px = x << level;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t dy = 0; dy < 2; ++dy)
    for (std::size_t dx = 0; dx < 2; ++dx) {
      // Block means rounded to float, as a forest stores them.
      const double m = static_cast<float>(block_mean(d, py + dy * half, px + dx * half, half));
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  if (hi - lo > tau)
    for (std::size_t dy = 0; dy < 2; ++dy)
      for (std::size_t dx = 0; dx < 2; ++dx)
        oracle_subdivide(d, level - 1, 2 * y + dy, 2 * x + dx, tau, counts);
}

inline std::vector<std::size_t> oracle_counts(const DisparityGrid& d, int levels, double tau) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(levels), 0);
  const std::size_t block = std::size_t{1} << (levels - 1);
  for (std::size_t y = 0; y < d.height() / block; ++y)
    for (std::size_t x = 0; x < d.width() / block; ++x)
      oracle_subdivide(d, levels - 1, y, x, tau, counts);
  return counts;
}

/// Per-pixel finest present covering cell, found by walking up from level 0.
inline int oracle_origin(const QuadForest& f, std::size_t y, std::size_t x) {
  for (int l = 0; l < f.level_count(); ++l)
    if (f.slice(l).is_present(y >> l, x >> l)) return l;
  return -1;
}

/// Dense zero-padded convolution of the input with inactive sites zeroed.
inline std::vector<double> dense_conv_oracle(const FeatureGrid& x, const Kernel& k) {
  const auto h = static_cast<std::ptrdiff_t>(x.height());
  const auto w = static_cast<std::ptrdiff_t>(x.width());
  const auto r = static_cast<std::ptrdiff_t>(k.k / 2);
  std::vector<double> out(x.height() * x.width() * k.out_channels, 0.0);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t xx = 0; xx < w; ++xx)
      for (std::size_t co = 0; co < k.out_channels; ++co) {
        double s = k.bias[co];
        for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
          for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
            const std::ptrdiff_t sy = y + dy;
            const std::ptrdiff_t sx = xx + dx;
            if (sy < 0 || sx < 0 || sy >= h || sx >= w) continue;
            const auto uy = static_cast<std::size_t>(sy);
            const auto ux = static_cast<std::size_t>(sx);
            for (std::size_t ci = 0; ci < k.in_channels; ++ci) {
              const double v = x.is_active(uy, ux) ? x.at(uy, ux, ci) : 0.0;
              s += k.weight(static_cast<std::size_t>(dy + r), static_cast<std::size_t>(dx + r), ci,
                            co) *
                   v;
            }
          }
        out[(static_cast<std::size_t>(y) * x.width() + static_cast<std::size_t>(xx)) *
                k.out_channels +
            co] = s;
      }
  return out;
}

/// Counts active (output, input) site pairs by enumeration.
inline std::uint64_t mac_oracle(const FeatureGrid& x, const Kernel& k) {
  std::uint64_t pairs = 0;
  const auto r = static_cast<std::ptrdiff_t>(k.k / 2);
  for (std::size_t y = 0; y < x.height(); ++y)
    for (std::size_t xx = 0; xx < x.width(); ++xx) {
      if (!x.is_active(y, xx)) continue;
      for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xx) + dx;
          if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(x.height()) ||
              sx >= static_cast<std::ptrdiff_t>(x.width()))
            continue;
          if (x.is_active(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx))) ++pairs;
        }
    }
  return pairs * k.in_channels * k.out_channels;
}

inline FeatureGrid random_features(std::size_t h, std::size_t w, std::size_t c, double activity,
                                   Rng& rng) {
  FeatureGrid g(h, w, c);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (!rng.bernoulli(activity)) continue;
      g.set_active(y, x, true);
      for (std::size_t ch = 0; ch < c; ++ch) g.at(y, x, ch) = rng.uniform(-1.0, 1.0);
    }
  return g;
}

inline Kernel random_kernel(std::size_t k, std::size_t in, std::size_t out, Rng& rng) {
  Kernel kern(k, in, out);
  for (double& w : kern.weights) w = rng.uniform(-1.0, 1.0);
  for (double& b : kern.bias) b = rng.uniform(-1.0, 1.0);
  return kern;
}

/// Hot-pixel example map: 64x64 of 1.0 with a single 10.0.
inline DisparityGrid hot_pixel_map(std::size_t y = 37, std::size_t x = 21) {
  DisparityGrid d(64, 64, 1.0);
  d(y, x) = 10.0;
  return d;
}

/// Every level present and every non-leaf cell active.
inline QuadForest fully_refined(Rng& rng, int levels, std::size_t base_h, std::size_t base_w) {
  return random_forest(rng, levels, base_h, base_w, 1.0);
}

inline double rmse(const DisparityGrid& a, const DisparityGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a.data()[i] - b.data()[i]) * (a.data()[i] - b.data()[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace qdepth::test
