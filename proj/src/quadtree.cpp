#include "qdepth/quadtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "qdepth/errors.hpp"

namespace qdepth {

namespace {

std::string cell_name(int level, std::size_t y, std::size_t x) {
  return "level " + std::to_string(level) + " cell (" + std::to_string(y) + ", " +
         std::to_string(x) + ")";
}

bool valid_value(float v) { return std::isfinite(v) && !std::signbit(v); }

}  // namespace

QuadForest::QuadForest(int level_count, std::size_t base_h, std::size_t base_w)
    : base_h_(base_h), base_w_(base_w) {
  if (level_count < 1 || level_count > kMaxLevels) {
    throw LevelError("level count must be in [1, " + std::to_string(kMaxLevels) + "], got " +
                     std::to_string(level_count));
  }
  if (base_h == 0 || base_w == 0) {
    throw DimensionError("root grid must be non-empty");
  }
  levels_.reserve(static_cast<std::size_t>(level_count));
  for (int l = 0; l < level_count; ++l) {
    const std::size_t scale = std::size_t{1} << (level_count - 1 - l);
    levels_.emplace_back(l, base_h * scale, base_w * scale);
  }
}

std::size_t QuadForest::level_height(int level) const { return slice(level).height(); }
std::size_t QuadForest::level_width(int level) const { return slice(level).width(); }

const LevelSlice& QuadForest::slice(int level) const {
  if (level < 0 || level >= level_count()) {
    throw LevelError("level " + std::to_string(level) + " out of range [0, " +
                     std::to_string(level_count() - 1) + "]");
  }
  return levels_[static_cast<std::size_t>(level)];
}

LevelSlice& QuadForest::slice(int level) {
  return const_cast<LevelSlice&>(std::as_const(*this).slice(level));
}

void QuadForest::validate() const {
  if (levels_.empty()) throw InvariantError("forest has no levels");
  const int L = level_count();
  for (int l = 0; l < L; ++l) {
    const LevelSlice& s = levels_[static_cast<std::size_t>(l)];
    const std::size_t scale = std::size_t{1} << (L - 1 - l);
    if (s.level != l) throw InvariantError("slice tagged with wrong level " + std::to_string(s.level));
    if (s.values.height() != base_h_ * scale || s.values.width() != base_w_ * scale ||
        s.present.height() != s.height() || s.present.width() != s.width() ||
        s.active.height() != s.height() || s.active.width() != s.width()) {
      throw InvariantError("level " + std::to_string(l) + " has wrong dimensions");
    }
    for (std::size_t y = 0; y < s.height(); ++y) {
      for (std::size_t x = 0; x < s.width(); ++x) {
        const std::uint8_t p = s.present(y, x);
        const std::uint8_t a = s.active(y, x);
        if (p > 1 || a > 1) throw InvariantError(cell_name(l, y, x) + " has non-binary flags");
        if (a && !p) throw InvariantError(cell_name(l, y, x) + " is active but not present");
        if (a && l == 0) throw InvariantError(cell_name(l, y, x) + " is an active leaf");
        if (l == L - 1 && !p) throw InvariantError(cell_name(l, y, x) + " is a missing root");
        const float v = s.values(y, x);
        if (p && !valid_value(v)) {
          throw InvariantError(cell_name(l, y, x) + " holds a negative or non-finite value");
        }
        if (!p && std::bit_cast<std::uint32_t>(v) != 0u) {
          throw InvariantError(cell_name(l, y, x) + " is absent but holds a value");
        }
        if (l > 0) {
          const LevelSlice& child = levels_[static_cast<std::size_t>(l - 1)];
          const int n = child.present(2 * y, 2 * x) + child.present(2 * y, 2 * x + 1) +
                        child.present(2 * y + 1, 2 * x) + child.present(2 * y + 1, 2 * x + 1);
          if (a && n != 4) {
            throw InvariantError(cell_name(l, y, x) + " is active without four children");
          }
          if (!a && n != 0) {
            throw InvariantError(cell_name(l, y, x) + " is inactive but has children");
          }
        }
      }
    }
  }
}

std::vector<QuadNode> QuadForest::nodes() const {
  std::vector<QuadNode> out;
  for (int l = root_level(); l >= 0; --l) {
    const LevelSlice& s = slice(l);
    for (std::size_t y = 0; y < s.height(); ++y)
      for (std::size_t x = 0; x < s.width(); ++x)
        if (s.is_present(y, x)) out.push_back({l, x, y, s.values(y, x)});
  }
  return out;
}

bool QuadForest::operator==(const QuadForest& other) const {
  if (!same_geometry(other)) return false;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const LevelSlice& a = levels_[l];
    const LevelSlice& b = other.levels_[l];
    if (a.present != b.present || a.active != b.active) return false;
    const auto va = a.values.data();
    const auto vb = b.values.data();
    for (std::size_t i = 0; i < va.size(); ++i)
      if (std::bit_cast<std::uint32_t>(va[i]) != std::bit_cast<std::uint32_t>(vb[i])) return false;
  }
  return true;
}

double patch_spread(double a, double b, double c, double d) {
  return std::max({a, b, c, d}) - std::min({a, b, c, d});
}

namespace {

DisparityGrid mean_pool2(const DisparityGrid& g) {
  DisparityGrid out(g.height() / 2, g.width() / 2);
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x)
      out(y, x) = 0.25 * (g(2 * y, 2 * x) + g(2 * y, 2 * x + 1) + g(2 * y + 1, 2 * x) +
                          g(2 * y + 1, 2 * x + 1));
  return out;
}

Grid<float> to_float(const DisparityGrid& g) {
  Grid<float> out(g.height(), g.width());
  for (std::size_t i = 0; i < g.size(); ++i) out.data()[i] = static_cast<float>(g.data()[i]);
  return out;
}

double child_spread(const Grid<float>& child, std::size_t y, std::size_t x) {
  return patch_spread(child(2 * y, 2 * x), child(2 * y, 2 * x + 1), child(2 * y + 1, 2 * x),
                      child(2 * y + 1, 2 * x + 1));
}

}  // namespace

QuadForest encode_dense(const DisparityGrid& disparity, const EncodeConfig& cfg) {
  if (cfg.level_count < 2 || cfg.level_count > kMaxLevels) {
    throw LevelError("level_count must be in [2, " + std::to_string(kMaxLevels) + "]");
  }
  if (!(cfg.tau >= 0.0)) throw ValueError("tau must be >= 0");
  const int L = cfg.level_count;
  const std::size_t block = std::size_t{1} << (L - 1);
  if (disparity.empty() || disparity.height() % block != 0 || disparity.width() % block != 0) {
    throw DimensionError("grid " + std::to_string(disparity.height()) + "x" +
                         std::to_string(disparity.width()) + " is not divisible by " +
                         std::to_string(block));
  }
  for (double v : disparity.data()) {
    if (!std::isfinite(v) || v < 0.0) throw ValueError("disparity must be finite and >= 0");
  }

  // Candidate values for every level, float as stored in the forest.
  std::vector<Grid<float>> candidates;
  candidates.reserve(static_cast<std::size_t>(L));
  DisparityGrid current = disparity;
  candidates.push_back(to_float(current));
  for (int l = 1; l < L; ++l) {
    current = mean_pool2(current);
    candidates.push_back(to_float(current));
  }

  QuadForest forest(L, disparity.height() / block, disparity.width() / block);
  LevelSlice& root = forest.slice(L - 1);
  for (std::size_t y = 0; y < root.height(); ++y)
    for (std::size_t x = 0; x < root.width(); ++x) root.set(y, x, candidates.back()(y, x));

  for (int l = L - 1; l >= 1; --l) {
    LevelSlice& parent = forest.slice(l);
    LevelSlice& child = forest.slice(l - 1);
    const Grid<float>& child_values = candidates[static_cast<std::size_t>(l - 1)];
    for (std::size_t y = 0; y < parent.height(); ++y) {
      for (std::size_t x = 0; x < parent.width(); ++x) {
        if (!parent.is_present(y, x)) continue;
        bool split = child_spread(child_values, y, x) > cfg.tau;
        if (split && !cfg.keep_children && l >= 2) {
          const Grid<float>& grand = candidates[static_cast<std::size_t>(l - 2)];
          split = false;
          for (std::size_t dy = 0; dy < 2 && !split; ++dy)
            for (std::size_t dx = 0; dx < 2 && !split; ++dx)
              split = child_spread(grand, 2 * y + dy, 2 * x + dx) > cfg.tau;
        }
        if (!split) continue;
        parent.active(y, x) = 1;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx)
            child.set(2 * y + dy, 2 * x + dx, child_values(2 * y + dy, 2 * x + dx));
      }
    }
  }
  return forest;
}

DisparityGrid compose(const QuadForest& forest, int level) {
  if (level < 0 || level >= forest.level_count()) {
    throw LevelError("compose level " + std::to_string(level) + " out of range [0, " +
                     std::to_string(forest.level_count() - 1) + "]");
  }
  DisparityGrid out(forest.level_height(level), forest.level_width(level));
  // Coarse to fine: a present cell overwrites the block inherited from its ancestors.
  for (int l = forest.root_level(); l >= level; --l) {
    const LevelSlice& s = forest.slice(l);
    const std::size_t f = std::size_t{1} << (l - level);
    for (std::size_t y = 0; y < s.height(); ++y) {
      for (std::size_t x = 0; x < s.width(); ++x) {
        if (!s.is_present(y, x)) continue;
        const double v = s.values(y, x);
        for (std::size_t yy = y * f; yy < (y + 1) * f; ++yy)
          for (std::size_t xx = x * f; xx < (x + 1) * f; ++xx) out(yy, xx) = v;
      }
    }
  }
  return out;
}

DisparityGrid rasterize(const QuadForest& forest) { return compose(forest, 0); }

NodeCounts node_count(const QuadForest& forest) {
  NodeCounts counts;
  counts.per_level.assign(static_cast<std::size_t>(forest.level_count()), 0);
  for (int l = 0; l < forest.level_count(); ++l) {
    const auto present = forest.slice(l).present.data();
    const auto n = static_cast<std::size_t>(std::count(present.begin(), present.end(), 1));
    counts.per_level[static_cast<std::size_t>(l)] = n;
    counts.total += n;
  }
  return counts;
}

DisparityGrid upsample_nearest(const DisparityGrid& grid, std::size_t factor) {
  if (factor == 0) throw ValueError("upsampling factor must be positive");
  DisparityGrid out(grid.height() * factor, grid.width() * factor);
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x) out(y, x) = grid(y / factor, x / factor);
  return out;
}

}  // namespace qdepth
