#pragma once

#include <cstddef>
#include <vector>

#include "qdepth/grid.hpp"

namespace qdepth {

/// A single quadtree node: level (0 = leaves), cell coordinates within that level, value.
struct QuadNode {
  int level = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  float value = 0.0f;
};

/**
 * One level of a level-sliced quadtree forest.
 *
 * `present` marks cells that carry a value. `active` marks cells that were subdivided,
 * i.e. whose four children exist one level finer. Values at absent cells are +0.
 */
struct LevelSlice {
  int level = 0;
  Grid<float> values;
  Mask present;
  Mask active;

  LevelSlice() = default;
  LevelSlice(int lvl, std::size_t height, std::size_t width)
      : level(lvl), values(height, width), present(height, width), active(height, width) {}

  std::size_t height() const { return values.height(); }
  std::size_t width() const { return values.width(); }
  bool is_present(std::size_t y, std::size_t x) const { return present(y, x) != 0; }
  bool is_active(std::size_t y, std::size_t x) const { return active(y, x) != 0; }

  void set(std::size_t y, std::size_t x, float v) {
    values(y, x) = v;
    present(y, x) = 1;
  }
};

/**
 * Forest of quadtrees stored as one LevelSlice per level.
 *
 * Level `level_count() - 1` is the root grid of base_h x base_w cells and is always fully
 * present. Level 0 holds full-resolution leaves. A cell at level l has its four
 * children at level l - 1 in the 2x2 block starting at (2y, 2x).
 */
/// Deepest supported forest.
inline constexpr int kMaxLevels = 24;

class QuadForest {
 public:
  QuadForest() = default;
  /// Empty forest (no cell present) with the given geometry.
  QuadForest(int level_count, std::size_t base_h, std::size_t base_w);

  int level_count() const { return static_cast<int>(levels_.size()); }
  int root_level() const { return level_count() - 1; }
  std::size_t base_height() const { return base_h_; }
  std::size_t base_width() const { return base_w_; }
  std::size_t full_height() const { return level_height(0); }
  std::size_t full_width() const { return level_width(0); }
  std::size_t level_height(int level) const;
  std::size_t level_width(int level) const;

  const LevelSlice& slice(int level) const;
  LevelSlice& slice(int level);

  /// Throws InvariantError describing the first violated structural invariant.
  void validate() const;

  /// Present nodes, coarsest level first, row-major within a level.
  std::vector<QuadNode> nodes() const;

  bool same_geometry(const QuadForest& other) const {
    return level_count() == other.level_count() && base_h_ == other.base_h_ &&
           base_w_ == other.base_w_;
  }

  /// Bitwise equality of geometry, flags and value bit patterns.
  bool operator==(const QuadForest& other) const;

 private:
  std::size_t base_h_ = 0;
  std::size_t base_w_ = 0;
  std::vector<LevelSlice> levels_;  // indexed by level number, 0 = finest
};

struct EncodeConfig {
  /// Subdivision threshold in disparity units; a cell splits when its children spread > tau.
  double tau = 0.0;
  int level_count = 6;
  /// When false, a cell at level >= 2 is only split if at least one of its children would
  /// split as well, giving the smallest tree that still satisfies the criterion one level down.
  bool keep_children = true;
};

/**
 * Encodes a dense disparity grid into a forest.
 *
 * Candidate child values come from a 2x2 arithmetic-mean pyramid built in double precision
 * and stored as float; level-0 leaves carry the raw pixels. Inputs must have
 * dimensions divisible by 2^(level_count - 1).
 */
QuadForest encode_dense(const DisparityGrid& disparity, const EncodeConfig& cfg);

/// Dense grid at level-n resolution from the finest present ancestor-or-self of each cell.
DisparityGrid compose(const QuadForest& forest, int level);

/// compose(forest, 0).
DisparityGrid rasterize(const QuadForest& forest);

struct NodeCounts {
  std::vector<std::size_t> per_level;  // indexed by level number
  std::size_t total = 0;
};

NodeCounts node_count(const QuadForest& forest);

/// Nearest-neighbour upsampling by an integer factor.
DisparityGrid upsample_nearest(const DisparityGrid& grid, std::size_t factor);

/// Spread max - min of four values; the patch fires when the spread exceeds tau.
double patch_spread(double a, double b, double c, double d);

}  // namespace qdepth
