#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qdepth/grid.hpp"
#include "qdepth/quadtree.hpp"

namespace qdepth {

/// Dense pixel count over node count.
double compression_ratio(const QuadForest& forest);

enum class NodeLabel : std::uint8_t { absent, leaf, inner };

NodeLabel node_label(const LevelSlice& slice, std::size_t y, std::size_t x);

struct StructureReport {
  double likelihood = 0.0;
  std::vector<double> per_level_match;  // indexed by level
  double compression_a = 0.0;
  double compression_b = 0.0;
};

/**
 * Agreement between the branching structures of two forests of identical geometry.
 *
 * Each cell is labelled absent, leaf or inner. At every level the match is the fraction
 * of cells present in either forest whose labels agree (1 when no cell is present). The
 * likelihood weights levels by that union count, so it equals the overall fraction of
 * agreeing cells among all cells present in either forest.
 */
StructureReport structure_likelihood(const QuadForest& a, const QuadForest& b);

/**
 * Percentage of full-resolution pixels whose composed value originates at each level
 * (indexed by level number). Sums to 100.
 */
std::vector<double> level_distribution(const QuadForest& forest);

/// Level each full-resolution pixel takes its value from.
Grid<std::uint8_t> origin_levels(const QuadForest& forest);

enum class EvalSpace { depth, disparity };

struct EvalOptions {
  EvalSpace space = EvalSpace::depth;
  /// Pixels whose reference depth exceeds this are excluded. Off by default.
  std::optional<double> max_depth;
};

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  std::size_t n_valid = 0;
};

/**
 * Abs Rel, Sq Rel and RMSE over `valid`, in depth space (depth = scale / disparity) unless
 * options select disparity space.
 */
DepthMetrics depth_metrics(const DisparityGrid& pred, const DisparityGrid& gt, const Mask& valid,
                           double scale, const EvalOptions& options = {});

/// scale / disparity per pixel; zero disparity maps to +inf.
DisparityGrid disparity_to_depth(const DisparityGrid& disparity, double scale);

}  // namespace qdepth
