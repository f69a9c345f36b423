#include "qdepth/metrics.hpp"

#include <cmath>
#include <limits>

#include "qdepth/errors.hpp"

namespace qdepth {

double compression_ratio(const QuadForest& forest) {
  const NodeCounts counts = node_count(forest);
  return static_cast<double>(forest.full_height() * forest.full_width()) /
         static_cast<double>(counts.total);
}

NodeLabel node_label(const LevelSlice& slice, std::size_t y, std::size_t x) {
  if (!slice.is_present(y, x)) return NodeLabel::absent;
  return slice.is_active(y, x) ? NodeLabel::inner : NodeLabel::leaf;
}

StructureReport structure_likelihood(const QuadForest& a, const QuadForest& b) {
  if (!a.same_geometry(b)) throw ShapeError("forests differ in level count or root grid");
  StructureReport rep;
  rep.per_level_match.assign(static_cast<std::size_t>(a.level_count()), 1.0);
  std::size_t matched_total = 0;
  std::size_t union_total = 0;
  for (int l = 0; l < a.level_count(); ++l) {
    const LevelSlice& sa = a.slice(l);
    const LevelSlice& sb = b.slice(l);
    std::size_t matched = 0;
    std::size_t in_union = 0;
    for (std::size_t y = 0; y < sa.height(); ++y) {
      for (std::size_t x = 0; x < sa.width(); ++x) {
        if (!sa.is_present(y, x) && !sb.is_present(y, x)) continue;
        ++in_union;
        if (node_label(sa, y, x) == node_label(sb, y, x)) ++matched;
      }
    }
    if (in_union > 0) {
      rep.per_level_match[static_cast<std::size_t>(l)] =
          static_cast<double>(matched) / static_cast<double>(in_union);
    }
    matched_total += matched;
    union_total += in_union;
  }
  // The root level is always present, so the union is never empty for valid forests.
  rep.likelihood = union_total == 0 ? 1.0
                                    : static_cast<double>(matched_total) /
                                          static_cast<double>(union_total);
  rep.compression_a = compression_ratio(a);
  rep.compression_b = compression_ratio(b);
  return rep;
}

Grid<std::uint8_t> origin_levels(const QuadForest& forest) {
  Grid<std::uint8_t> origin(forest.full_height(), forest.full_width());
  for (int l = forest.root_level(); l >= 0; --l) {
    const LevelSlice& s = forest.slice(l);
    const std::size_t f = std::size_t{1} << l;
    for (std::size_t y = 0; y < s.height(); ++y)
      for (std::size_t x = 0; x < s.width(); ++x)
        if (s.is_present(y, x))
          for (std::size_t yy = y * f; yy < (y + 1) * f; ++yy)
            for (std::size_t xx = x * f; xx < (x + 1) * f; ++xx)
              origin(yy, xx) = static_cast<std::uint8_t>(l);
  }
  return origin;
}

std::vector<double> level_distribution(const QuadForest& forest) {
  const Grid<std::uint8_t> origin = origin_levels(forest);
  std::vector<std::size_t> counts(static_cast<std::size_t>(forest.level_count()), 0);
  for (std::uint8_t l : origin.data()) ++counts[l];
  std::vector<double> pct(counts.size());
  const auto n = static_cast<double>(origin.size());
  for (std::size_t l = 0; l < counts.size(); ++l)
    pct[l] = 100.0 * static_cast<double>(counts[l]) / n;
  return pct;
}

DisparityGrid disparity_to_depth(const DisparityGrid& disparity, double scale) {
  if (!(scale > 0.0)) throw ValueError("scale must be positive");
  DisparityGrid depth(disparity.height(), disparity.width());
  for (std::size_t i = 0; i < disparity.size(); ++i) {
    const double d = disparity.data()[i];
    depth.data()[i] = d > 0.0 ? scale / d : std::numeric_limits<double>::infinity();
  }
  return depth;
}

DepthMetrics depth_metrics(const DisparityGrid& pred, const DisparityGrid& gt, const Mask& valid,
                           double scale, const EvalOptions& options) {
  if (!pred.same_shape(gt) || valid.height() != gt.height() || valid.width() != gt.width()) {
    throw ShapeError("prediction, reference and mask differ in size");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValueError("scale must be positive");
  const bool in_depth = options.space == EvalSpace::depth;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!valid.data()[i]) continue;
    const double gd = gt.data()[i];
    const double pd = pred.data()[i];
    if (!(gd > 0.0) || !std::isfinite(gd)) {
      throw ValueError("reference disparity must be positive inside the mask");
    }
    if (!(pd > 0.0) || !std::isfinite(pd)) {
      throw ValueError("predicted disparity must be positive inside the mask");
    }
    const double g = in_depth ? scale / gd : gd;
    const double p = in_depth ? scale / pd : pd;
    if (options.max_depth && scale / gd > *options.max_depth) continue;
    const double e = g - p;
    abs_rel += std::abs(e) / g;
    sq_rel += e * e / g;
    sq += e * e;
    ++n;
  }
  if (n == 0) throw EmptyError("no valid pixel to evaluate");
  const auto dn = static_cast<double>(n);
  return DepthMetrics{abs_rel / dn, sq_rel / dn, std::sqrt(sq / dn), n};
}

}  // namespace qdepth
