#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qdepth/grid.hpp"
#include "qdepth/quadtree.hpp"
#include "qdepth/sparse_conv.hpp"

namespace qdepth {

struct SweepPoint {
  double tau = 0.0;
  double compression_ratio = 0.0;
  double rmse = 0.0;  // rasterised forest against the input, disparity units
};

std::vector<SweepPoint> tau_sweep(const DisparityGrid& disparity, const std::vector<double>& taus,
                                  const EncodeConfig& base);

struct TauSolution {
  double tau = 0.0;
  double compression_ratio = 0.0;
};

/**
 * Bisection for the tau whose compression ratio is closest to `target`. `ratio_at` must be
 * non-decreasing in tau. Stops once the relative ratio error is within `rel_tol`.
 */
TauSolution solve_tau(const std::function<double(double)>& ratio_at, double target,
                      double tau_max, double rel_tol = 0.01, int max_iter = 40);

TauSolution tau_for_ratio(const DisparityGrid& disparity, double target, const EncodeConfig& base,
                          double rel_tol = 0.01);

struct DemoConfig {
  std::uint64_t seed = 7;
  int levels = 6;
  std::size_t channels = 8;
  std::size_t base_h = 6;
  std::size_t base_w = 20;
};

struct DemoPoint {
  std::string label;
  double tau = 0.0;
  double compression_ratio = 0.0;
  FlopReport total;
};

/// Toy decoder run with seed features and weights derived from cfg.seed.
DecoderRun run_sparsity_demo(const DemoConfig& cfg, double tau);

/**
 * Decoder cost at the tau giving each target compression ratio, followed by the dense
 * (tau = 0) run.
 */
std::vector<DemoPoint> sparsity_operating_points(const DemoConfig& cfg,
                                                 const std::vector<double>& target_ratios,
                                                 double rel_tol = 0.02);

}  // namespace qdepth
