#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "qdepth/grid.hpp"
#include "qdepth/quadtree.hpp"

namespace qdepth {

/// Rigid transform from the target frame to the source frame: X' = R X + t.
struct Pose {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  std::array<double, 3> translation{0, 0, 0};

  static Pose identity() { return {}; }
};

/// Pinhole intrinsics (pixels) plus the relative pose to the source view.
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Pose pose;

  /// Throws ValueError unless fx, fy > 0 and the rotation is orthonormal with det +1.
  void validate() const;
};

struct LossConfig {
  double alpha = 0.85;   // SSIM weight inside pe
  double mu = 1.0;       // photometric term weight
  double lambda = 1e-3;  // smoothness term weight
  int level_count = 6;   // levels averaged, finest first
};

struct SsimResult {
  Grid<double> map;  // channel-averaged, in [-1, 1]
  double mean = 0.0;
};

/// SSIM with 3x3 box statistics (reflect padding), C1 = 0.01^2, C2 = 0.03^2.
SsimResult ssim(const Image& a, const Image& b);

/// Per-pixel alpha/2 (1 - SSIM) + (1 - alpha) L1, L1 averaged over channels.
Grid<double> photometric_error(const Image& a, const Image& b, double alpha);

struct WarpResult {
  Image image;
  Mask valid;
};

struct WarpCoords {
  Grid<double> u;  // source column of each target pixel
  Grid<double> v;  // source row
  Mask valid;
};

/// Where each target pixel lands in a source image of size src_h x src_w.
WarpCoords reprojection_coords(const DisparityGrid& disparity, const CameraModel& cam,
                               double baseline_scale, std::size_t src_h, std::size_t src_w);

/**
 * Inverse warp of `src` into the target frame using depth = baseline_scale / disparity.
 * Bilinear sampling; pixels landing outside `src` are invalid and zero-filled.
 */
WarpResult reproject(const Image& src, const DisparityGrid& disparity, const CameraModel& cam,
                     double baseline_scale);

struct ReprojectionLoss {
  Grid<double> map;  // 0 where no candidate is valid
  Mask valid;
  double mean = 0.0;  // over valid pixels
};

ReprojectionLoss min_reprojection(const Image& target, const std::vector<WarpResult>& candidates,
                                  double alpha);

/// Edge-aware smoothness of the mean-normalised disparity.
double smoothness(const DisparityGrid& disparity, const Image& image);

struct LevelLoss {
  int level = 0;
  double photometric = 0.0;
  double smoothness = 0.0;
  double weighted = 0.0;  // mu * photometric + lambda * smoothness
};

struct MultiscaleLoss {
  double total = 0.0;
  std::vector<LevelLoss> levels;
};

/**
 * Averages mu L_p + lambda L_s over levels 0 .. cfg.level_count - 1, each level composed
 * from the forest and upsampled to full resolution.
 */
MultiscaleLoss multiscale_loss(const QuadForest& forest, const Image& target,
                               const std::vector<std::pair<Image, CameraModel>>& sources,
                               const LossConfig& cfg, double baseline_scale);

}  // namespace qdepth
