#include "qdepth/photometric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdepth/errors.hpp"

namespace qdepth {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
// Sampling positions this close to a pixel centre snap onto it.
constexpr double kSnap = 1e-9;

void check_image(const Image& img, const char* name) {
  if (img.height() == 0 || img.width() == 0 || img.channels() == 0) {
    throw ShapeError(std::string(name) + " image is empty");
  }
  for (double v : img.data()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValueError(std::string(name) + " image intensities must lie in [0, 1]");
    }
  }
}

void check_same(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("images differ in shape");
}

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  if (i < 0) return static_cast<std::size_t>(-i);
  if (i >= static_cast<std::ptrdiff_t>(n)) return 2 * n - 2 - static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i);
}

// 3x3 box mean with reflect padding of a per-pixel quantity f(y, x).
template <typename F>
Grid<double> box3(std::size_t h, std::size_t w, F f) {
  Grid<double> out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx)
          s += f(reflect(static_cast<std::ptrdiff_t>(y) + dy, h),
                 reflect(static_cast<std::ptrdiff_t>(x) + dx, w));
      out(y, x) = s / 9.0;
    }
  }
  return out;
}

double snap(double c) {
  const double r = std::round(c);
  return std::abs(c - r) < kSnap ? r : c;
}

double sample_bilinear(const Image& img, double u, double v, std::size_t c) {
  const auto x0 = static_cast<std::size_t>(std::floor(u));
  const auto y0 = static_cast<std::size_t>(std::floor(v));
  const double fx = u - static_cast<double>(x0);
  const double fy = v - static_cast<double>(y0);
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  if (fx == 0.0 && fy == 0.0) return img(y0, x0, c);
  const double top = (1.0 - fx) * img(y0, x0, c) + fx * img(y0, x1, c);
  const double bottom = (1.0 - fx) * img(y1, x0, c) + fx * img(y1, x1, c);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValueError("focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw ValueError("principal point must be finite");
  const auto& r = pose.rotation;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[i * 3 + k] * r[j * 3 + k];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-9) {
        throw ValueError("rotation is not orthonormal");
      }
    }
  }
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  if (std::abs(det - 1.0) > 1e-9) throw ValueError("rotation determinant must be +1");
  for (double t : pose.translation)
    if (!std::isfinite(t)) throw ValueError("translation must be finite");
}

SsimResult ssim(const Image& a, const Image& b) {
  check_image(a, "first");
  check_image(b, "second");
  check_same(a, b);
  const std::size_t h = a.height();
  const std::size_t w = a.width();
  const std::size_t nc = a.channels();
  SsimResult res{Grid<double>(h, w), 0.0};
  for (std::size_t c = 0; c < nc; ++c) {
    const auto mu_a = box3(h, w, [&](std::size_t y, std::size_t x) { return a(y, x, c); });
    const auto mu_b = box3(h, w, [&](std::size_t y, std::size_t x) { return b(y, x, c); });
    const auto aa = box3(h, w, [&](std::size_t y, std::size_t x) { return a(y, x, c) * a(y, x, c); });
    const auto bb = box3(h, w, [&](std::size_t y, std::size_t x) { return b(y, x, c) * b(y, x, c); });
    const auto ab = box3(h, w, [&](std::size_t y, std::size_t x) { return a(y, x, c) * b(y, x, c); });
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double ma = mu_a(y, x);
        const double mb = mu_b(y, x);
        const double var_a = aa(y, x) - ma * ma;
        const double var_b = bb(y, x) - mb * mb;
        const double cov = ab(y, x) - ma * mb;
        const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
        const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
        res.map(y, x) += std::clamp(num / den, -1.0, 1.0);
      }
    }
  }
  double total = 0.0;
  for (double& v : res.map.data()) {
    v /= static_cast<double>(nc);
    total += v;
  }
  res.mean = total / static_cast<double>(h * w);
  return res;
}

Grid<double> photometric_error(const Image& a, const Image& b, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValueError("alpha must lie in [0, 1]");
  const SsimResult s = ssim(a, b);
  Grid<double> pe(a.height(), a.width());
  for (std::size_t y = 0; y < a.height(); ++y) {
    for (std::size_t x = 0; x < a.width(); ++x) {
      double l1 = 0.0;
      for (std::size_t c = 0; c < a.channels(); ++c) l1 += std::abs(a(y, x, c) - b(y, x, c));
      l1 /= static_cast<double>(a.channels());
      pe(y, x) = alpha / 2.0 * (1.0 - s.map(y, x)) + (1.0 - alpha) * l1;
    }
  }
  return pe;
}

WarpCoords reprojection_coords(const DisparityGrid& disparity, const CameraModel& cam,
                               double baseline_scale, std::size_t src_h, std::size_t src_w) {
  cam.validate();
  if (!(baseline_scale > 0.0) || !std::isfinite(baseline_scale)) {
    throw ValueError("baseline scale must be positive and finite");
  }
  if (disparity.empty() || src_h == 0 || src_w == 0) throw ShapeError("empty warp geometry");
  const std::size_t h = disparity.height();
  const std::size_t w = disparity.width();
  WarpCoords wc{Grid<double>(h, w), Grid<double>(h, w), Mask(h, w)};
  const auto& R = cam.pose.rotation;
  const auto& t = cam.pose.translation;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double d = disparity(y, x);
      if (!std::isfinite(d)) throw ValueError("disparity must be finite");
      if (!(d > 0.0)) continue;
      const double z = baseline_scale / d;
      const double px = (static_cast<double>(x) - cam.cx) / cam.fx * z;
      const double py = (static_cast<double>(y) - cam.cy) / cam.fy * z;
      const double qx = R[0] * px + R[1] * py + R[2] * z + t[0];
      const double qy = R[3] * px + R[4] * py + R[5] * z + t[1];
      const double qz = R[6] * px + R[7] * py + R[8] * z + t[2];
      if (!(qz > 0.0)) continue;
      const double u = snap(cam.fx * qx / qz + cam.cx);
      const double v = snap(cam.fy * qy / qz + cam.cy);
      wc.u(y, x) = u;
      wc.v(y, x) = v;
      if (u >= 0.0 && v >= 0.0 && u <= static_cast<double>(src_w - 1) &&
          v <= static_cast<double>(src_h - 1)) {
        wc.valid(y, x) = 1;
      }
    }
  }
  return wc;
}

WarpResult reproject(const Image& src, const DisparityGrid& disparity, const CameraModel& cam,
                     double baseline_scale) {
  check_image(src, "source");
  if (src.height() != disparity.height() || src.width() != disparity.width()) {
    throw ShapeError("disparity and source image differ in size");
  }
  const WarpCoords wc =
      reprojection_coords(disparity, cam, baseline_scale, src.height(), src.width());
  WarpResult out{Image(src.height(), src.width(), src.channels()), wc.valid};
  bool any = false;
  for (std::size_t y = 0; y < src.height(); ++y) {
    for (std::size_t x = 0; x < src.width(); ++x) {
      if (!wc.valid(y, x)) continue;
      any = true;
      for (std::size_t c = 0; c < src.channels(); ++c)
        out.image(y, x, c) = sample_bilinear(src, wc.u(y, x), wc.v(y, x), c);
    }
  }
  if (!any) throw DegenerateError("every pixel reprojects outside the source image");
  return out;
}

ReprojectionLoss min_reprojection(const Image& target, const std::vector<WarpResult>& candidates,
                                  double alpha) {
  if (candidates.empty()) throw EmptyError("min_reprojection needs at least one candidate");
  const std::size_t h = target.height();
  const std::size_t w = target.width();
  ReprojectionLoss res{Grid<double>(h, w), Mask(h, w), 0.0};
  Grid<double> best(h, w, 0.0);
  for (const WarpResult& cand : candidates) {
    if (cand.valid.height() != h || cand.valid.width() != w) {
      throw ShapeError("candidate mask differs in size from the target");
    }
    const Grid<double> pe = photometric_error(target, cand.image, alpha);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (!cand.valid(y, x)) continue;
        if (!res.valid(y, x) || pe(y, x) < best(y, x)) best(y, x) = pe(y, x);
        res.valid(y, x) = 1;
      }
    }
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!res.valid(y, x)) continue;
      res.map(y, x) = best(y, x);
      sum += best(y, x);
      ++n;
    }
  }
  if (n == 0) throw DegenerateError("no pixel is valid in any candidate");
  res.mean = sum / static_cast<double>(n);
  return res;
}

double smoothness(const DisparityGrid& disparity, const Image& image) {
  check_image(image, "guide");
  if (disparity.height() != image.height() || disparity.width() != image.width()) {
    throw ShapeError("disparity and image differ in size");
  }
  const std::size_t h = disparity.height();
  const std::size_t w = disparity.width();
  const std::size_t nc = image.channels();
  double mean = 0.0;
  for (double d : disparity.data()) {
    if (!std::isfinite(d)) throw ValueError("disparity must be finite");
    mean += d;
  }
  mean /= static_cast<double>(disparity.size());
  if (mean == 0.0) throw DegenerateError("mean disparity is zero");

  auto image_grad = [&](std::size_t y0, std::size_t x0, std::size_t y1, std::size_t x1) {
    double g = 0.0;
    for (std::size_t c = 0; c < nc; ++c) g += std::abs(image(y1, x1, c) - image(y0, x0, c));
    return g / static_cast<double>(nc);
  };

  double sx = 0.0;
  if (w > 1) {
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x + 1 < w; ++x)
        sx += std::abs(disparity(y, x + 1) / mean - disparity(y, x) / mean) *
              std::exp(-image_grad(y, x, y, x + 1));
    sx /= static_cast<double>(h * (w - 1));
  }
  double sy = 0.0;
  if (h > 1) {
    for (std::size_t y = 0; y + 1 < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        sy += std::abs(disparity(y + 1, x) / mean - disparity(y, x) / mean) *
              std::exp(-image_grad(y, x, y + 1, x));
    sy /= static_cast<double>((h - 1) * w);
  }
  return sx + sy;
}

MultiscaleLoss multiscale_loss(const QuadForest& forest, const Image& target,
                               const std::vector<std::pair<Image, CameraModel>>& sources,
                               const LossConfig& cfg, double baseline_scale) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ValueError("alpha must lie in [0, 1]");
  if (!(cfg.mu >= 0.0) || !(cfg.lambda >= 0.0)) throw ValueError("mu and lambda must be >= 0");
  if (cfg.level_count < 1 || cfg.level_count > forest.level_count()) {
    throw LevelError("loss level count must be in [1, " + std::to_string(forest.level_count()) +
                     "]");
  }
  if (forest.full_height() != target.height() || forest.full_width() != target.width()) {
    throw ShapeError("forest resolution differs from the target image");
  }
  if (sources.empty()) throw EmptyError("multiscale_loss needs at least one source view");

  MultiscaleLoss res;
  for (int l = 0; l < cfg.level_count; ++l) {
    const DisparityGrid disp = upsample_nearest(compose(forest, l), std::size_t{1} << l);
    std::vector<WarpResult> warped;
    warped.reserve(sources.size());
    for (const auto& [img, cam] : sources) warped.push_back(reproject(img, disp, cam, baseline_scale));
    LevelLoss lv;
    lv.level = l;
    lv.photometric = min_reprojection(target, warped, cfg.alpha).mean;
    lv.smoothness = smoothness(disp, target);
    lv.weighted = cfg.mu * lv.photometric + cfg.lambda * lv.smoothness;
    res.total += lv.weighted;
    res.levels.push_back(lv);
  }
  res.total /= static_cast<double>(cfg.level_count);
  return res;
}

}  // namespace qdepth
