#include "qdepth/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "qdepth/errors.hpp"
#include "qdepth/metrics.hpp"

namespace qdepth {

namespace {

double rmse_against(const DisparityGrid& a, const DisparityGrid& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a.data()[i] - b.data()[i];
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(a.size()));
}

}  // namespace

std::vector<SweepPoint> tau_sweep(const DisparityGrid& disparity, const std::vector<double>& taus,
                                  const EncodeConfig& base) {
  std::vector<SweepPoint> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    EncodeConfig cfg = base;
    cfg.tau = tau;
    const QuadForest f = encode_dense(disparity, cfg);
    out.push_back({tau, compression_ratio(f), rmse_against(rasterize(f), disparity)});
  }
  return out;
}

TauSolution solve_tau(const std::function<double(double)>& ratio_at, double target,
                      double tau_max, double rel_tol, int max_iter) {
  if (!(target > 0.0)) throw ValueError("target ratio must be positive");
  if (!(tau_max >= 0.0)) throw ValueError("tau_max must be >= 0");
  TauSolution best{0.0, ratio_at(0.0)};
  auto consider = [&](double tau, double ratio) {
    if (std::abs(ratio - target) < std::abs(best.compression_ratio - target)) best = {tau, ratio};
  };
  if (best.compression_ratio >= target) return best;
  const double top = ratio_at(tau_max);
  consider(tau_max, top);
  if (top <= target) return best;

  double lo = 0.0;
  double hi = tau_max;
  for (int i = 0; i < max_iter; ++i) {
    if (std::abs(best.compression_ratio - target) <= rel_tol * target) break;
    const double mid = 0.5 * (lo + hi);
    const double r = ratio_at(mid);
    consider(mid, r);
    if (r < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

TauSolution tau_for_ratio(const DisparityGrid& disparity, double target, const EncodeConfig& base,
                          double rel_tol) {
  double lo = disparity.data().empty() ? 0.0 : disparity.data()[0];
  double hi = lo;
  for (double v : disparity.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  auto ratio_at = [&](double tau) {
    EncodeConfig cfg = base;
    cfg.tau = tau;
    return compression_ratio(encode_dense(disparity, cfg));
  };
  return solve_tau(ratio_at, target, hi - lo, rel_tol);
}

DecoderRun run_sparsity_demo(const DemoConfig& cfg, double tau) {
  const FeatureGrid seed = make_seed_features(cfg.base_h, cfg.base_w, cfg.channels, cfg.seed);
  const ToyDecoder dec = make_toy_decoder(cfg.levels, cfg.channels, cfg.seed + 1);
  return toy_decoder_forward(seed, dec, tau);
}

std::vector<DemoPoint> sparsity_operating_points(const DemoConfig& cfg,
                                                 const std::vector<double>& target_ratios,
                                                 double rel_tol) {
  const FeatureGrid seed = make_seed_features(cfg.base_h, cfg.base_w, cfg.channels, cfg.seed);
  const ToyDecoder dec = make_toy_decoder(cfg.levels, cfg.channels, cfg.seed + 1);
  auto ratio_at = [&](double tau) {
    return compression_ratio(toy_decoder_forward(seed, dec, tau).forest);
  };
  std::vector<DemoPoint> points;
  for (double target : target_ratios) {
    const TauSolution sol = solve_tau(ratio_at, target, dec.d_max - dec.d_min, rel_tol);
    const DecoderRun run = toy_decoder_forward(seed, dec, sol.tau);
    points.push_back({"ratio_" + std::to_string(static_cast<long>(std::lround(target))), sol.tau,
                      compression_ratio(run.forest), run.total});
  }
  const DecoderRun dense = toy_decoder_forward(seed, dec, 0.0);
  points.push_back({"dense", 0.0, compression_ratio(dense.forest), dense.total});
  return points;
}

}  // namespace qdepth
