#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "doctest.h"
#include "qdepth/errors.hpp"
#include "qdepth/metrics.hpp"
#include "support.hpp"

using namespace qdepth;

namespace {

using Key = std::tuple<int, std::size_t, std::size_t>;

// Labels rebuilt from the node list: a node is inner when its top-left child is listed.
std::map<Key, NodeLabel> labels_from_nodes(const QuadForest& f) {
  std::map<Key, NodeLabel> out;
  const std::vector<QuadNode> nodes = f.nodes();
  for (const QuadNode& n : nodes) out[{n.level, n.y, n.x}] = NodeLabel::leaf;
  for (const QuadNode& n : nodes)
    if (n.level > 0 && out.count({n.level - 1, 2 * n.y, 2 * n.x}))
      out[{n.level, n.y, n.x}] = NodeLabel::inner;
  return out;
}

double likelihood_oracle(const QuadForest& a, const QuadForest& b) {
  const auto la = labels_from_nodes(a);
  const auto lb = labels_from_nodes(b);
  std::map<Key, int> seen;
  for (const auto& kv : la) seen[kv.first] = 1;
  for (const auto& kv : lb) seen[kv.first] = 1;
  std::size_t agree = 0;
  for (const auto& kv : seen) {
    const auto ia = la.find(kv.first);
    const auto ib = lb.find(kv.first);
    const NodeLabel x = ia == la.end() ? NodeLabel::absent : ia->second;
    const NodeLabel y = ib == lb.end() ? NodeLabel::absent : ib->second;
    if (x == y) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(seen.size());
}

struct OracleMetrics {
  double abs_rel, sq_rel, rmse;
};

// Straight transcription over a compacted list of valid depth pairs.
OracleMetrics metrics_oracle(const DisparityGrid& pred, const DisparityGrid& gt, const Mask& m,
                             double scale) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t y = 0; y < gt.height(); ++y)
    for (std::size_t x = 0; x < gt.width(); ++x)
      if (m(y, x)) pairs.emplace_back(scale / gt(y, x), scale / pred(y, x));
  OracleMetrics o{0, 0, 0};
  for (const auto& [g, p] : pairs) {
    o.abs_rel += std::abs(g - p) / g;
    o.sq_rel += (g - p) * (g - p) / g;
    o.rmse += (g - p) * (g - p);
  }
  const auto n = static_cast<double>(pairs.size());
  o.abs_rel /= n;
  o.sq_rel /= n;
  o.rmse = std::sqrt(o.rmse / n);
  return o;
}

}  // namespace

TEST_CASE("compression ratio") {
  QuadForest single(6, 1, 1);
  single.slice(5).set(0, 0, 1.0f);
  CHECK(compression_ratio(single) == 1024.0);

  Rng rng(2);
  const QuadForest full = test::fully_refined(rng, 6, 1, 1);
  CHECK(compression_ratio(full) == doctest::Approx(1024.0 / 1365.0).epsilon(1e-15));
  CHECK(compression_ratio(full) == doctest::Approx(0.750).epsilon(1e-3));
}

TEST_CASE("structure likelihood") {
  Rng rng(17);
  SUBCASE("a forest agrees with itself") {
    for (int i = 0; i < 20; ++i) {
      const QuadForest f = test::random_forest(rng, 5, 2, 3, 0.5);
      const StructureReport r = structure_likelihood(f, f);
      CHECK(r.likelihood == 1.0);
      for (double m : r.per_level_match) CHECK(m == 1.0);
    }
  }
  SUBCASE("matches the node-list oracle and is symmetric") {
    for (int i = 0; i < 50; ++i) {
      const QuadForest a = test::random_forest(rng, 5, 2, 2, rng.unit());
      const QuadForest b = test::random_forest(rng, 5, 2, 2, rng.unit());
      const double ab = structure_likelihood(a, b).likelihood;
      CHECK(ab == doctest::Approx(likelihood_oracle(a, b)).epsilon(1e-14));
      CHECK(ab == structure_likelihood(b, a).likelihood);
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
    }
  }
  SUBCASE("constant map against a fully refined one") {
    EncodeConfig cfg;
    cfg.level_count = 3;
    const QuadForest flat = encode_dense(DisparityGrid(8, 8, 2.0), cfg);
    const QuadForest full = test::fully_refined(rng, 3, 2, 2);
    const StructureReport r = structure_likelihood(flat, full);
    // Roots disagree (leaf vs inner) and every finer cell is missing from one side.
    CHECK(r.likelihood == 0.0);
    CHECK(r.likelihood == likelihood_oracle(flat, full));
    CHECK(r.compression_a == 16.0);
    CHECK(r.compression_b == doctest::Approx(64.0 / 84.0));
  }
  SUBCASE("same threshold on the same map agrees fully") {
    const DisparityGrid d = test::random_grid(32, 32, rng, 0.0, 4.0);
    EncodeConfig cfg;
    cfg.tau = 1.5;
    cfg.level_count = 4;
    CHECK(structure_likelihood(encode_dense(d, cfg), encode_dense(d, cfg)).likelihood == 1.0);
  }
  SUBCASE("mismatched geometry") {
    CHECK_THROWS_AS(structure_likelihood(QuadForest(3, 2, 2), QuadForest(4, 1, 1)), ShapeError);
    CHECK_THROWS_AS(structure_likelihood(QuadForest(3, 2, 2), QuadForest(3, 2, 3)), ShapeError);
  }
}

TEST_CASE("level distribution") {
  Rng rng(21);
  EncodeConfig cfg;
  cfg.level_count = 6;

  const std::vector<double> flat = level_distribution(encode_dense(DisparityGrid(64, 64, 1.0), cfg));
  CHECK(flat[5] == 100.0);
  for (int l = 0; l < 5; ++l) CHECK(flat[static_cast<std::size_t>(l)] == 0.0);

  const std::vector<double> fine = level_distribution(test::fully_refined(rng, 6, 2, 1));
  CHECK(fine[0] == 100.0);

  cfg.tau = 0.01;
  const QuadForest hot = encode_dense(test::hot_pixel_map(), cfg);
  const std::vector<double> dist = level_distribution(hot);
  std::vector<double> expected(6, 0.0);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 64; ++x)
      expected[static_cast<std::size_t>(test::oracle_origin(hot, y, x))] += 100.0 / 4096.0;
  for (std::size_t l = 0; l < 6; ++l) CHECK(dist[l] == doctest::Approx(expected[l]).epsilon(1e-12));
  // One of four 32x32 root cells splits down to a single-pixel branch: 4 pixels at level 0.
  CHECK(dist[0] == doctest::Approx(100.0 * 4.0 / 4096.0));
  CHECK(dist[5] == doctest::Approx(75.0));

  for (int i = 0; i < 50; ++i) {
    const QuadForest f = test::random_forest(rng, 5, 3, 2, rng.unit());
    const std::vector<double> p = level_distribution(f);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 100.0) <= 1e-9);
  }
}

TEST_CASE("depth metrics") {
  Rng rng(33);
  const DisparityGrid gt = test::random_grid(20, 30, rng, 0.5, 50.0);
  const Mask all(20, 30, 1);

  SUBCASE("perfect prediction") {
    const DepthMetrics m = depth_metrics(gt, gt, all, 5.4);
    CHECK(m.abs_rel == 0.0);
    CHECK(m.sq_rel == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.n_valid == 600);
  }
  SUBCASE("doubled depth gives abs rel of exactly one") {
    DisparityGrid half = gt;
    for (double& v : half.data()) v /= 2.0;
    CHECK(depth_metrics(half, gt, all, 1.0).abs_rel == 1.0);
  }
  SUBCASE("random pair against the oracle") {
    const DisparityGrid pred = test::random_grid(20, 30, rng, 0.5, 50.0);
    Mask m(20, 30);
    for (auto& v : m.data()) v = rng.bernoulli(0.7) ? 1 : 0;
    const DepthMetrics got = depth_metrics(pred, gt, m, 7.0);
    const OracleMetrics want = metrics_oracle(pred, gt, m, 7.0);
    CHECK(std::abs(got.abs_rel - want.abs_rel) <= 1e-10);
    CHECK(std::abs(got.sq_rel - want.sq_rel) <= 1e-10);
    CHECK(std::abs(got.rmse - want.rmse) <= 1e-10);
  }
  SUBCASE("invariant under a joint pixel permutation") {
    const DisparityGrid pred = test::random_grid(20, 30, rng, 0.5, 50.0);
    std::vector<std::size_t> perm(600);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 599; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    DisparityGrid pp(20, 30), gp(20, 30);
    for (std::size_t i = 0; i < 600; ++i) {
      pp.data()[i] = pred.data()[perm[i]];
      gp.data()[i] = gt.data()[perm[i]];
    }
    const DepthMetrics a = depth_metrics(pred, gt, all, 3.0);
    const DepthMetrics b = depth_metrics(pp, gp, all, 3.0);
    CHECK(a.abs_rel == doctest::Approx(b.abs_rel).epsilon(1e-12));
    CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-12));
  }
  SUBCASE("disparity space and depth cap") {
    DisparityGrid g(1, 2), p(1, 2);
    g(0, 0) = 2.0;
    p(0, 0) = 1.0;
    g(0, 1) = 0.1;
    p(0, 1) = 0.1;
    EvalOptions disp;
    disp.space = EvalSpace::disparity;
    const DepthMetrics md = depth_metrics(p, g, Mask(1, 2, 1), 1.0, disp);
    CHECK(md.abs_rel == doctest::Approx(0.25));
    CHECK(md.rmse == doctest::Approx(std::sqrt(0.5)));
    EvalOptions capped;
    capped.max_depth = 5.0;
    const DepthMetrics mc = depth_metrics(p, g, Mask(1, 2, 1), 1.0, capped);
    CHECK(mc.n_valid == 1);
    CHECK(mc.abs_rel == doctest::Approx(1.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(depth_metrics(gt, gt, Mask(20, 30, 0), 1.0), EmptyError);
    CHECK_THROWS_AS(depth_metrics(gt, DisparityGrid(2, 2, 1.0), all, 1.0), ShapeError);
    CHECK_THROWS_AS(depth_metrics(gt, gt, all, 0.0), ValueError);
    DisparityGrid bad = gt;
    bad(3, 3) = 0.0;
    CHECK_THROWS_AS(depth_metrics(gt, bad, all, 1.0), ValueError);
    CHECK_THROWS_AS(depth_metrics(bad, gt, all, 1.0), ValueError);
    Mask skip = all;
    skip(3, 3) = 0;
    CHECK_NOTHROW(depth_metrics(bad, gt, skip, 1.0));
  }
}

TEST_CASE("disparity to depth") {
  DisparityGrid d(1, 3);
  d(0, 0) = 2.0;
  d(0, 1) = 0.5;
  d(0, 2) = 0.0;
  const DisparityGrid z = disparity_to_depth(d, 4.0);
  CHECK(z(0, 0) == 2.0);
  CHECK(z(0, 1) == 8.0);
  CHECK(std::isinf(z(0, 2)));
}
