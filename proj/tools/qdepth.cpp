// qdepth: command-line front end for encoding, inspecting and evaluating quadtree depth maps.
//
// Exit codes: 0 success, 1 usage error, 2 data or format error. Data goes to files or
// stdout; diagnostics go to stderr. A path of "-" means stdin or stdout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdepth/codec.hpp"
#include "qdepth/dense_io.hpp"
#include "qdepth/errors.hpp"
#include "qdepth/metrics.hpp"
#include "qdepth/quadtree.hpp"
#include "qdepth/render.hpp"
#include "qdepth/sweep.hpp"

namespace {

using Record = nlohmann::ordered_json;

struct Options {
  std::string format = "text";
  std::string input;
  std::string input2;
  std::string output;
  double tau = 0.0;
  bool tau_given = false;
  std::vector<double> tau_sweep;
  int levels = 6;
  int level = 0;
  std::optional<double> scale;
  std::uint64_t seed = 7;
  std::size_t channels = 8;
};

// Writes one record per line: JSON objects, or space-separated key=value pairs.
class Emitter {
 public:
  Emitter(std::string format, std::ostream& out) : records_(format == "records"), out_(out) {}

  void emit(const Record& r) {
    if (records_) {
      out_ << r.dump() << '\n';
      return;
    }
    bool first = true;
    for (const auto& [key, value] : r.items()) {
      if (key == "record") continue;
      out_ << (first ? "" : " ") << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump());
      first = false;
    }
    out_ << '\n';
  }

 private:
  bool records_;
  std::ostream& out_;
};

std::vector<std::uint8_t> slurp(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw qdepth::FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::istringstream as_stream(const std::vector<std::uint8_t>& bytes) {
  return std::istringstream(std::string(bytes.begin(), bytes.end()));
}

qdepth::DisparityGrid load_dense(const std::string& path) {
  std::istringstream in = as_stream(slurp(path));
  return qdepth::to_disparity(qdepth::read_dense(in));
}

qdepth::QuadForest load_forest(const std::string& path) {
  return qdepth::read_forest(std::span<const std::uint8_t>(slurp(path)));
}

// Either container: a QFM1 forest is rasterised, anything else is read as a dense map.
qdepth::DisparityGrid load_any(const std::string& path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  if (qdepth::is_qfm(bytes)) return qdepth::rasterize(qdepth::read_forest(bytes));
  std::istringstream in = as_stream(bytes);
  return qdepth::to_disparity(qdepth::read_dense(in));
}

template <typename Writer>
void write_to(const std::string& path, Writer&& write) {
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw qdepth::FormatError("failed writing to stdout");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw qdepth::FormatError("cannot create " + path);
  write(f);
  if (!f) throw qdepth::FormatError("failed writing " + path);
}

Record forest_stats(const char* name, const qdepth::QuadForest& f) {
  const qdepth::NodeCounts counts = qdepth::node_count(f);
  Record r;
  r["record"] = name;
  r["levels"] = f.level_count();
  r["height"] = f.full_height();
  r["width"] = f.full_width();
  r["nodes_total"] = counts.total;
  for (int l = f.root_level(); l >= 0; --l)
    r["nodes_level_" + std::to_string(l)] = counts.per_level[static_cast<std::size_t>(l)];
  r["compression_ratio"] = qdepth::compression_ratio(f);
  return r;
}

Record flop_record(const std::string& label, double tau, double ratio, const qdepth::FlopReport& t) {
  Record r;
  r["record"] = "flops";
  r["label"] = label;
  r["tau"] = tau;
  r["compression_ratio"] = ratio;
  r["sparse_macs"] = t.sparse_macs;
  r["dense_macs"] = t.dense_macs;
  r["dense_valid_macs"] = t.dense_valid_macs;
  r["active_sites"] = t.active_sites;
  r["total_sites"] = t.total_sites;
  r["active_fraction"] = t.active_fraction();
  r["sparse_over_dense"] =
      t.dense_macs == 0 ? 0.0 : static_cast<double>(t.sparse_macs) / static_cast<double>(t.dense_macs);
  return r;
}

int cmd_encode(const Options& o) {
  qdepth::EncodeConfig cfg;
  cfg.level_count = o.levels;
  cfg.tau = o.tau;
  const qdepth::DisparityGrid d = load_dense(o.input);

  if (!o.tau_sweep.empty()) {
    Emitter em(o.format, std::cout);
    for (const qdepth::SweepPoint& p : qdepth::tau_sweep(d, o.tau_sweep, cfg)) {
      Record r;
      r["record"] = "sweep";
      r["tau"] = p.tau;
      r["compression_ratio"] = p.compression_ratio;
      r["rmse"] = p.rmse;
      em.emit(r);
    }
    return 0;
  }

  const qdepth::QuadForest f = qdepth::encode_dense(d, cfg);
  if (!o.output.empty()) write_to(o.output, [&](std::ostream& out) { qdepth::write_forest(f, out); });
  // Keep the forest alone on stdout when it is being piped.
  Emitter em(o.format, o.output == "-" ? std::cerr : std::cout);
  Record r = forest_stats("encode", f);
  r["tau"] = o.tau;
  em.emit(r);
  return 0;
}

int cmd_decode(const Options& o) {
  const qdepth::QuadForest f = load_forest(o.input);
  const qdepth::DisparityGrid d = qdepth::compose(f, o.level);
  write_to(o.output, [&](std::ostream& out) { qdepth::write_pfm(d, out); });
  return 0;
}

int cmd_eval(const Options& o) {
  const qdepth::DisparityGrid pred = load_any(o.input);
  const qdepth::DisparityGrid gt = load_dense(o.input2);
  if (!pred.same_shape(gt)) throw qdepth::ShapeError("prediction and reference differ in size");
  qdepth::Mask valid(gt.height(), gt.width());
  for (std::size_t i = 0; i < gt.size(); ++i) valid.data()[i] = gt.data()[i] > 0.0 ? 1 : 0;
  qdepth::EvalOptions opts;
  opts.space = o.scale ? qdepth::EvalSpace::depth : qdepth::EvalSpace::disparity;
  const qdepth::DepthMetrics m = qdepth::depth_metrics(pred, gt, valid, o.scale.value_or(1.0), opts);
  Record r;
  r["record"] = "eval";
  r["space"] = o.scale ? "depth" : "disparity";
  r["abs_rel"] = m.abs_rel;
  r["sq_rel"] = m.sq_rel;
  r["rmse"] = m.rmse;
  r["n_valid"] = m.n_valid;
  Emitter(o.format, std::cout).emit(r);
  return 0;
}

int cmd_compare(const Options& o) {
  const qdepth::StructureReport s =
      qdepth::structure_likelihood(load_forest(o.input), load_forest(o.input2));
  Record r;
  r["record"] = "structure";
  r["likelihood"] = s.likelihood;
  for (int l = static_cast<int>(s.per_level_match.size()) - 1; l >= 0; --l)
    r["match_level_" + std::to_string(l)] = s.per_level_match[static_cast<std::size_t>(l)];
  r["compression_a"] = s.compression_a;
  r["compression_b"] = s.compression_b;
  Emitter(o.format, std::cout).emit(r);
  return 0;
}

int cmd_stats(const Options& o) {
  const qdepth::QuadForest f = load_forest(o.input);
  Record r = forest_stats("stats", f);
  const std::vector<double> pct = qdepth::level_distribution(f);
  for (int l = f.root_level(); l >= 0; --l)
    r["pixels_pct_level_" + std::to_string(l)] = pct[static_cast<std::size_t>(l)];
  Emitter(o.format, std::cout).emit(r);
  return 0;
}

int cmd_sparsity_demo(const Options& o) {
  qdepth::DemoConfig cfg;
  cfg.seed = o.seed;
  cfg.levels = o.levels;
  cfg.channels = o.channels;
  Emitter em(o.format, o.output == "-" ? std::cerr : std::cout);
  auto save = [&](const std::string& prefix, const qdepth::QuadForest& f) {
    if (prefix.empty() || prefix == "-") return;
    write_to(prefix + ".qfm", [&](std::ostream& out) { qdepth::write_forest(f, out); });
    write_to(prefix + ".ppm",
             [&](std::ostream& out) { qdepth::write_ppm(qdepth::render_quadtree(f), out); });
  };

  if (o.tau_given) {
    const qdepth::DecoderRun run = qdepth::run_sparsity_demo(cfg, o.tau);
    save(o.output, run.forest);
    if (o.output == "-") {
      qdepth::write_forest(run.forest, std::cout);
      std::cout.flush();
    }
    const double ratio = qdepth::compression_ratio(run.forest);
    for (int l = cfg.levels - 1; l >= 0; --l) {
      const auto li = static_cast<std::size_t>(l);
      qdepth::FlopReport lvl = run.conv_flops[li];
      lvl += run.head_flops[li];
      Record r = flop_record("level_" + std::to_string(l), o.tau, ratio, lvl);
      r["record"] = "level_flops";
      r["level"] = l;
      em.emit(r);
    }
    em.emit(flop_record("tau", o.tau, ratio, run.total));
    return 0;
  }

  for (const qdepth::DemoPoint& p : qdepth::sparsity_operating_points(cfg, {30.0, 10.0})) {
    if (!o.output.empty() && o.output != "-") {
      save(o.output + "_" + p.label, qdepth::run_sparsity_demo(cfg, p.tau).forest);
    }
    em.emit(flop_record(p.label, p.tau, p.compression_ratio, p.total));
  }
  return 0;
}

int cmd_render(const Options& o) {
  const qdepth::Image img = qdepth::render_quadtree(load_forest(o.input));
  write_to(o.output, [&](std::ostream& out) { qdepth::write_ppm(img, out); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Quadtree depth map toolkit", "qdepth"};
  app.require_subcommand(1);
  app.add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"text", "records"}))
      ->capture_default_str();
  app.fallthrough();

  auto add_tau = [&](CLI::App* sub) {
    return sub->add_option("--tau", o.tau, "Split threshold in disparity units")
        ->check(CLI::NonNegativeNumber);
  };
  auto add_levels = [&](CLI::App* sub, int lo) {
    sub->add_option("--levels", o.levels, "Number of quadtree levels")
        ->check(CLI::Range(lo, qdepth::kMaxLevels))
        ->capture_default_str();
  };

  CLI::App* encode = app.add_subcommand("encode", "Encode a dense disparity map into QFM1");
  encode->add_option("input", o.input, "PFM or PGM disparity map, '-' for stdin")->required();
  encode->add_option("output", o.output, "QFM1 output path, '-' for stdout");
  add_tau(encode);
  add_levels(encode, 2);
  encode->add_option("--tau-sweep", o.tau_sweep, "Comma-separated taus; reports ratio and rmse")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);

  CLI::App* decode = app.add_subcommand("decode", "Compose a QFM1 forest into a PFM map");
  decode->add_option("input", o.input, "QFM1 input, '-' for stdin")->required();
  decode->add_option("output", o.output, "PFM output, '-' for stdout")->required();
  decode->add_option("--level", o.level, "Compose at this level, 0 = full detail")
      ->check(CLI::NonNegativeNumber);

  CLI::App* eval = app.add_subcommand("eval", "Depth metrics of a prediction against a reference");
  eval->add_option("pred", o.input, "Prediction, QFM1 or dense map")->required();
  eval->add_option("gt", o.input2, "Reference dense map; pixels <= 0 are ignored")->required();
  eval->add_option("--scale", o.scale, "depth = scale / disparity; omit to compare disparities")
      ->check(CLI::PositiveNumber);

  CLI::App* compare =
      app.add_subcommand("compare-structure", "Structure likelihood of two QFM1 forests");
  compare->add_option("a", o.input, "First QFM1 forest")->required();
  compare->add_option("b", o.input2, "Second QFM1 forest")->required();

  CLI::App* stats = app.add_subcommand("stats", "Node counts, compression and level distribution");
  stats->add_option("input", o.input, "QFM1 input, '-' for stdin")->required();

  CLI::App* demo =
      app.add_subcommand("sparsity-demo", "Toy sparse decoder with sparse and dense MAC counts");
  demo->add_option("output", o.output, "Prefix for .qfm and .ppm outputs");
  add_tau(demo);
  add_levels(demo, 1);
  demo->add_option("--seed", o.seed, "Seed for features and weights")->capture_default_str();
  demo->add_option("--channels", o.channels, "Feature channels")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  CLI::App* render = app.add_subcommand("render", "Render a QFM1 forest to PPM");
  render->add_option("input", o.input, "QFM1 input, '-' for stdin")->required();
  render->add_option("output", o.output, "PPM output, '-' for stdout")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  o.tau_given = encode->count("--tau") + demo->count("--tau") > 0;

  try {
    if (*encode) return cmd_encode(o);
    if (*decode) return cmd_decode(o);
    if (*eval) return cmd_eval(o);
    if (*compare) return cmd_compare(o);
    if (*stats) return cmd_stats(o);
    if (*demo) return cmd_sparsity_demo(o);
    if (*render) return cmd_render(o);
  } catch (const qdepth::Error& e) {
    std::cerr << "qdepth: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qdepth: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
