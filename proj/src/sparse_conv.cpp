#include "qdepth/sparse_conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdepth/errors.hpp"
#include "qdepth/rng.hpp"

namespace qdepth {

FeatureGrid::FeatureGrid(std::size_t height, std::size_t width, std::size_t channels)
    : h_(height), w_(width), c_(channels), data_(height * width * channels, 0.0),
      active_(height, width) {
  if (height == 0 || width == 0 || channels == 0) {
    throw ShapeError("feature grid dimensions must be positive");
  }
}

void FeatureGrid::set_active(std::size_t y, std::size_t x, bool on) {
  active_(y, x) = on ? 1 : 0;
  if (!on) std::fill_n(data_.begin() + static_cast<std::ptrdiff_t>((y * w_ + x) * c_), c_, 0.0);
}

std::size_t FeatureGrid::active_count() const {
  const auto a = active_.data();
  return static_cast<std::size_t>(std::count(a.begin(), a.end(), 1));
}

Kernel::Kernel(std::size_t size, std::size_t in, std::size_t out)
    : k(size), in_channels(in), out_channels(out), weights(size * size * in * out, 0.0),
      bias(out, 0.0) {
  if (size % 2 == 0) throw ShapeError("kernel size must be odd");
  if (in == 0 || out == 0) throw ShapeError("kernel channel counts must be positive");
}

FlopReport& FlopReport::operator+=(const FlopReport& o) {
  sparse_macs += o.sparse_macs;
  dense_macs += o.dense_macs;
  dense_valid_macs += o.dense_valid_macs;
  active_sites += o.active_sites;
  total_sites += o.total_sites;
  return *this;
}

namespace {

void check_kernel(const FeatureGrid& x, const Kernel& kern) {
  if (kern.k % 2 == 0) throw ShapeError("kernel size must be odd");
  if (kern.in_channels != x.channels()) {
    throw ShapeError("kernel expects " + std::to_string(kern.in_channels) +
                     " input channels, grid has " + std::to_string(x.channels()));
  }
  if (kern.weights.size() != kern.k * kern.k * kern.in_channels * kern.out_channels ||
      kern.bias.size() != kern.out_channels) {
    throw ShapeError("kernel weight buffers do not match its declared shape");
  }
}

// Window bounds clipped to the grid; out-of-bounds taps are zero padding.
struct Window {
  std::size_t y0, y1, x0, x1;  // half-open
  std::size_t ky0, kx0;        // kernel offset of (y0, x0)
};

Window window_at(std::size_t y, std::size_t x, std::size_t h, std::size_t w, std::size_t k) {
  const std::size_t r = k / 2;
  Window win{};
  win.y0 = y >= r ? y - r : 0;
  win.x0 = x >= r ? x - r : 0;
  win.y1 = std::min(h, y + r + 1);
  win.x1 = std::min(w, x + r + 1);
  win.ky0 = win.y0 + r - y;
  win.kx0 = win.x0 + r - x;
  return win;
}

}  // namespace

FeatureGrid submanifold_conv(const FeatureGrid& x, const Kernel& kern) {
  check_kernel(x, kern);
  FeatureGrid out(x.height(), x.width(), kern.out_channels);
  std::vector<double> acc(kern.out_channels);
  for (std::size_t y = 0; y < x.height(); ++y) {
    for (std::size_t xx = 0; xx < x.width(); ++xx) {
      if (!x.is_active(y, xx)) continue;
      out.set_active(y, xx, true);
      std::copy(kern.bias.begin(), kern.bias.end(), acc.begin());
      const Window win = window_at(y, xx, x.height(), x.width(), kern.k);
      for (std::size_t sy = win.y0; sy < win.y1; ++sy) {
        for (std::size_t sx = win.x0; sx < win.x1; ++sx) {
          if (!x.is_active(sy, sx)) continue;
          const std::size_t ky = win.ky0 + (sy - win.y0);
          const std::size_t kx = win.kx0 + (sx - win.x0);
          for (std::size_t ci = 0; ci < kern.in_channels; ++ci) {
            const double v = x.at(sy, sx, ci);
            for (std::size_t co = 0; co < kern.out_channels; ++co)
              acc[co] += kern.weight(ky, kx, ci, co) * v;
          }
        }
      }
      for (std::size_t co = 0; co < kern.out_channels; ++co) out.at(y, xx, co) = acc[co];
    }
  }
  return out;
}

FlopReport flop_count(const FeatureGrid& x, const Kernel& kern) {
  check_kernel(x, kern);
  FlopReport rep;
  const std::uint64_t per_tap = kern.in_channels * kern.out_channels;
  rep.total_sites = x.height() * x.width();
  rep.dense_macs = rep.total_sites * kern.k * kern.k * per_tap;
  for (std::size_t y = 0; y < x.height(); ++y) {
    for (std::size_t xx = 0; xx < x.width(); ++xx) {
      const Window win = window_at(y, xx, x.height(), x.width(), kern.k);
      rep.dense_valid_macs += (win.y1 - win.y0) * (win.x1 - win.x0) * per_tap;
      if (!x.is_active(y, xx)) continue;
      ++rep.active_sites;
      std::uint64_t taps = 0;
      for (std::size_t sy = win.y0; sy < win.y1; ++sy)
        for (std::size_t sx = win.x0; sx < win.x1; ++sx) taps += x.is_active(sy, sx) ? 1 : 0;
      rep.sparse_macs += taps * per_tap;
    }
  }
  return rep;
}

namespace {

template <typename T>
Mask sparsify_impl(const Grid<T>& pred, double tau) {
  if (pred.height() % 2 != 0 || pred.width() % 2 != 0) {
    throw DimensionError("sparsify needs even dimensions, got " + std::to_string(pred.height()) +
                         "x" + std::to_string(pred.width()));
  }
  Mask mask(pred.height(), pred.width());
  for (std::size_t y = 0; y < pred.height(); y += 2) {
    for (std::size_t x = 0; x < pred.width(); x += 2) {
      const double spread = patch_spread(pred(y, x), pred(y, x + 1), pred(y + 1, x),
                                         pred(y + 1, x + 1));
      if (!(spread > tau)) continue;
      mask(y, x) = mask(y, x + 1) = mask(y + 1, x) = mask(y + 1, x + 1) = 1;
    }
  }
  return mask;
}

Kernel random_kernel(std::size_t k, std::size_t in, std::size_t out, Rng& rng) {
  Kernel kern(k, in, out);
  for (double& w : kern.weights) w = rng.uniform(-0.1, 0.1);
  return kern;
}

}  // namespace

Mask sparsify(const Grid<float>& pred, double tau) { return sparsify_impl(pred, tau); }
Mask sparsify(const DisparityGrid& pred, double tau) { return sparsify_impl(pred, tau); }

ToyDecoder make_toy_decoder(int level_count, std::size_t channels, std::uint64_t seed) {
  if (level_count < 1) throw LevelError("decoder needs at least one level");
  if (channels == 0) throw ShapeError("decoder needs at least one channel");
  Rng rng(seed);
  ToyDecoder dec;
  // Drawn coarsest level first so that adding levels keeps the coarse weights stable.
  dec.convs.resize(static_cast<std::size_t>(level_count));
  dec.heads.resize(static_cast<std::size_t>(level_count));
  for (int l = level_count - 1; l >= 0; --l) {
    dec.convs[static_cast<std::size_t>(l)] = random_kernel(3, channels, channels, rng);
    dec.heads[static_cast<std::size_t>(l)] = random_kernel(1, channels, 1, rng);
  }
  return dec;
}

FeatureGrid make_seed_features(std::size_t height, std::size_t width, std::size_t channels,
                               std::uint64_t seed) {
  Rng rng(seed);
  FeatureGrid g(height, width, channels);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      g.set_active(y, x, true);
      for (std::size_t c = 0; c < channels; ++c) g.at(y, x, c) = rng.uniform(-1.0, 1.0);
    }
  }
  return g;
}

DecoderRun toy_decoder_forward(const FeatureGrid& seed, const ToyDecoder& decoder, double tau) {
  const int L = decoder.level_count();
  if (L < 1 || decoder.heads.size() != decoder.convs.size()) {
    throw ShapeError("decoder needs one conv and one head per level");
  }
  if (!(tau >= 0.0)) throw ValueError("tau must be >= 0");
  if (seed.active_count() != seed.height() * seed.width()) {
    throw ShapeError("decoder seed must be fully active");
  }
  if (L > 1 && (seed.height() % 2 != 0 || seed.width() % 2 != 0)) {
    throw DimensionError("decoder root grid needs even dimensions");
  }
  if (!(decoder.d_max > decoder.d_min) || decoder.d_min < 0.0) {
    throw ValueError("decoder disparity range must satisfy 0 <= d_min < d_max");
  }

  DecoderRun run;
  run.forest = QuadForest(L, seed.height(), seed.width());
  run.conv_flops.resize(static_cast<std::size_t>(L));
  run.head_flops.resize(static_cast<std::size_t>(L));

  FeatureGrid features = seed;
  for (int l = L - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    if (l < L - 1) {
      const LevelSlice& parent = run.forest.slice(l + 1);
      FeatureGrid up(parent.height() * 2, parent.width() * 2, features.channels());
      for (std::size_t y = 0; y < up.height(); ++y) {
        for (std::size_t x = 0; x < up.width(); ++x) {
          if (!parent.is_active(y / 2, x / 2)) continue;
          up.set_active(y, x, true);
          for (std::size_t c = 0; c < up.channels(); ++c)
            up.at(y, x, c) = features.at(y / 2, x / 2, c);
        }
      }
      features = std::move(up);
    }

    const Kernel& conv = decoder.convs[li];
    const Kernel& head = decoder.heads[li];
    run.conv_flops[li] = flop_count(features, conv);
    features = submanifold_conv(features, conv);
    run.head_flops[li] = flop_count(features, head);
    const FeatureGrid logits = submanifold_conv(features, head);

    LevelSlice& slice = run.forest.slice(l);
    Grid<float> pred(slice.height(), slice.width());
    for (std::size_t y = 0; y < slice.height(); ++y) {
      for (std::size_t x = 0; x < slice.width(); ++x) {
        if (!logits.is_active(y, x)) continue;
        const double s = 1.0 / (1.0 + std::exp(-logits.at(y, x, 0)));
        pred(y, x) = static_cast<float>(decoder.d_min + (decoder.d_max - decoder.d_min) * s);
        slice.set(y, x, pred(y, x));
      }
    }
    if (l > 0) {
      const Mask mask = sparsify(pred, tau);
      for (std::size_t i = 0; i < mask.size(); ++i)
        slice.active.data()[i] = mask.data()[i] & slice.present.data()[i];
    }
    run.total += run.conv_flops[li];
    run.total += run.head_flops[li];
  }
  return run;
}

}  // namespace qdepth
