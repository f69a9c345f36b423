#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qdepth/grid.hpp"
#include "qdepth/quadtree.hpp"

namespace qdepth {

/**
 * Sparse 2D feature map: per-site feature vectors plus an active-site mask.
 * Features at inactive sites are zero.
 */
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(std::size_t height, std::size_t width, std::size_t channels);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t channels() const { return c_; }

  double& at(std::size_t y, std::size_t x, std::size_t c) { return data_[(y * w_ + x) * c_ + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * w_ + x) * c_ + c];
  }
  bool is_active(std::size_t y, std::size_t x) const { return active_(y, x) != 0; }
  /// Deactivating a site clears its features.
  void set_active(std::size_t y, std::size_t x, bool on);

  const Mask& active() const { return active_; }
  std::size_t active_count() const;

  bool operator==(const FeatureGrid&) const = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::size_t c_ = 0;
  std::vector<double> data_;
  Mask active_;
};

/// k x k convolution weights laid out as [ky][kx][in][out], plus a bias per output channel.
struct Kernel {
  std::size_t k = 3;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  Kernel() = default;
  Kernel(std::size_t size, std::size_t in, std::size_t out);

  double& weight(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) {
    return weights[((ky * k + kx) * in_channels + ci) * out_channels + co];
  }
  double weight(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) const {
    return weights[((ky * k + kx) * in_channels + ci) * out_channels + co];
  }
};

struct FlopReport {
  std::uint64_t sparse_macs = 0;
  /// h * w * k^2 * in * out, the textbook dense count.
  std::uint64_t dense_macs = 0;
  /// MACs of a dense zero-padded convolution that skips out-of-bounds taps; equals
  /// sparse_macs on a fully active grid.
  std::uint64_t dense_valid_macs = 0;
  std::uint64_t active_sites = 0;
  std::uint64_t total_sites = 0;

  double active_fraction() const {
    return total_sites == 0 ? 0.0
                            : static_cast<double>(active_sites) / static_cast<double>(total_sites);
  }
  FlopReport& operator+=(const FlopReport& o);
};

/// Submanifold convolution: evaluated at active sites only, gathering only active inputs.
FeatureGrid submanifold_conv(const FeatureGrid& x, const Kernel& kern);

FlopReport flop_count(const FeatureGrid& x, const Kernel& kern);

/**
 * Subdivision mask from a prediction: every non-overlapping 2x2 patch whose spread
 * max - min exceeds tau marks its four sites active.
 */
Mask sparsify(const Grid<float>& pred, double tau);
Mask sparsify(const DisparityGrid& pred, double tau);

/// Randomly initialised decoder: one 3x3 conv and one 1x1 prediction head per level.
struct ToyDecoder {
  std::vector<Kernel> convs;  // indexed by level, channels -> channels
  std::vector<Kernel> heads;  // indexed by level, channels -> 1
  double d_min = 0.01;
  double d_max = 10.0;

  int level_count() const { return static_cast<int>(convs.size()); }
  std::size_t channels() const { return convs.empty() ? 0 : convs.front().in_channels; }
};

/// Weights uniform in [-0.1, 0.1], biases zero, from a seeded generator.
ToyDecoder make_toy_decoder(int level_count, std::size_t channels, std::uint64_t seed);

/// Fully active seed features uniform in [-1, 1].
FeatureGrid make_seed_features(std::size_t height, std::size_t width, std::size_t channels,
                               std::uint64_t seed);

struct DecoderRun {
  QuadForest forest;
  std::vector<FlopReport> conv_flops;  // indexed by level
  std::vector<FlopReport> head_flops;  // indexed by level
  FlopReport total;
};

/**
 * Coarse-to-fine sparse decoding. At each level: nearest-neighbour 2x upsampling of the
 * previous features onto the active sites, submanifold conv, sigmoid prediction head
 * mapped to [d_min, d_max]. The prediction becomes the level's slice and sparsify() on
 * it gates the next level.
 */
DecoderRun toy_decoder_forward(const FeatureGrid& seed, const ToyDecoder& decoder, double tau);

}  // namespace qdepth
