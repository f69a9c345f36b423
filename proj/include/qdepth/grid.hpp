#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qdepth {

/**
 * Row-major dense 2D grid.
 */
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : h_(height), w_(width), data_(height * width, fill) {}

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t y, std::size_t x) { return data_[y * w_ + x]; }
  const T& operator()(std::size_t y, std::size_t x) const { return data_[y * w_ + x]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Grid& other) const { return h_ == other.h_ && w_ == other.w_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<T> data_;
};

/// Dense disparity (inverse depth) map, non-negative and finite.
using DisparityGrid = Grid<double>;

/// Binary per-cell flags stored as 0/1 bytes.
using Mask = Grid<std::uint8_t>;

/**
 * Interleaved H x W x C image. Photometric operations expect intensities in [0, 1].
 */
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
      : h_(height), w_(width), c_(channels), data_(height * width * channels, fill) {}

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t channels() const { return c_; }

  double& operator()(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * w_ + x) * c_ + c];
  }
  double operator()(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * w_ + x) * c_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return h_ == other.h_ && w_ == other.w_ && c_ == other.c_;
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::size_t c_ = 0;
  std::vector<double> data_;
};

}  // namespace qdepth
