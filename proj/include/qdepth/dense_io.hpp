#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdepth/grid.hpp"

namespace qdepth {

enum class DenseFormat { pfm, pgm, ppm };

/// Raw samples of a dense file, top row first, interleaved channels.
struct DenseMap {
  DenseFormat format = DenseFormat::pfm;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::uint32_t maxval = 0;  // PGM / PPM only
  std::vector<double> samples;
};

/**
 * Reads PFM ("Pf" grey, "PF" colour; negative scale = little-endian, rows stored
 * bottom-up), binary PGM ("P5", maxval 255 or 65535, 16-bit samples big-endian) or
 * binary PPM ("P6", maxval 255). Non-finite samples are rejected.
 */
DenseMap read_dense(std::istream& in);
DenseMap read_dense(const std::string& path);

/**
 * Single-channel disparity. PGM samples are divided by `pgm_divisor`, which defaults to
 * 256 for 16-bit files and 1 for 8-bit files.
 */
DisparityGrid to_disparity(const DenseMap& map, std::optional<double> pgm_divisor = {});

/// Intensities in [0, 1]; integer formats are divided by maxval.
Image to_image(const DenseMap& map);

DisparityGrid read_disparity(const std::string& path, std::optional<double> pgm_divisor = {});
Image read_image(const std::string& path);

/// Writes a grey little-endian PFM. Values are stored as binary32.
void write_pfm(const DisparityGrid& grid, std::ostream& out);
void write_pfm(const DisparityGrid& grid, const std::string& path);

/// Writes a colour PFM for 3-channel images or a grey PFM for 1-channel images.
void write_pfm(const Image& image, std::ostream& out);

/// 8-bit binary PPM; 1-channel images are replicated to grey RGB.
void write_ppm(const Image& image, std::ostream& out);
void write_ppm(const Image& image, const std::string& path);

}  // namespace qdepth
