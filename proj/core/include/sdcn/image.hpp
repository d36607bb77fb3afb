#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdcn/types.hpp"

namespace sdcn {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> pixels;  // width*height

  std::uint8_t at(Index i, Index j) const {
    return pixels[static_cast<std::size_t>(j * width + i)];
  }
};

/// 8-bit RGB raster, interleaved, row-major.
struct RgbImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> pixels;  // width*height*3

  const std::uint8_t* at(Index i, Index j) const {
    return pixels.data() + static_cast<std::size_t>(3 * (j * width + i));
  }
  std::uint8_t* at(Index i, Index j) {
    return pixels.data() + static_cast<std::size_t>(3 * (j * width + i));
  }
};

// Binary portable graymap / pixmap (P5 / P6), maxval 255.
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& img, const std::string& path);
RgbImage read_ppm(const std::string& path);
void write_ppm(const RgbImage& img, const std::string& path);

}  // namespace sdcn
