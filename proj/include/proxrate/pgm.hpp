#pragma once

#include <string>

#include "proxrate/problem.hpp"

namespace proxrate {

// Grayscale image with pixel values in [0, 1], row-major.
struct Image {
  int height = 0;
  int width = 0;
  Vec pixels;

  double at(int r, int c) const { return pixels[r * width + c]; }
};

// Reads P2 (ASCII) or P5 (binary) PGM, maxval up to 65535 (two-byte samples
// are big-endian); values are mapped linearly to [0, 1]. Malformed input
// raises FormatError naming the byte offset of the problem.
Image load_pgm(const std::string& path);

// Writes binary P5 at maxval 255; pixels are clamped to [0, 1] and quantized
// with round-half-away-from-zero.
void save_pgm(const Image& img, const std::string& path);

}  // namespace proxrate
