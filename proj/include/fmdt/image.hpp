#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fmdt {

/// One 8-bit grayscale frame, row-major.
struct GrayFrame {
  int index = 0;
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayFrame() = default;
  GrayFrame(int w, int h, uint8_t fill = 0, int idx = 0)
      : index(idx), width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  const uint8_t* row(int y) const { return pixels.data() + static_cast<size_t>(y) * width; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool same_dims(const GrayFrame& o) const { return width == o.width && height == o.height; }
};

/// Binary foreground mask, one byte per pixel (0 or 1).
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h, 0) {}

  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// Reads a binary PGM ("P5", maxval <= 255). Throws std::runtime_error on
/// malformed input or unsupported bit depth.
GrayFrame read_pgm(const std::filesystem::path& path);

/// Writes a binary PGM ("P5", maxval 255).
void write_pgm(const GrayFrame& frame, const std::filesystem::path& path);

}  // namespace fmdt
