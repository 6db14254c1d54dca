#include "fmdt/image.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

namespace fmdt {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

// Reads the next header token, skipping whitespace and '#' comments.
int next_header_int(std::FILE* f, const std::filesystem::path& path, const char* what) {
  int c = std::fgetc(f);
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    } else if (std::isspace(c)) {
      c = std::fgetc(f);
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) fail(path, std::string("malformed PGM header (") + what + ")");
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 30) fail(path, std::string("PGM header value out of range (") + what + ")");
    c = std::fgetc(f);
  }
  if (c != EOF) std::ungetc(c, f);
  return static_cast<int>(value);
}

}  // namespace

GrayFrame read_pgm(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open file");

  char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 'P' || magic[1] != '5')
    fail(path, "not a binary PGM (expected magic \"P5\")");

  const int width = next_header_int(f.get(), path, "width");
  const int height = next_header_int(f.get(), path, "height");
  const int maxval = next_header_int(f.get(), path, "maxval");
  if (width < 1 || height < 1) fail(path, "invalid dimensions");
  if (maxval < 1 || maxval > 255) fail(path, "unsupported bit depth (maxval must be <= 255)");

  // Exactly one whitespace byte separates the header from the raster.
  const int sep = std::fgetc(f.get());
  if (sep == EOF || !std::isspace(sep)) fail(path, "malformed PGM header (raster separator)");

  GrayFrame frame(width, height);
  const size_t n = frame.pixels.size();
  if (std::fread(frame.pixels.data(), 1, n, f.get()) != n) fail(path, "truncated pixel data");
  return frame;
}

void write_pgm(const GrayFrame& frame, const std::filesystem::path& path) {
  if (frame.width < 1 || frame.height < 1 ||
      frame.pixels.size() != static_cast<size_t>(frame.width) * frame.height)
    throw std::invalid_argument("write_pgm: inconsistent frame dimensions");

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open file for writing");

  std::string header = "P5\n" + std::to_string(frame.width) + " " +
                       std::to_string(frame.height) + "\n255\n";
  if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size() ||
      std::fwrite(frame.pixels.data(), 1, frame.pixels.size(), f.get()) != frame.pixels.size())
    fail(path, "write failed");
}

}  // namespace fmdt
