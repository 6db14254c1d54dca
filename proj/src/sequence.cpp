#include "fmdt/sequence.hpp"

#include <algorithm>
#include <stdexcept>

namespace fmdt {

namespace {

// Glob match supporting "*" and "?", anchored at both ends.
bool glob_match(const char* pat, const char* str) {
  if (*pat == '\0') return *str == '\0';
  if (*pat == '*') {
    for (;; ++str) {
      if (glob_match(pat + 1, str)) return true;
      if (*str == '\0') return false;
    }
  }
  if (*str == '\0') return false;
  if (*pat == '?' || *pat == *str) return glob_match(pat + 1, str + 1);
  return false;
}

}  // namespace

std::vector<std::filesystem::path> list_sequence(const std::filesystem::path& dir,
                                                 const std::string& pattern) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error(dir.string() + ": no such directory");

  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (glob_match(pattern.c_str(), name.c_str())) paths.push_back(entry.path());
  }
  if (paths.empty())
    throw std::runtime_error(dir.string() + ": no frames matched pattern \"" + pattern + "\"");

  std::sort(paths.begin(), paths.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return paths;
}

SequenceReader::SequenceReader(const std::filesystem::path& dir, const std::string& pattern)
    : paths_(list_sequence(dir, pattern)) {}

std::optional<GrayFrame> SequenceReader::next() {
  if (cursor_ >= paths_.size()) return std::nullopt;
  GrayFrame frame = read_pgm(paths_[cursor_]);
  frame.index = static_cast<int>(cursor_);
  if (width_ < 0) {
    width_ = frame.width;
    height_ = frame.height;
  } else if (frame.width != width_ || frame.height != height_) {
    throw std::runtime_error(paths_[cursor_].string() + ": frame " + std::to_string(cursor_) +
                             " dimension mismatch (" + std::to_string(frame.width) + "x" +
                             std::to_string(frame.height) + " vs " + std::to_string(width_) +
                             "x" + std::to_string(height_) + ")");
  }
  ++cursor_;
  return frame;
}

}  // namespace fmdt
