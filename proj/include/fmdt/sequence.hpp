#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fmdt/image.hpp"

namespace fmdt {

/// Files under `dir` matching the glob `pattern` ("*" and "?" wildcards),
/// sorted by filename. Throws if the directory is missing or nothing matches.
std::vector<std::filesystem::path> list_sequence(const std::filesystem::path& dir,
                                                 const std::string& pattern);

/// Streams a directory of PGM frames in lexicographic filename order,
/// assigning contiguous indices from 0. All frames must share dimensions.
class SequenceReader {
 public:
  SequenceReader(const std::filesystem::path& dir, const std::string& pattern);

  /// Next frame, or nullopt at end of sequence. Throws on decode errors or
  /// dimension mismatch.
  std::optional<GrayFrame> next();

  size_t frame_count() const { return paths_.size(); }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  std::vector<std::filesystem::path> paths_;
  size_t cursor_ = 0;
  int width_ = -1;
  int height_ = -1;
};

}  // namespace fmdt
