#pragma once

#include <cstdint>
#include <vector>

#include "fmdt/image.hpp"

namespace fmdt {

/// Maximal horizontal interval of foreground pixels: row y, columns
/// [x_begin, x_end] inclusive.
struct RunSegment {
  int row = 0;
  int x_begin = 0;
  int x_end = 0;

  int length() const { return x_end - x_begin + 1; }
  bool operator==(const RunSegment&) const = default;
};

/// Runs of one frame with their resolved component labels, dense 1..n_labels
/// in first-touch raster order.
struct LabeledRuns {
  std::vector<RunSegment> runs;
  std::vector<int> label_of;  // parallel to runs
  int n_labels = 0;
};

/// Per-component accumulators. Sums are exact 64-bit integers so features
/// can be checked against a per-pixel oracle with integer equality.
struct CCStats {
  int label = 0;
  int64_t surface = 0;
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  int64_t sx = 0, sy = 0;
  int64_t sx2 = 0, sy2 = 0, sxy = 0;

  double cx() const { return static_cast<double>(sx) / static_cast<double>(surface); }
  double cy() const { return static_cast<double>(sy) / static_cast<double>(surface); }
};

/// Foreground iff intensity > tau.
BinaryMask binarize(const GrayFrame& frame, int tau);

/// Row-major maximal foreground runs of a mask.
std::vector<RunSegment> encode_runs(const BinaryMask& mask);

/// Runs of pixels with intensity > tau, extracted in a single scan without
/// materializing the mask.
std::vector<RunSegment> threshold_runs(const GrayFrame& frame, int tau);

/// Connected-component labels over the run-adjacency graph. Runs must be
/// sorted by (row, x_begin). Under 4-connectivity two runs in consecutive
/// rows are adjacent iff their column intervals overlap; 8-connectivity
/// extends the overlap test by one column on each side.
LabeledRuns label(std::vector<RunSegment> runs, int connectivity);

/// Per-component feature accumulation from closed-form per-run sums.
/// Work is proportional to the number of runs, not pixels.
std::vector<CCStats> analyze(const LabeledRuns& labeled);

/// Debug rendering of a labeling: pixel value = 1 + (label - 1) % 255.
GrayFrame render_labels(const LabeledRuns& labeled, int width, int height);

}  // namespace fmdt
