#pragma once

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "fmdt/ccl.hpp"
#include "fmdt/image.hpp"

namespace fmdt {

/// Ellipse radii from second-order central moments; rho = a/b is the
/// flatness ratio (+inf sentinel when b == 0).
struct EllipseStats {
  double a = 0.0;
  double b = 0.0;
  double rho = 1.0;

  bool rho_finite() const { return rho != std::numeric_limits<double>::infinity(); }
};

/// Per-pixel max over a temporal window of 2r+1 frames of equal dimensions;
/// the composite takes the center frame's index.
GrayFrame max_reduce(std::span<const GrayFrame> window);

/// Radii are two standard deviations along the principal axes: a = 2*sqrt(l1),
/// b = 2*sqrt(l2) with l1 >= l2 the covariance eigenvalues. A single-pixel
/// component yields a = b = 0 and rho = 1.
EllipseStats ellipse_axes(const CCStats& cc);

/// Histogram of flatness ratios: bin i counts finite rho in
/// [1 + i*w, 1 + (i+1)*w); infinite ratios land in the overflow bin.
struct FlatnessHistogram {
  double bin_width = 0.25;
  std::vector<int64_t> bins;
  int64_t overflow = 0;

  int64_t total() const;
};

FlatnessHistogram flatness_histogram(std::span<const EllipseStats> stats, double bin_width);

void write_csv(const FlatnessHistogram& hist, const std::filesystem::path& path);
void write_svg(const FlatnessHistogram& hist, const std::filesystem::path& path);

}  // namespace fmdt
