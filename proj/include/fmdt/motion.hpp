#pragma once

#include <span>
#include <vector>

#include "fmdt/geometry.hpp"

namespace fmdt {

/// Estimated inter-frame rigid motion with registration-error statistics.
struct RigidMotion {
  RigidTransform transform;
  double mean_err = 0.0;
  double std_err = 0.0;
  double geo_mean_err = 0.0;
  int n_points = 0;
  int pass = 1;
  bool degraded = false;  // too few points for the requested fit
};

struct ErrorStats {
  std::vector<double> e;  // per-pair Euclidean residual
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double geo_mean = 0.0;
};

/// Least-squares 2-D rigid fit (closed form): src and dst are matched point
/// lists. Empty input yields the identity flagged degraded; a single pair
/// yields a pure translation.
RigidMotion estimate_rigid(std::span<const Vec2> src, std::span<const Vec2> dst);

/// Residuals e_k = |T(src_k) - dst_k| with mean and population stddev.
ErrorStats registration_errors(std::span<const Vec2> src, std::span<const Vec2> dst,
                               const RigidTransform& transform);

/// Moving iff |e_k - mean| > sigma_factor * stddev. stddev == 0 flags nothing.
std::vector<bool> flag_outliers(const std::vector<double>& errors, double mean, double stddev,
                                double sigma_factor);

struct TwoPassResult {
  RigidMotion motion1;            // pass-1 fit over all pairs
  RigidMotion motion;             // pass-2 fit (or pass-1 fallback, flagged degraded)
  std::vector<bool> stationary1;  // pass-1 inlier mask
  std::vector<bool> moving;       // final flags under the returned motion
  ErrorStats errors;              // final residuals of all pairs under the returned motion
};

/// Pass 1 fits all pairs; outliers are flagged and excluded; pass 2 refits on
/// the stationary subset and all pairs are re-flagged under the refined
/// transform. Falls back to the pass-1 fit when fewer than two stationary
/// pairs remain.
TwoPassResult two_pass_motion(std::span<const Vec2> src, std::span<const Vec2> dst,
                              double sigma_factor);

}  // namespace fmdt
