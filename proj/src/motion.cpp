#include "fmdt/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace fmdt {

/*
  Rigid fit minimizing sum |R(theta) p_k + t - q_k|^2.

  With both point sets centered on their centroids (a_k = p_k - pc,
  b_k = q_k - qc), the optimal rotation satisfies

      theta = atan2( sum(a_k x b_k), sum(a_k . b_k) )

  and the translation maps the rotated source centroid onto the destination
  centroid: t = qc - R(theta) pc.
*/
RigidMotion estimate_rigid(std::span<const Vec2> src, std::span<const Vec2> dst) {
  if (src.size() != dst.size())
    throw std::invalid_argument("estimate_rigid: point lists differ in length");

  RigidMotion motion;
  motion.n_points = static_cast<int>(src.size());

  if (src.empty()) {
    motion.degraded = true;
    return motion;
  }

  const double n = static_cast<double>(src.size());
  Vec2 pc{0, 0}, qc{0, 0};
  for (size_t k = 0; k < src.size(); ++k) {
    pc = pc + src[k];
    qc = qc + dst[k];
  }
  pc = pc * (1.0 / n);
  qc = qc * (1.0 / n);

  if (src.size() == 1) {
    motion.transform = {0.0, qc.x - pc.x, qc.y - pc.y};
    motion.degraded = true;
    return motion;
  }

  double cross = 0.0, dot = 0.0;
  for (size_t k = 0; k < src.size(); ++k) {
    const Vec2 a = src[k] - pc;
    const Vec2 b = dst[k] - qc;
    cross += a.cross(b);
    dot += a.dot(b);
  }

  // All-coincident source points leave the rotation unconstrained; keep 0.
  const double theta = (cross == 0.0 && dot == 0.0) ? 0.0 : std::atan2(cross, dot);
  const double c = std::cos(theta), s = std::sin(theta);
  motion.transform = {theta, qc.x - (c * pc.x - s * pc.y), qc.y - (s * pc.x + c * pc.y)};
  return motion;
}

ErrorStats registration_errors(std::span<const Vec2> src, std::span<const Vec2> dst,
                               const RigidTransform& transform) {
  if (src.size() != dst.size())
    throw std::invalid_argument("registration_errors: point lists differ in length");

  ErrorStats stats;
  stats.e.reserve(src.size());
  for (size_t k = 0; k < src.size(); ++k)
    stats.e.push_back(distance(transform.apply(src[k]), dst[k]));
  if (stats.e.empty()) return stats;

  double sum = 0.0;
  for (double e : stats.e) sum += e;
  stats.mean = sum / static_cast<double>(stats.e.size());

  double var = 0.0;
  for (double e : stats.e) var += (e - stats.mean) * (e - stats.mean);
  stats.stddev = std::sqrt(var / static_cast<double>(stats.e.size()));

  // Geometric mean over strictly positive residuals (diagnostic only).
  double log_sum = 0.0;
  size_t n_pos = 0;
  for (double e : stats.e)
    if (e > 0.0) {
      log_sum += std::log(e);
      ++n_pos;
    }
  stats.geo_mean = n_pos > 0 ? std::exp(log_sum / static_cast<double>(n_pos)) : 0.0;
  return stats;
}

std::vector<bool> flag_outliers(const std::vector<double>& errors, double mean, double stddev,
                                double sigma_factor) {
  if (sigma_factor <= 0.0) throw std::invalid_argument("flag_outliers: sigma_factor must be > 0");
  std::vector<bool> moving(errors.size(), false);
  // A spread at rounding-noise level means all residuals are identical.
  if (stddev <= 1e-12) return moving;
  for (size_t k = 0; k < errors.size(); ++k)
    moving[k] = std::abs(errors[k] - mean) > sigma_factor * stddev;
  return moving;
}

namespace {

// Mean/stddev of residuals restricted to a subset mask.
std::pair<double, double> subset_stats(const std::vector<double>& e,
                                       const std::vector<bool>& in_subset) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t k = 0; k < e.size(); ++k)
    if (in_subset[k]) {
      sum += e[k];
      ++n;
    }
  if (n == 0) return {0.0, 0.0};
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (size_t k = 0; k < e.size(); ++k)
    if (in_subset[k]) var += (e[k] - mean) * (e[k] - mean);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

TwoPassResult two_pass_motion(std::span<const Vec2> src, std::span<const Vec2> dst,
                              double sigma_factor) {
  TwoPassResult out;

  out.motion1 = estimate_rigid(src, dst);
  ErrorStats err1 = registration_errors(src, dst, out.motion1.transform);
  out.motion1.mean_err = err1.mean;
  out.motion1.std_err = err1.stddev;
  out.motion1.geo_mean_err = err1.geo_mean;

  const std::vector<bool> moving1 = flag_outliers(err1.e, err1.mean, err1.stddev, sigma_factor);
  out.stationary1.resize(moving1.size());
  for (size_t k = 0; k < moving1.size(); ++k) out.stationary1[k] = !moving1[k];

  std::vector<Vec2> src2, dst2;
  for (size_t k = 0; k < src.size(); ++k)
    if (out.stationary1[k]) {
      src2.push_back(src[k]);
      dst2.push_back(dst[k]);
    }

  if (src2.size() < 2) {
    out.motion = out.motion1;
    out.motion.degraded = true;
    out.moving = moving1;
    out.errors = std::move(err1);
    return out;
  }

  RigidMotion pass2 = estimate_rigid(src2, dst2);
  pass2.pass = 2;
  out.errors = registration_errors(src, dst, pass2.transform);

  // The logged statistics describe the stationary pairs the fit was built on;
  // re-flagging uses the statistics over all recomputed residuals.
  const auto [mean_in, std_in] = subset_stats(out.errors.e, out.stationary1);
  pass2.mean_err = mean_in;
  pass2.std_err = std_in;
  pass2.geo_mean_err = out.errors.geo_mean;
  pass2.n_points = static_cast<int>(src2.size());

  out.moving = flag_outliers(out.errors.e, out.errors.mean, out.errors.stddev, sigma_factor);
  out.motion = pass2;
  return out;
}

}  // namespace fmdt
