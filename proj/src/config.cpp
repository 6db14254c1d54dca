#include "fmdt/config.hpp"

#include <stdexcept>

namespace fmdt {

PipelineConfig default_config() { return PipelineConfig{}; }

void validate(const PipelineConfig& cfg) {
  auto reject = [](const char* msg) { throw std::invalid_argument(msg); };

  if (cfg.tau_low < 0 || cfg.tau_high > 255) reject("thresholds must lie in [0, 255]");
  if (cfg.tau_low >= cfg.tau_high) reject("thr-low must be < thr-high");
  if (cfg.s_min < 0) reject("surface-min must be >= 0");
  if (cfg.s_min > cfg.s_max) reject("surface-min must be <= surface-max");
  if (cfg.knn_k < 1) reject("knn-k must be >= 1");
  if (cfg.knn_ratio_max < 1.0) reject("knn-ratio must be >= 1");
  if (cfg.sigma_factor <= 0.0) reject("sigma-factor must be > 0");
  if (cfg.angle_max_deg < 0.0 || cfg.angle_max_deg > 180.0)
    reject("angle-max must lie in [0, 180]");
  if (cfg.extrap_max < 0) reject("extrap-max must be >= 0");
  if (cfg.track_min < 1) reject("track-min must be >= 1");
  if (cfg.star_min < 1) reject("star-min must be >= 1");
  if (cfg.residual_max <= 0.0) reject("residual-max must be > 0");
  if (cfg.maxred_radius < 0) reject("maxred-radius must be >= 0");
  if (cfg.rho_bin_width <= 0.0) reject("rho-bin-width must be > 0");
  if (cfg.connectivity != 4 && cfg.connectivity != 8) reject("connectivity must be 4 or 8");
}

}  // namespace fmdt
