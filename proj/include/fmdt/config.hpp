#pragma once

#include <cstdint>

namespace fmdt {

/// Tunable parameters of the detection chain. Defaults favor recall.
struct PipelineConfig {
  // Hysteresis thresholds; a pixel is foreground iff intensity > tau.
  int tau_low = 55;
  int tau_high = 70;

  // Surface bounds applied to detected components, in pixels.
  int64_t s_min = 3;
  int64_t s_max = 1000;

  // Frame-to-frame association.
  int knn_k = 3;
  double knn_ratio_max = 3.0;

  // Outlier rule: moving iff |e_k - mean| > sigma_factor * stddev.
  double sigma_factor = 1.0;

  // Tracking.
  double angle_max_deg = 20.0;
  int extrap_max = 3;
  int track_min = 3;      // consecutive moving observations to classify meteor
  int star_min = 15;      // never-moving observations to classify star
  double residual_max = 1.0;  // mean line-fit residual allowed for a meteor, px

  // Secondary (ellipse) chain.
  int maxred_radius = 2;
  double rho_bin_width = 0.25;

  // Component connectivity: 4 or 8.
  int connectivity = 8;
};

PipelineConfig default_config();

/// Throws std::invalid_argument with a one-line diagnostic on the first
/// violated constraint.
void validate(const PipelineConfig& cfg);

}  // namespace fmdt
