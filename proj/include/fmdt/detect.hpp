#pragma once

#include <vector>

#include "fmdt/ccl.hpp"
#include "fmdt/config.hpp"
#include "fmdt/geometry.hpp"
#include "fmdt/image.hpp"

namespace fmdt {

/// A component that survived hysteresis: geometry and moments come from the
/// low-threshold component; it contains at least one pixel above tau_high.
struct Detection {
  CCStats cc;
  int frame_index = 0;
};

inline Vec2 centroid_of(const Detection& d) { return {d.cc.cx(), d.cc.cy()}; }

/// Low-threshold labeling plus the per-label keep decision, exposed for
/// debugging dumps and pixel-set verification.
struct HysteresisResult {
  LabeledRuns low;
  std::vector<char> keep;  // indexed by label-1
};

HysteresisResult hysteresis_components(const GrayFrame& frame, const PipelineConfig& cfg);

/// Components of the tau_low binarization whose pixel set intersects the
/// tau_high foreground. Surface bounds are not applied here.
std::vector<Detection> hysteresis_detect(const GrayFrame& frame, const PipelineConfig& cfg);

/// Keeps detections with s_min <= surface <= s_max, order preserved.
std::vector<Detection> surface_filter(std::vector<Detection> dets, int64_t s_min, int64_t s_max);

}  // namespace fmdt
