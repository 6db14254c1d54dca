#include "fmdt/detect.hpp"

#include <algorithm>

namespace fmdt {

HysteresisResult hysteresis_components(const GrayFrame& frame, const PipelineConfig& cfg) {
  // The high foreground is a subset of the low foreground (tau_high >
  // tau_low), so every high run lies inside exactly one low run. Marking the
  // low component containing each high run realizes the set intersection of
  // the two component forests on runs.
  HysteresisResult out;
  out.low = label(threshold_runs(frame, cfg.tau_low), cfg.connectivity);
  out.keep.assign(out.low.n_labels, 0);

  const std::vector<RunSegment> high = threshold_runs(frame, cfg.tau_high);
  const std::vector<RunSegment>& low = out.low.runs;

  size_t li = 0;
  for (const RunSegment& h : high) {
    while (li < low.size() &&
           (low[li].row < h.row || (low[li].row == h.row && low[li].x_end < h.x_begin)))
      ++li;
    // low[li] is the first low run not left of h; containment is guaranteed.
    out.keep[out.low.label_of[li] - 1] = 1;
  }
  return out;
}

std::vector<Detection> hysteresis_detect(const GrayFrame& frame, const PipelineConfig& cfg) {
  const HysteresisResult hys = hysteresis_components(frame, cfg);
  std::vector<CCStats> stats = analyze(hys.low);

  std::vector<Detection> dets;
  for (CCStats& s : stats)
    if (hys.keep[s.label - 1]) dets.push_back({std::move(s), frame.index});
  return dets;
}

std::vector<Detection> surface_filter(std::vector<Detection> dets, int64_t s_min, int64_t s_max) {
  std::erase_if(dets, [&](const Detection& d) {
    return d.cc.surface < s_min || d.cc.surface > s_max;
  });
  return dets;
}

}  // namespace fmdt
