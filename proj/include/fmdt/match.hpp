#pragma once

#include <vector>

#include "fmdt/detect.hpp"
#include "fmdt/geometry.hpp"

namespace fmdt {

/// A matched pair of detections between frames t and t+1. Indices refer to
/// the input detection vectors. e_k is filled by the motion stage.
struct Association {
  int from = 0;
  int to = 0;
  double distance = 0.0;
  double e_k = 0.0;
};

/// Greedy mutual nearest-neighbor association. Candidate pairs (a, b) with b
/// among the k nearest neighbors of a are processed in ascending centroid
/// distance (ties broken on the pair's component labels); a pair is accepted
/// iff both endpoints are free and max(Sa,Sb)/min(Sa,Sb) <= ratio_max.
std::vector<Association> knn_match(const std::vector<Detection>& dets_t,
                                   const std::vector<Detection>& dets_t1, int k,
                                   double ratio_max);

}  // namespace fmdt
