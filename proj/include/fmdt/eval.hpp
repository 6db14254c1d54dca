#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fmdt/geometry.hpp"
#include "fmdt/track.hpp"

namespace fmdt {

/// One annotated meteor: endpoints in image coordinates; positions between
/// them are linearly interpolated over the frame range.
struct GroundTruthEntry {
  int id = 0;
  int frame_begin = 0;
  double x_begin = 0.0, y_begin = 0.0;
  int frame_end = 0;
  double x_end = 0.0, y_end = 0.0;

  Vec2 position_at(int frame) const;
};

std::vector<GroundTruthEntry> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::vector<GroundTruthEntry>& truth,
                        const std::filesystem::path& path);

/// Minimal view of a detected track for evaluation: meteor flag plus the
/// per-frame observed positions (real observations only).
struct TrackSummary {
  int id = 0;
  bool is_meteor = false;
  std::vector<std::pair<int, Vec2>> observations;
};

TrackSummary summarize(const Track& track);

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<int> frames_detected;  // per truth meteor
  std::vector<bool> track_matched;   // per meteor-classified input track
  int64_t frames_detected_total = 0;
  int64_t frames_total = 0;  // total truth meteor-frames
};

/// A track matches a truth meteor iff their frame ranges overlap and on at
/// least one overlapping frame the track observation lies within max_dist of
/// the interpolated truth position. Each truth meteor absorbs all matching
/// tracks; tp counts truth meteors with a match, fp tracks matching nothing,
/// fn truth meteors with no match. Only meteor-classified tracks take part.
MatchResult match_tracks(const std::vector<TrackSummary>& tracks,
                         const std::vector<GroundTruthEntry>& truth, double max_dist);

struct EvalReport {
  int tp = 0, fp = 0, fn = 0;
  int meteors_detected = 0, meteors_total = 0;
  int64_t frames_detected = 0, frames_total = 0;
  double meteor_rate = 0.0;  // meteors_detected / meteors_total
  double frame_rate = 0.0;   // frames_detected / frames_total
  double precision = 0.0, recall = 0.0, f_score = 0.0;
  bool degraded = false;  // tp+fp == 0 or tp+fn == 0
};

EvalReport compute_metrics(int tp, int fp, int fn, int64_t frames_detected, int64_t frames_total,
                           int meteors_total);

/// Aligned human-readable table.
void print_report(const EvalReport& report, std::ostream& out);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace fmdt
