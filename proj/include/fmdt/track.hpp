#pragma once

#include <span>
#include <string>
#include <vector>

#include "fmdt/config.hpp"
#include "fmdt/detect.hpp"
#include "fmdt/geometry.hpp"
#include "fmdt/motion.hpp"

namespace fmdt {

struct BBox {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

struct Observation {
  int frame = 0;
  Vec2 pos;
  int64_t surface = 0;
  BBox bbox;
  bool flagged = false;       // moving per the outlier rule, with measurable motion
  bool extrapolated = false;  // predicted, not detected
};

enum class TrackState { candidate, meteor, star, noise };

const char* to_string(TrackState s);

struct Track {
  int id = 0;
  std::vector<Observation> obs;
  TrackState state = TrackState::candidate;
  int extrap_count = 0;        // current run of extrapolated observations
  double fit_residual = 0.0;   // mean orthogonal point-to-line distance, px
  double rho = 0.0;            // last flatness annotation from the ellipse chain (0 = none)

  int frame_begin() const { return obs.front().frame; }
  int frame_end() const { return obs.back().frame; }
};

/// Mean orthogonal distance of the points to their total-least-squares line
/// (the principal axis of the centered covariance). Throws on fewer than two
/// distinct points.
double line_fit_residual(std::span<const Vec2> points);

/// Per-association tracking input for one frame pair: indices into the two
/// detection vectors, the final moving flag, and the motion-compensated
/// displacement of the target relative to the transformed source.
struct AssocObservation {
  int from = 0;
  int to = 0;
  bool moving = false;
  Vec2 displacement;
};

/// Frame-ordered track builder. Feed one frame pair at a time, strictly in
/// order; finish() closes every live track and classifies leftovers.
class Tracker {
 public:
  explicit Tracker(const PipelineConfig& cfg) : cfg_(cfg) {}

  /// Processes associations of the pair (frame_index - 1, frame_index).
  void update(const std::vector<Detection>& dets_prev, const std::vector<Detection>& dets_cur,
              const std::vector<AssocObservation>& assocs, const RigidTransform& motion,
              int frame_index);

  /// Annotates the live track whose observation at `frame` is nearest to
  /// `pos` (within the component bounding box) with a flatness value.
  void annotate_rho(int frame, Vec2 pos, double rho);

  void finish();

  const std::vector<Track>& finished_tracks() const { return finished_; }
  size_t live_count() const { return live_.size(); }

  /// Copies of the live tracks, sorted by id (inspection and tests).
  std::vector<Track> live_snapshot() const;

 private:
  struct LiveTrack {
    Track track;
    Vec2 velocity;          // last motion-compensated displacement, px/frame
    bool has_velocity = false;
    int consecutive_moving = 0;
    bool ever_moving = false;
    int real_obs = 0;
    int tail_det = -1;      // index of the tail detection in the current frame, -1 if predicted
  };

  void append_real(LiveTrack& t, const Detection& det, bool moving, Vec2 disp);
  void classify(LiveTrack& t);
  void close(LiveTrack&& t);
  std::vector<Vec2> real_positions(const Track& t) const;

  PipelineConfig cfg_;
  std::vector<LiveTrack> live_;
  std::vector<Track> finished_;
  int next_id_ = 1;
  int last_frame_ = -1;
};

}  // namespace fmdt
