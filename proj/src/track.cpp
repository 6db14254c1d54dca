#include "fmdt/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fmdt/log.hpp"

namespace fmdt {

// Displacements shorter than this carry no usable direction; the angle test
// is skipped below it, and such observations never count toward the meteor
// rule (a registration-error flag without measurable motion is noise).
constexpr double kMinDisplacementPx = 1.0;

// Re-acquisition search radius around the predicted position.
static double reacquire_radius(double speed) { return std::max(3.0, 2.0 * speed); }

const char* to_string(TrackState s) {
  switch (s) {
    case TrackState::candidate: return "candidate";
    case TrackState::meteor: return "meteor";
    case TrackState::star: return "star";
    case TrackState::noise: return "noise";
  }
  return "?";
}

double line_fit_residual(std::span<const Vec2> points) {
  if (points.size() < 2) throw std::invalid_argument("line_fit_residual: need >= 2 points");

  Vec2 c{0, 0};
  for (const Vec2& p : points) c = c + p;
  c = c * (1.0 / static_cast<double>(points.size()));

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Vec2& p : points) {
    const Vec2 d = p - c;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    sxy += d.x * d.y;
  }
  if (sxx == 0.0 && syy == 0.0)
    throw std::invalid_argument("line_fit_residual: all points coincident");

  // Principal axis direction of the covariance; orthogonal residuals make the
  // fit well defined for vertical trajectories.
  const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const Vec2 normal{-std::sin(phi), std::cos(phi)};

  double sum = 0.0;
  for (const Vec2& p : points) sum += std::abs((p - c).dot(normal));
  return sum / static_cast<double>(points.size());
}

std::vector<Vec2> Tracker::real_positions(const Track& t) const {
  std::vector<Vec2> pts;
  for (const Observation& o : t.obs)
    if (!o.extrapolated) pts.push_back(o.pos);
  return pts;
}

void Tracker::append_real(LiveTrack& t, const Detection& det, bool moving, Vec2 disp) {
  const bool counted_moving = moving && disp.norm() >= kMinDisplacementPx;
  t.track.obs.push_back({det.frame_index,
                         centroid_of(det),
                         det.cc.surface,
                         {det.cc.x_min, det.cc.y_min, det.cc.x_max, det.cc.y_max},
                         counted_moving,
                         false});
  t.track.extrap_count = 0;
  t.velocity = disp;
  t.has_velocity = true;
  t.real_obs += 1;
  t.consecutive_moving = counted_moving ? t.consecutive_moving + 1 : 0;
  t.ever_moving = t.ever_moving || counted_moving;
  classify(t);
}

void Tracker::classify(LiveTrack& t) {
  if (t.track.state == TrackState::candidate && t.consecutive_moving >= cfg_.track_min) {
    const std::vector<Vec2> pts = real_positions(t.track);
    const double residual = line_fit_residual(pts);
    if (residual <= cfg_.residual_max) {
      t.track.state = TrackState::meteor;
      t.track.fit_residual = residual;
    }
  }
  if (t.track.state == TrackState::candidate && !t.ever_moving && t.real_obs >= cfg_.star_min)
    t.track.state = TrackState::star;
}

void Tracker::close(LiveTrack&& t) {
  Track track = std::move(t.track);

  // Trailing predictions were never confirmed; drop them.
  while (!track.obs.empty() && track.obs.back().extrapolated) track.obs.pop_back();
  if (track.obs.empty()) return;

  const std::vector<Vec2> pts = real_positions(track);
  bool distinct = false;
  for (size_t i = 1; i < pts.size() && !distinct; ++i)
    distinct = pts[i].x != pts[0].x || pts[i].y != pts[0].y;
  track.fit_residual = distinct ? line_fit_residual(pts) : 0.0;

  if (track.state == TrackState::meteor && track.fit_residual > cfg_.residual_max) {
    FMDT_LOG_DEBUG("track %d demoted: residual %.3f px", track.id, track.fit_residual);
    track.state = TrackState::noise;
  }
  if (track.state == TrackState::candidate) track.state = TrackState::noise;
  finished_.push_back(std::move(track));
}

void Tracker::update(const std::vector<Detection>& dets_prev,
                     const std::vector<Detection>& dets_cur,
                     const std::vector<AssocObservation>& assocs, const RigidTransform& motion,
                     int frame_index) {
  if (last_frame_ >= 0 && frame_index != last_frame_ + 1)
    throw std::logic_error("Tracker::update: frame " + std::to_string(frame_index) +
                           " out of order (expected " + std::to_string(last_frame_ + 1) + ")");
  last_frame_ = frame_index;

  // Association indexed by its source detection.
  std::vector<int> assoc_of_prev(dets_prev.size(), -1);
  for (size_t a = 0; a < assocs.size(); ++a) assoc_of_prev[assocs[a].from] = static_cast<int>(a);

  std::vector<int> track_of_prev(dets_prev.size(), -1);
  for (size_t i = 0; i < live_.size(); ++i)
    if (live_[i].tail_det >= 0) track_of_prev[live_[i].tail_det] = static_cast<int>(i);

  std::vector<bool> consumed(dets_cur.size(), false);
  std::vector<bool> extended(live_.size(), false);
  std::vector<bool> assoc_handled(assocs.size(), false);

  // 1. Extend tracks whose tail detection is the source of an association,
  //    subject to the angle constraint in motion-compensated coordinates.
  for (size_t i = 0; i < live_.size(); ++i) {
    LiveTrack& t = live_[i];
    if (t.tail_det < 0) continue;
    const int a = assoc_of_prev[t.tail_det];
    if (a < 0) continue;
    const AssocObservation& assoc = assocs[a];

    bool angle_ok = true;
    if (t.has_velocity && t.velocity.norm() >= kMinDisplacementPx) {
      const Vec2 prev_dir = motion.rotate(t.velocity);
      angle_ok = angle_between_deg(prev_dir, assoc.displacement) <= cfg_.angle_max_deg;
    }
    if (angle_ok) {
      append_real(t, dets_cur[assoc.to], assoc.moving, assoc.displacement);
      t.tail_det = assoc.to;
      consumed[assoc.to] = true;
      extended[i] = true;
      assoc_handled[a] = true;
    }
    // Angle refused: the association stays unhandled and opens a new
    // candidate below; this track falls through to re-acquisition or
    // extrapolation.
  }

  // 2. Remaining associations open candidate tracks of length 2.
  for (size_t a = 0; a < assocs.size(); ++a) {
    if (assoc_handled[a] || consumed[assocs[a].to]) continue;
    const AssocObservation& assoc = assocs[a];
    const Detection& from = dets_prev[assoc.from];
    LiveTrack t;
    t.track.id = next_id_++;
    t.track.obs.push_back({frame_index - 1,
                           centroid_of(from),
                           from.cc.surface,
                           {from.cc.x_min, from.cc.y_min, from.cc.x_max, from.cc.y_max},
                           false,
                           false});
    t.real_obs = 1;
    append_real(t, dets_cur[assoc.to], assoc.moving, assoc.displacement);
    t.tail_det = assoc.to;
    consumed[assoc.to] = true;
    live_.push_back(std::move(t));
  }
  extended.resize(live_.size(), true);  // freshly opened tracks count as extended

  // 3. Unextended tracks try to re-acquire an unconsumed detection near the
  //    predicted position, then fall back to extrapolation.
  std::vector<size_t> to_close;
  for (size_t i = 0; i < live_.size(); ++i) {
    if (extended[i]) continue;
    LiveTrack& t = live_[i];

    const Vec2 last = t.track.obs.back().pos;
    const Vec2 predicted =
        t.has_velocity ? motion.apply(last + t.velocity) : motion.apply(last);

    int best = -1;
    double best_dist = reacquire_radius(t.has_velocity ? t.velocity.norm() : 0.0);
    for (size_t j = 0; j < dets_cur.size(); ++j) {
      if (consumed[j]) continue;
      const double d = distance(centroid_of(dets_cur[j]), predicted);
      if (d < best_dist) {
        const Vec2 disp = centroid_of(dets_cur[j]) - motion.apply(last);
        if (t.has_velocity && t.velocity.norm() >= kMinDisplacementPx &&
            angle_between_deg(motion.rotate(t.velocity), disp) > cfg_.angle_max_deg)
          continue;
        best = static_cast<int>(j);
        best_dist = d;
      }
    }

    if (best >= 0) {
      const Vec2 disp = centroid_of(dets_cur[best]) - motion.apply(last);
      append_real(t, dets_cur[best], false, disp);
      t.tail_det = best;
      consumed[best] = true;
      continue;
    }

    if (t.track.extrap_count >= cfg_.extrap_max) {
      to_close.push_back(i);
      continue;
    }

    // Predict: advance by the last compensated velocity, then apply the
    // global motion; the stored velocity rotates into the new frame.
    const Observation& tail = t.track.obs.back();
    Observation predicted_obs = tail;
    predicted_obs.frame = frame_index;
    predicted_obs.pos = predicted;
    predicted_obs.flagged = false;
    predicted_obs.extrapolated = true;
    const int rx = (tail.bbox.x_max - tail.bbox.x_min) / 2;
    const int ry = (tail.bbox.y_max - tail.bbox.y_min) / 2;
    const int cx = static_cast<int>(std::lround(predicted.x));
    const int cy = static_cast<int>(std::lround(predicted.y));
    predicted_obs.bbox = {cx - rx, cy - ry, cx + rx, cy + ry};
    t.track.obs.push_back(predicted_obs);
    t.track.extrap_count += 1;
    t.velocity = motion.rotate(t.velocity);
    t.consecutive_moving = 0;
    t.tail_det = -1;
  }

  for (auto it = to_close.rbegin(); it != to_close.rend(); ++it) {
    close(std::move(live_[*it]));
    live_.erase(live_.begin() + static_cast<long>(*it));
  }
}

void Tracker::annotate_rho(int frame, Vec2 pos, double rho) {
  double best = 1.5;  // px, centroid agreement between chains
  LiveTrack* hit = nullptr;
  for (LiveTrack& t : live_) {
    for (auto it = t.track.obs.rbegin(); it != t.track.obs.rend(); ++it) {
      if (it->frame < frame) break;
      if (it->frame != frame) continue;
      const double d = distance(it->pos, pos);
      if (d < best) {
        best = d;
        hit = &t;
      }
    }
  }
  if (hit != nullptr) hit->track.rho = rho;
}

std::vector<Track> Tracker::live_snapshot() const {
  std::vector<Track> out;
  out.reserve(live_.size());
  for (const LiveTrack& t : live_) out.push_back(t.track);
  std::sort(out.begin(), out.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  return out;
}

void Tracker::finish() {
  for (LiveTrack& t : live_) close(std::move(t));
  live_.clear();
  std::sort(finished_.begin(), finished_.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });
}

}  // namespace fmdt
