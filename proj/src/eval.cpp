#include "fmdt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fmdt {

Vec2 GroundTruthEntry::position_at(int frame) const {
  if (frame_end == frame_begin) return {x_begin, y_begin};
  const double u = static_cast<double>(frame - frame_begin) /
                   static_cast<double>(frame_end - frame_begin);
  return {x_begin + u * (x_end - x_begin), y_begin + u * (y_end - y_begin)};
}

std::vector<GroundTruthEntry> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open ground-truth file");

  std::vector<GroundTruthEntry> truth;
  std::set<int> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    GroundTruthEntry e;
    std::istringstream ss(line);
    if (!(ss >> e.id >> e.frame_begin >> e.x_begin >> e.y_begin >> e.frame_end >> e.x_end >>
          e.y_end))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'id frame_begin x y frame_end x y'");
    if (e.frame_end < e.frame_begin)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": frame_end < frame_begin");
    if (!ids.insert(e.id).second)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": duplicate meteor id " + std::to_string(e.id));
    truth.push_back(e);
  }
  return truth;
}

void write_ground_truth(const std::vector<GroundTruthEntry>& truth,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << std::setprecision(10);
  for (const GroundTruthEntry& e : truth)
    out << e.id << ' ' << e.frame_begin << ' ' << e.x_begin << ' ' << e.y_begin << ' '
        << e.frame_end << ' ' << e.x_end << ' ' << e.y_end << '\n';
}

TrackSummary summarize(const Track& track) {
  TrackSummary s;
  s.id = track.id;
  s.is_meteor = track.state == TrackState::meteor;
  for (const Observation& o : track.obs)
    if (!o.extrapolated) s.observations.emplace_back(o.frame, o.pos);
  return s;
}

MatchResult match_tracks(const std::vector<TrackSummary>& tracks,
                         const std::vector<GroundTruthEntry>& truth, double max_dist) {
  if (max_dist <= 0.0) throw std::invalid_argument("match_tracks: max_dist must be > 0");

  std::vector<const TrackSummary*> meteors;
  for (const TrackSummary& t : tracks)
    if (t.is_meteor) meteors.push_back(&t);

  MatchResult result;
  result.track_matched.assign(meteors.size(), false);
  result.frames_detected.assign(truth.size(), 0);

  auto observation_hits = [&](const TrackSummary& t, const GroundTruthEntry& m, int frame) {
    for (const auto& [f, pos] : t.observations)
      if (f == frame && distance(pos, m.position_at(frame)) <= max_dist) return true;
    return false;
  };

  for (size_t mi = 0; mi < truth.size(); ++mi) {
    const GroundTruthEntry& m = truth[mi];
    result.frames_total += m.frame_end - m.frame_begin + 1;

    std::set<int> covered;
    bool detected = false;
    for (size_t ti = 0; ti < meteors.size(); ++ti) {
      bool matched = false;
      for (int f = m.frame_begin; f <= m.frame_end; ++f)
        if (observation_hits(*meteors[ti], m, f)) {
          matched = true;
          covered.insert(f);
        }
      if (matched) {
        detected = true;
        result.track_matched[ti] = true;
      }
    }
    if (detected)
      result.tp += 1;
    else
      result.fn += 1;
    result.frames_detected[mi] = static_cast<int>(covered.size());
    result.frames_detected_total += static_cast<int64_t>(covered.size());
  }

  for (bool matched : result.track_matched)
    if (!matched) result.fp += 1;
  return result;
}

EvalReport compute_metrics(int tp, int fp, int fn, int64_t frames_detected, int64_t frames_total,
                           int meteors_total) {
  if (tp < 0 || fp < 0 || fn < 0) throw std::invalid_argument("compute_metrics: negative count");

  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.meteors_detected = tp;
  r.meteors_total = meteors_total > 0 ? meteors_total : tp + fn;
  r.frames_detected = frames_detected;
  r.frames_total = frames_total;

  r.meteor_rate = r.meteors_total > 0
                      ? static_cast<double>(tp) / static_cast<double>(r.meteors_total)
                      : 0.0;
  r.frame_rate = frames_total > 0
                     ? static_cast<double>(frames_detected) / static_cast<double>(frames_total)
                     : 0.0;

  if (tp + fp == 0 || tp + fn == 0) {
    r.degraded = true;
    return r;
  }
  r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f_score = (r.precision + r.recall) > 0.0
                  ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                  : 0.0;
  return r;
}

void print_report(const EvalReport& r, std::ostream& out) {
  auto pct = [](double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(0) << v * 100.0 << '%';
    return ss.str();
  };
  out << "  meteors detected  " << std::setw(6) << r.meteors_detected << " / " << r.meteors_total
      << "   (" << pct(r.meteor_rate) << ", raw " << std::setprecision(6) << r.meteor_rate
      << ")\n";
  out << "  frames detected   " << std::setw(6) << r.frames_detected << " / " << r.frames_total
      << "   (" << pct(r.frame_rate) << ", raw " << std::setprecision(6) << r.frame_rate << ")\n";
  out << "  tp " << r.tp << "  fp " << r.fp << "  fn " << r.fn << '\n';
  out << std::fixed << std::setprecision(2);
  out << "  precision " << r.precision << "  recall " << r.recall << "  F-score " << r.f_score;
  if (r.degraded) out << "  (degraded: empty detection or truth set)";
  out << '\n';
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

void write_report_csv(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "tp,fp,fn,meteors_detected,meteors_total,frames_detected,frames_total,"
         "meteor_rate,frame_rate,precision,recall,f_score,degraded\n";
  out << r.tp << ',' << r.fp << ',' << r.fn << ',' << r.meteors_detected << ','
      << r.meteors_total << ',' << r.frames_detected << ',' << r.frames_total << ','
      << std::setprecision(10) << r.meteor_rate << ',' << r.frame_rate << ',' << r.precision
      << ',' << r.recall << ',' << r.f_score << ',' << (r.degraded ? 1 : 0) << '\n';
}

}  // namespace fmdt
