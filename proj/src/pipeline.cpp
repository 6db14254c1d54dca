#include "fmdt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fmdt/detect.hpp"
#include "fmdt/log.hpp"
#include "fmdt/match.hpp"
#include "fmdt/motion.hpp"
#include "fmdt/sequence.hpp"

namespace fmdt {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct FrameWork {
  GrayFrame frame;  // pixels kept only when the ellipse chain needs them
  std::vector<Detection> dets;
  double detect_ms = 0.0;
};

FrameWork detect_stage(GrayFrame frame, const PipelineConfig& cfg, bool keep_pixels) {
  const auto t0 = Clock::now();
  FrameWork work;
  work.dets = surface_filter(hysteresis_detect(frame, cfg), cfg.s_min, cfg.s_max);
  work.detect_ms = ms_since(t0);
  if (!keep_pixels) frame.pixels.clear();
  work.frame = std::move(frame);
  return work;
}

std::string frame_file_name(const char* prefix, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.pgm", prefix, index);
  return buf;
}

void write_manifest(const PipelineOptions& opt, const PipelineConfig& cfg, const RunResult& res,
                    const std::filesystem::path& path) {
  nlohmann::json j;
  j["input"] = opt.input_dir.string();
  j["pattern"] = opt.pattern;
  j["outputs"] = {{"tracks", opt.out_tracks.string()},
                  {"bb", opt.out_bb.string()},
                  {"motion", opt.out_motion.string()},
                  {"rho", opt.out_rho.string()}};
  j["config"] = {{"thr_low", cfg.tau_low},
                 {"thr_high", cfg.tau_high},
                 {"surface_min", cfg.s_min},
                 {"surface_max", cfg.s_max},
                 {"knn_k", cfg.knn_k},
                 {"knn_ratio", cfg.knn_ratio_max},
                 {"sigma_factor", cfg.sigma_factor},
                 {"angle_max", cfg.angle_max_deg},
                 {"extrap_max", cfg.extrap_max},
                 {"track_min", cfg.track_min},
                 {"star_min", cfg.star_min},
                 {"residual_max", cfg.residual_max},
                 {"maxred_radius", cfg.maxred_radius},
                 {"rho_bin_width", cfg.rho_bin_width},
                 {"connectivity", cfg.connectivity}};
  j["ellipse"] = opt.ellipse;
  j["threads"] = opt.threads;
  j["n_frames"] = res.n_frames;
  j["width"] = res.width;
  j["height"] = res.height;
  j["peak_frame_buffer"] = res.peak_frame_buffer;
  j["wall_ms"] = res.wall_ms;

  const double per_frame = res.n_frames > 0 ? 1.0 / res.n_frames : 0.0;
  j["stage_ms_total"] = {{"load", res.timings.load_ms},     {"detect", res.timings.detect_ms},
                         {"match", res.timings.match_ms},   {"motion", res.timings.motion_ms},
                         {"track", res.timings.track_ms},   {"ellipse", res.timings.ellipse_ms},
                         {"output", res.timings.output_ms}};
  j["stage_ms_per_frame"] = {{"load", res.timings.load_ms * per_frame},
                             {"detect", res.timings.detect_ms * per_frame},
                             {"match", res.timings.match_ms * per_frame},
                             {"motion", res.timings.motion_ms * per_frame},
                             {"track", res.timings.track_ms * per_frame},
                             {"ellipse", res.timings.ellipse_ms * per_frame},
                             {"output", res.timings.output_ms * per_frame}};

  std::map<std::string, int> by_class;
  for (const Track& t : res.tracks) by_class[to_string(t.state)] += 1;
  j["tracks"] = by_class;

  // Atomic publish: write a sibling temp file, then rename over the target.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

class MotionLog {
 public:
  explicit MotionLog(const std::filesystem::path& path) {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw std::runtime_error(path.string() + ": cannot open for writing");
    out_ << "frame,theta,tx,ty,mean_err,std_err,n_inliers,pass\n";
  }

  void add(int frame, const RigidMotion& m) {
    if (!out_.is_open()) return;
    out_ << frame << ',' << std::setprecision(12) << m.transform.theta << ',' << m.transform.tx
         << ',' << m.transform.ty << ',' << m.mean_err << ',' << m.std_err << ',' << m.n_points
         << ',' << m.pass << '\n';
  }

 private:
  std::ofstream out_;
};

class DetectionLog {
 public:
  explicit DetectionLog(const std::filesystem::path& path) {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw std::runtime_error(path.string() + ": cannot open for writing");
    out_ << "frame,label,cx,cy,surface,x_min,y_min,x_max,y_max\n";
  }

  void add(const std::vector<Detection>& dets) {
    if (!out_.is_open()) return;
    for (const Detection& d : dets)
      out_ << d.frame_index << ',' << d.cc.label << ',' << std::setprecision(10) << d.cc.cx()
           << ',' << d.cc.cy() << ',' << d.cc.surface << ',' << d.cc.x_min << ',' << d.cc.y_min
           << ',' << d.cc.x_max << ',' << d.cc.y_max << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace

RunResult run_pipeline(FrameSource source, const PipelineOptions& opt,
                       const PipelineConfig& cfg) {
  validate(cfg);
  const auto wall0 = Clock::now();

  const bool keep_pixels = opt.ellipse || !opt.dump_labels_dir.empty();
  const int window_len = 2 * cfg.maxred_radius + 1;
  const int lookahead = std::max(1, opt.threads);

  RunResult res;
  Tracker tracker(cfg);
  MotionLog motion_log(opt.out_motion);
  DetectionLog det_log(opt.dump_dets);
  std::vector<EllipseStats> rho_stats;

  if (!opt.dump_labels_dir.empty()) std::filesystem::create_directories(opt.dump_labels_dir);
  if (!opt.dump_maxred_dir.empty()) std::filesystem::create_directories(opt.dump_maxred_dir);

  std::vector<GrayFrame> window;  // ellipse chain buffer, at most 2r+1 frames
  std::vector<Detection> prev_dets;
  std::vector<Vec2> src_pts, dst_pts;

  std::deque<std::future<FrameWork>> inflight;
  bool exhausted = false;

  auto pull_one = [&]() {
    const auto t0 = Clock::now();
    std::optional<GrayFrame> frame = source();
    res.timings.load_ms += ms_since(t0);
    if (!frame) {
      exhausted = true;
      return;
    }
    if (res.n_frames == 0) {
      res.width = frame->width;
      res.height = frame->height;
    }
    res.n_frames += 1;
    if (opt.threads > 1) {
      inflight.push_back(std::async(std::launch::async, detect_stage, std::move(*frame),
                                    std::cref(cfg), keep_pixels));
    } else {
      std::promise<FrameWork> done;
      done.set_value(detect_stage(std::move(*frame), cfg, keep_pixels));
      inflight.push_back(done.get_future());
    }
  };

  while (true) {
    while (!exhausted && static_cast<int>(inflight.size()) < lookahead) pull_one();
    if (inflight.empty()) break;

    FrameWork work = inflight.front().get();
    inflight.pop_front();
    res.peak_frame_buffer =
        std::max(res.peak_frame_buffer,
                 static_cast<int>(inflight.size()) + 1 + static_cast<int>(window.size()));

    const int f = work.frame.index;
    res.timings.detect_ms += work.detect_ms;
    det_log.add(work.dets);

    if (!opt.dump_labels_dir.empty()) {
      const HysteresisResult hys = hysteresis_components(work.frame, cfg);
      write_pgm(render_labels(hys.low, work.frame.width, work.frame.height),
                opt.dump_labels_dir / frame_file_name("labels", f));
    }

    if (f > 0) {
      auto t0 = Clock::now();
      std::vector<Association> assocs =
          knn_match(prev_dets, work.dets, cfg.knn_k, cfg.knn_ratio_max);
      res.timings.match_ms += ms_since(t0);

      t0 = Clock::now();
      src_pts.clear();
      dst_pts.clear();
      for (const Association& a : assocs) {
        src_pts.push_back(centroid_of(prev_dets[a.from]));
        dst_pts.push_back(centroid_of(work.dets[a.to]));
      }
      TwoPassResult motion = two_pass_motion(src_pts, dst_pts, cfg.sigma_factor);
      res.timings.motion_ms += ms_since(t0);

      motion_log.add(f, motion.motion);
      if (log::enabled(log::Level::debug))
        FMDT_LOG_DEBUG("pair %d->%d: %zu assoc, geo mean err p1=%.4f p2=%.4f px", f - 1, f,
                       assocs.size(), motion.motion1.geo_mean_err, motion.motion.geo_mean_err);

      t0 = Clock::now();
      std::vector<AssocObservation> tracked;
      tracked.reserve(assocs.size());
      for (size_t k = 0; k < assocs.size(); ++k) {
        assocs[k].e_k = motion.errors.e[k];
        tracked.push_back({assocs[k].from, assocs[k].to, motion.moving[k],
                           dst_pts[k] - motion.motion.transform.apply(src_pts[k])});
      }
      tracker.update(prev_dets, work.dets, tracked, motion.motion.transform, f);
      res.timings.track_ms += ms_since(t0);
    }

    if (opt.ellipse) {
      const auto t0 = Clock::now();
      window.push_back(std::move(work.frame));
      if (static_cast<int>(window.size()) == window_len) {
        const GrayFrame composite = max_reduce(window);
        if (!opt.dump_maxred_dir.empty())
          write_pgm(composite, opt.dump_maxred_dir / frame_file_name("maxred", composite.index));

        std::vector<Detection> comps = surface_filter(hysteresis_detect(composite, cfg),
                                                      cfg.s_min, cfg.s_max);
        for (const Detection& d : comps) {
          const EllipseStats e = ellipse_axes(d.cc);
          rho_stats.push_back(e);
          tracker.annotate_rho(composite.index, centroid_of(d), e.rho);
        }
        window.erase(window.begin());
      }
      res.timings.ellipse_ms += ms_since(t0);
    }

    prev_dets = std::move(work.dets);
  }

  {
    const auto t0 = Clock::now();
    tracker.finish();
    res.tracks = tracker.finished_tracks();
    res.timings.track_ms += ms_since(t0);
  }

  const auto t0 = Clock::now();
  if (!opt.out_tracks.empty()) write_tracks_tsv(res.tracks, opt.out_tracks, opt.ellipse);
  if (!opt.out_bb.empty()) write_bb_tsv(res.tracks, opt.out_bb);
  if (opt.ellipse) {
    res.rho_hist = flatness_histogram(rho_stats, cfg.rho_bin_width);
    if (!opt.out_rho.empty()) write_csv(res.rho_hist, opt.out_rho);
    if (!opt.out_rho_svg.empty()) write_svg(res.rho_hist, opt.out_rho_svg);
  }
  res.timings.output_ms += ms_since(t0);

  res.wall_ms = ms_since(wall0);
  if (!opt.out_tracks.empty()) {
    const std::filesystem::path manifest =
        opt.out_manifest.empty() ? std::filesystem::path(opt.out_tracks.string() + ".manifest.json")
                                 : opt.out_manifest;
    write_manifest(opt, cfg, res, manifest);
  }
  return res;
}

RunResult run_detect(const PipelineOptions& opt, const PipelineConfig& cfg) {
  auto reader = std::make_shared<SequenceReader>(opt.input_dir, opt.pattern);
  return run_pipeline([reader]() { return reader->next(); }, opt, cfg);
}

void write_tracks_tsv(const std::vector<Track>& tracks, const std::filesystem::path& path,
                      bool with_rho) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "# track_id\tclass\tframe_begin\tx_begin\ty_begin\tframe_end\tx_end\ty_end\tn_frames"
         "\tfit_residual";
  if (with_rho) out << "\trho";
  out << '\n';
  out << std::fixed;
  for (const Track& t : tracks) {
    const Observation& first = t.obs.front();
    const Observation& last = t.obs.back();
    out << t.id << '\t' << to_string(t.state) << '\t' << first.frame << '\t'
        << std::setprecision(3) << first.pos.x << '\t' << first.pos.y << '\t' << last.frame
        << '\t' << last.pos.x << '\t' << last.pos.y << '\t' << t.obs.size() << '\t'
        << std::setprecision(4) << t.fit_residual;
    if (with_rho) out << '\t' << std::setprecision(3) << t.rho;
    out << '\n';
  }
}

void write_bb_tsv(const std::vector<Track>& tracks, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "# frame\ttrack_id\tcx\tcy\trx\try\tclass\n";

  struct Row {
    int frame, id;
    const Observation* obs;
    const Track* track;
  };
  std::vector<Row> rows;
  for (const Track& t : tracks)
    for (const Observation& o : t.obs) rows.push_back({o.frame, t.id, &o, &t});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.frame, a.id) < std::tie(b.frame, b.id);
  });

  out << std::fixed << std::setprecision(3);
  for (const Row& r : rows) {
    const BBox& bb = r.obs->bbox;
    out << r.frame << '\t' << r.id << '\t' << r.obs->pos.x << '\t' << r.obs->pos.y << '\t'
        << (bb.x_max - bb.x_min + 1) / 2.0 << '\t' << (bb.y_max - bb.y_min + 1) / 2.0 << '\t'
        << to_string(r.track->state) << '\n';
  }
}

namespace {

TrackState state_from_string(const std::string& s) {
  if (s == "meteor") return TrackState::meteor;
  if (s == "star") return TrackState::star;
  if (s == "noise") return TrackState::noise;
  return TrackState::candidate;
}

}  // namespace

std::vector<Track> read_tracks_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open tracks file");

  std::vector<Track> tracks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Track t;
    std::string cls;
    int frame_begin = 0, frame_end = 0, n_frames = 0;
    Vec2 begin, end;
    if (!(ss >> t.id >> cls >> frame_begin >> begin.x >> begin.y >> frame_end >> end.x >>
          end.y >> n_frames >> t.fit_residual))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed track row");
    t.state = state_from_string(cls);
    // Endpoint-only reconstruction: intermediate positions are interpolated.
    const int span = std::max(1, frame_end - frame_begin);
    for (int f = frame_begin; f <= frame_end; ++f) {
      const double u = static_cast<double>(f - frame_begin) / span;
      t.obs.push_back({f, begin + (end - begin) * u, 0, {}, false, false});
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::vector<TrackSummary> read_bb_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open bounding-box file");

  std::map<int, TrackSummary> by_id;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int frame = 0, id = 0;
    Vec2 pos;
    double rx = 0, ry = 0;
    std::string cls;
    if (!(ss >> frame >> id >> pos.x >> pos.y >> rx >> ry >> cls))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed bounding-box row");
    TrackSummary& t = by_id[id];
    t.id = id;
    t.is_meteor = t.is_meteor || cls == "meteor";
    t.observations.emplace_back(frame, pos);
  }

  std::vector<TrackSummary> out;
  out.reserve(by_id.size());
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  return out;
}

}  // namespace fmdt
