#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmdt/config.hpp"
#include "fmdt/eval.hpp"
#include "fmdt/log.hpp"
#include "fmdt/pipeline.hpp"
#include "fmdt/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct DetectArgs {
  fmdt::PipelineOptions opt;
  fmdt::PipelineConfig cfg;
  std::string gt_path;
  double gt_max_dist = 10.0;
};

void add_detect(CLI::App& app, DetectArgs& args) {
  CLI::App* cmd = app.add_subcommand("detect", "run the detection chain on a frame sequence");
  cmd->add_option("--in", args.opt.input_dir, "input directory of PGM frames")->required();
  cmd->add_option("--pattern", args.opt.pattern, "frame filename glob (default *.pgm)");
  cmd->add_option("--out-tracks", args.opt.out_tracks, "tracks TSV output")->required();
  cmd->add_option("--out-bb", args.opt.out_bb, "per-observation bounding-box TSV output");
  cmd->add_option("--out-motion", args.opt.out_motion, "per-frame motion CSV output");
  cmd->add_option("--out-manifest", args.opt.out_manifest,
                  "run manifest path (default <out-tracks>.manifest.json)");

  cmd->add_option("--thr-low", args.cfg.tau_low, "low hysteresis threshold");
  cmd->add_option("--thr-high", args.cfg.tau_high, "high hysteresis threshold");
  cmd->add_option("--surface-min", args.cfg.s_min, "minimum component surface, px");
  cmd->add_option("--surface-max", args.cfg.s_max, "maximum component surface, px");
  cmd->add_option("--knn-k", args.cfg.knn_k, "neighbors considered per association");
  cmd->add_option("--knn-ratio", args.cfg.knn_ratio_max, "maximum surface ratio");
  cmd->add_option("--sigma-factor", args.cfg.sigma_factor, "outlier threshold, in stddevs");
  cmd->add_option("--angle-max", args.cfg.angle_max_deg, "track angle constraint, degrees");
  cmd->add_option("--extrap-max", args.cfg.extrap_max, "max extrapolated frames per gap");
  cmd->add_option("--track-min", args.cfg.track_min,
                  "consecutive moving observations for a meteor");
  cmd->add_option("--star-min", args.cfg.star_min, "never-moving observations for a star");
  cmd->add_option("--residual-max", args.cfg.residual_max, "max meteor line-fit residual, px");
  cmd->add_option("--connectivity", args.cfg.connectivity, "component connectivity (4 or 8)");

  cmd->add_flag("--ellipse", args.opt.ellipse, "enable the max-reduction / ellipse chain");
  cmd->add_option("--maxred-radius", args.cfg.maxred_radius, "temporal radius r (window 2r+1)");
  cmd->add_option("--rho-bin-width", args.cfg.rho_bin_width, "flatness histogram bin width");
  cmd->add_option("--out-rho", args.opt.out_rho, "flatness histogram CSV output");
  cmd->add_option("--out-rho-svg", args.opt.out_rho_svg, "flatness histogram SVG output");

  cmd->add_option("--dump-labels", args.opt.dump_labels_dir, "debug: labeled-component PGMs");
  cmd->add_option("--dump-dets", args.opt.dump_dets, "debug: per-frame detection CSV");
  cmd->add_option("--dump-maxred", args.opt.dump_maxred_dir, "debug: composite-frame PGMs");

  cmd->add_option("--gt", args.gt_path, "ground-truth file; prints an evaluation report");
  cmd->add_option("--gt-max-dist", args.gt_max_dist, "truth matching distance, px");
  cmd->add_option("--threads", args.opt.threads, "detection worker threads (1 = sequential)")
      ->check(CLI::Range(1, 256));

  cmd->set_config("--config", "", "key=value file overriding defaults");

  cmd->callback([&args]() {
    fmdt::validate(args.cfg);
    const fmdt::RunResult res = fmdt::run_detect(args.opt, args.cfg);

    int n_meteor = 0;
    for (const fmdt::Track& t : res.tracks)
      if (t.state == fmdt::TrackState::meteor) ++n_meteor;
    std::printf("%d frames, %zu tracks (%d meteor), %.1f ms/frame\n", res.n_frames,
                res.tracks.size(), n_meteor,
                res.n_frames > 0 ? res.wall_ms / res.n_frames : 0.0);

    if (!args.gt_path.empty()) {
      const auto truth = fmdt::read_ground_truth(args.gt_path);
      std::vector<fmdt::TrackSummary> summaries;
      for (const fmdt::Track& t : res.tracks) summaries.push_back(fmdt::summarize(t));
      const fmdt::MatchResult m = fmdt::match_tracks(summaries, truth, args.gt_max_dist);
      const fmdt::EvalReport report =
          fmdt::compute_metrics(m.tp, m.fp, m.fn, m.frames_detected_total, m.frames_total,
                                static_cast<int>(truth.size()));
      fmdt::print_report(report, std::cout);
    }
  });
}

struct SynthArgs {
  std::string spec_path;
  fs::path out_dir;
  std::string gt_out;
  std::optional<uint64_t> seed;
  std::optional<int> frames;
};

void add_synth(CLI::App& app, SynthArgs& args) {
  CLI::App* cmd = app.add_subcommand("synth", "render a synthetic sequence with ground truth");
  cmd->add_option("--spec", args.spec_path, "scene description file (key=value)")->required();
  cmd->add_option("--out", args.out_dir, "output directory for PGM frames")->required();
  cmd->add_option("--gt-out", args.gt_out, "ground-truth output (default <out>/truth.txt)");
  cmd->add_option("--seed", args.seed, "override the scene seed");
  cmd->add_option("--frames", args.frames, "override the frame count");

  cmd->callback([&args]() {
    fmdt::SceneFile sf = fmdt::parse_scene_file(args.spec_path);
    if (args.seed) sf.scene.seed = *args.seed;
    if (args.frames) sf.n_frames = *args.frames;

    fs::create_directories(args.out_dir);
    fmdt::SceneRenderer renderer(sf.scene, sf.cam, sf.n_frames);
    for (int f = 0; f < sf.n_frames; ++f) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%06d.pgm", f);
      fmdt::write_pgm(renderer.render(f), args.out_dir / name);
    }

    std::vector<fmdt::GroundTruthEntry> truth;
    for (const fmdt::MeteorTruth& m : renderer.truth().meteors)
      truth.push_back({m.id, m.frame_begin, m.positions.front().x, m.positions.front().y,
                       m.frame_end, m.positions.back().x, m.positions.back().y});
    const fs::path gt_path =
        args.gt_out.empty() ? args.out_dir / "truth.txt" : fs::path(args.gt_out);
    fmdt::write_ground_truth(truth, gt_path);

    std::ofstream cam(args.out_dir / "camera.csv");
    cam << "frame,theta,tx,ty\n" << std::setprecision(12);
    for (size_t f = 0; f < renderer.truth().camera.size(); ++f) {
      const fmdt::RigidTransform& t = renderer.truth().camera[f];
      cam << f << ',' << t.theta << ',' << t.tx << ',' << t.ty << '\n';
    }

    std::printf("%d frames -> %s (%zu meteors in %s)\n", sf.n_frames,
                args.out_dir.c_str(), truth.size(), gt_path.c_str());
  });
}

struct EvalArgs {
  std::string tracks_path;
  std::string bb_path;
  std::string gt_path;
  double gt_max_dist = 10.0;
  std::string csv_path;
  std::vector<int> counts;
  int64_t frames_detected = 0;
  int64_t frames_total = 0;
  int meteors_total = 0;
};

void add_eval(CLI::App& app, EvalArgs& args) {
  CLI::App* cmd = app.add_subcommand("eval", "score tracks against ground truth");
  auto* tracks = cmd->add_option("--tracks", args.tracks_path, "tracks TSV from detect");
  cmd->add_option("--bb", args.bb_path,
                  "bounding-box TSV; gives exact per-frame positions to the matcher");
  auto* gt = cmd->add_option("--gt", args.gt_path, "ground-truth file");
  cmd->add_option("--gt-max-dist", args.gt_max_dist, "truth matching distance, px");
  cmd->add_option("--csv", args.csv_path, "also write the report as CSV");

  auto* counts = cmd->add_option("--counts", args.counts, "metrics from raw counts: tp fp fn")
                     ->expected(3);
  cmd->add_option("--frames-detected", args.frames_detected, "with --counts");
  cmd->add_option("--frames-total", args.frames_total, "with --counts");
  cmd->add_option("--meteors-total", args.meteors_total, "with --counts");
  counts->excludes(tracks);
  tracks->needs(gt);

  cmd->callback([&args, cmd]() {
    fmdt::EvalReport report;
    if (!args.counts.empty()) {
      report = fmdt::compute_metrics(args.counts[0], args.counts[1], args.counts[2],
                                     args.frames_detected, args.frames_total,
                                     args.meteors_total);
    } else if (!args.tracks_path.empty()) {
      const auto truth = fmdt::read_ground_truth(args.gt_path);
      std::vector<fmdt::TrackSummary> summaries;
      if (!args.bb_path.empty()) {
        summaries = fmdt::read_bb_tsv(args.bb_path);
      } else {
        for (const fmdt::Track& t : fmdt::read_tracks_tsv(args.tracks_path))
          summaries.push_back(fmdt::summarize(t));
      }
      const fmdt::MatchResult m = fmdt::match_tracks(summaries, truth, args.gt_max_dist);
      report = fmdt::compute_metrics(m.tp, m.fp, m.fn, m.frames_detected_total, m.frames_total,
                                     static_cast<int>(truth.size()));
    } else {
      throw CLI::CallForHelp();
    }
    fmdt::print_report(report, std::cout);
    if (!args.csv_path.empty()) fmdt::write_report_csv(report, args.csv_path);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fmdt - fast meteor detection toolbox"};
  app.require_subcommand(1);

  DetectArgs detect_args;
  SynthArgs synth_args;
  EvalArgs eval_args;
  add_detect(app, detect_args);
  add_synth(app, synth_args);
  add_eval(app, eval_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fmdt: %s\n", e.what());
    return 1;
  }
  return 0;
}
