#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fmdt/config.hpp"
#include "fmdt/ellipse.hpp"
#include "fmdt/eval.hpp"
#include "fmdt/image.hpp"
#include "fmdt/track.hpp"

namespace fmdt {

struct PipelineOptions {
  std::filesystem::path input_dir;
  std::string pattern = "*.pgm";

  std::filesystem::path out_tracks;
  std::filesystem::path out_bb;
  std::filesystem::path out_motion;
  std::filesystem::path out_manifest;  // default: <out_tracks>.manifest.json

  bool ellipse = false;
  std::filesystem::path out_rho;       // flatness histogram CSV
  std::filesystem::path out_rho_svg;

  std::filesystem::path dump_labels_dir;
  std::filesystem::path dump_dets;
  std::filesystem::path dump_maxred_dir;

  int threads = 1;
};

struct StageTimings {
  double load_ms = 0.0;
  double detect_ms = 0.0;
  double match_ms = 0.0;
  double motion_ms = 0.0;
  double track_ms = 0.0;
  double ellipse_ms = 0.0;
  double output_ms = 0.0;

  double sum() const {
    return load_ms + detect_ms + match_ms + motion_ms + track_ms + ellipse_ms + output_ms;
  }
};

struct RunResult {
  std::vector<Track> tracks;
  int n_frames = 0;
  int width = 0, height = 0;
  StageTimings timings;
  double wall_ms = 0.0;
  int peak_frame_buffer = 0;  // frames resident at once (window + in flight)
  FlatnessHistogram rho_hist;
};

/// Pulls frames one at a time; returns nullopt at end of stream.
using FrameSource = std::function<std::optional<GrayFrame>()>;

/// Runs the detection chain over a frame source. Detection of individual
/// frames may run on `threads` workers with bounded lookahead; matching,
/// motion and tracking consume results strictly in frame order, so output is
/// independent of the thread count. Output files are written only for paths
/// that are set.
RunResult run_pipeline(FrameSource source, const PipelineOptions& opt,
                       const PipelineConfig& cfg);

/// run_pipeline over a PGM directory (opt.input_dir / opt.pattern).
RunResult run_detect(const PipelineOptions& opt, const PipelineConfig& cfg);

void write_tracks_tsv(const std::vector<Track>& tracks, const std::filesystem::path& path,
                      bool with_rho);
void write_bb_tsv(const std::vector<Track>& tracks, const std::filesystem::path& path);
std::vector<Track> read_tracks_tsv(const std::filesystem::path& path);

/// Per-frame real observations parsed from a bounding-box TSV, for
/// file-based evaluation.
std::vector<TrackSummary> read_bb_tsv(const std::filesystem::path& path);

}  // namespace fmdt
