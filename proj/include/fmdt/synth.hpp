#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fmdt/geometry.hpp"
#include "fmdt/image.hpp"

namespace fmdt {

struct MeteorSpec {
  int start_frame = 0;
  int duration = 1;
  Vec2 start;          // sky coordinates at start_frame
  Vec2 velocity;       // px/frame in sky coordinates
  double intensity = 150.0;
  int occl_start = -1;  // first invisible frame, -1 = never occluded
  int occl_len = 0;
};

struct SceneSpec {
  int width = 640;
  int height = 480;
  int n_stars = 30;
  double star_intensity_min = 80.0;
  double star_intensity_max = 200.0;
  double star_sigma = 1.2;  // PSF standard deviation, px
  std::vector<MeteorSpec> meteors;
  double background = 20.0;
  double noise_sigma = 2.0;
  uint64_t seed = 1;
};

enum class CamMode { fixed, gimbal, balloon };

/// Parametric camera motion. Pitch/roll oscillation maps to a vertical
/// translation and a rotation; yaw drift (balloon only) to a steady
/// horizontal translation.
struct CameraMotionSpec {
  CamMode mode = CamMode::fixed;
  double trans_amp = 0.0;     // px
  double trans_period = 0.0;  // frames
  double rot_amp_deg = 0.0;
  double rot_period = 0.0;    // frames
  double drift_rate = 0.0;    // px/frame, horizontal
};

struct MeteorTruth {
  int id = 0;
  int frame_begin = 0;
  int frame_end = 0;                // inclusive
  std::vector<Vec2> positions;      // image coordinates, one per life frame
};

struct SynthTruth {
  std::vector<MeteorTruth> meteors;
  std::vector<RigidTransform> camera;  // sky -> image transform per frame
};

/// Sky -> image transform of one frame (rotation about the frame center).
RigidTransform camera_transform(const CameraMotionSpec& cam, int frame, int width, int height);

/// Deterministic frame renderer: the seed fully determines the star field
/// and per-frame noise, and frames may be rendered in any order.
class SceneRenderer {
 public:
  SceneRenderer(const SceneSpec& scene, const CameraMotionSpec& cam, int n_frames);

  GrayFrame render(int frame) const;
  const SynthTruth& truth() const { return truth_; }
  int n_frames() const { return n_frames_; }

  /// Seed-determined star sky positions (inspection and tests).
  std::vector<Vec2> star_positions() const;

 private:
  struct Star {
    Vec2 pos;  // sky coordinates
    double intensity;
  };

  SceneSpec scene_;
  CameraMotionSpec cam_;
  int n_frames_;
  std::vector<Star> stars_;
  SynthTruth truth_;
};

struct SynthResult {
  std::vector<GrayFrame> frames;
  SynthTruth truth;
};

SynthResult generate(const SceneSpec& scene, const CameraMotionSpec& cam, int n_frames);

struct SceneFile {
  SceneSpec scene;
  CameraMotionSpec cam;
  int n_frames = 100;
};

/// Parses a key=value scene description ('#' comments; the meteor key
/// repeats). Throws on unknown keys or malformed values.
SceneFile parse_scene_file(const std::filesystem::path& path);

}  // namespace fmdt
