#include "fmdt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fmdt {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; pinned here so frames are reproducible independently of the
// standard library's distribution implementations.
class GaussianDraw {
 public:
  explicit GaussianDraw(std::mt19937_64& rng) : rng_(rng) {}

  double operator()(double sigma) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_ * sigma;
    }
    double u = uniform01(rng_);
    while (u <= 0.0) u = uniform01(rng_);
    const double v = uniform01(rng_);
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * kPi * v);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * v) * sigma;
  }

 private:
  std::mt19937_64& rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Integral of a unit Gaussian over the pixel cell centered at distance d.
double cell_weight(double d, double sigma) {
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  return 0.5 * (std::erf((d + 0.5) * inv) - std::erf((d - 0.5) * inv));
}

struct PsfModel {
  double sigma;
  double norm;    // centered cell weight, so a centered pixel reaches the peak
  int radius;     // rendering box half-width, px

  explicit PsfModel(double s)
      : sigma(s), norm(cell_weight(0.0, s)), radius(static_cast<int>(std::ceil(4.0 * s + 1.0))) {}

  double value(double dx, double dy) const {
    return cell_weight(dx, sigma) * cell_weight(dy, sigma) / (norm * norm);
  }
};

void add_psf(std::vector<double>& accum, int w, int h, Vec2 center, double intensity,
             const PsfModel& psf) {
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x)) - psf.radius);
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(center.x)) + psf.radius);
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y)) - psf.radius);
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(center.y)) + psf.radius);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      accum[static_cast<size_t>(y) * w + x] +=
          intensity * psf.value(x - center.x, y - center.y);
}

// A streak is the max over PSFs placed densely along the intra-frame path.
void add_streak(std::vector<double>& accum, int w, int h, const std::vector<Vec2>& samples,
                double intensity, const PsfModel& psf) {
  double min_x = samples[0].x, max_x = samples[0].x;
  double min_y = samples[0].y, max_y = samples[0].y;
  for (const Vec2& s : samples) {
    min_x = std::min(min_x, s.x);
    max_x = std::max(max_x, s.x);
    min_y = std::min(min_y, s.y);
    max_y = std::max(max_y, s.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(min_x)) - psf.radius);
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(max_x)) + psf.radius);
  const int y0 = std::max(0, static_cast<int>(std::floor(min_y)) - psf.radius);
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(max_y)) + psf.radius);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double v = 0.0;
      for (const Vec2& s : samples) v = std::max(v, psf.value(x - s.x, y - s.y));
      accum[static_cast<size_t>(y) * w + x] += intensity * v;
    }
}

}  // namespace

RigidTransform camera_transform(const CameraMotionSpec& cam, int frame, int width, int height) {
  if (cam.mode == CamMode::fixed) return {};

  auto oscillate = [&](double amp, double period) {
    return (amp == 0.0 || period <= 0.0) ? 0.0 : amp * std::sin(2.0 * kPi * frame / period);
  };
  const double ty = oscillate(cam.trans_amp, cam.trans_period);
  const double theta = deg_to_rad(oscillate(cam.rot_amp_deg, cam.rot_period));
  const double tx = cam.mode == CamMode::balloon ? cam.drift_rate * frame : 0.0;

  const Vec2 center{width / 2.0, height / 2.0};
  return RigidTransform::about_point(theta, center, {tx, ty});
}

SceneRenderer::SceneRenderer(const SceneSpec& scene, const CameraMotionSpec& cam, int n_frames)
    : scene_(scene), cam_(cam), n_frames_(n_frames) {
  if (scene.width < 8 || scene.height < 8)
    throw std::invalid_argument("scene: width and height must be >= 8");
  if (n_frames < 1) throw std::invalid_argument("scene: need at least one frame");
  if (scene.star_sigma <= 0.0) throw std::invalid_argument("scene: star_sigma must be > 0");
  if (scene.noise_sigma < 0.0) throw std::invalid_argument("scene: noise_sigma must be >= 0");

  truth_.camera.reserve(n_frames);
  for (int f = 0; f < n_frames; ++f)
    truth_.camera.push_back(camera_transform(cam_, f, scene_.width, scene_.height));

  // Stars live in an extended sky rectangle covering the full camera sweep,
  // so the visible field stays populated under drift.
  double pad = 0.0;
  if (cam_.mode != CamMode::fixed) {
    const double diag = 0.5 * std::hypot(scene_.width, scene_.height);
    pad = std::abs(cam_.trans_amp) + std::abs(cam_.drift_rate) * n_frames +
          std::abs(std::sin(deg_to_rad(cam_.rot_amp_deg))) * diag;
    pad = std::ceil(pad);
  }

  std::mt19937_64 rng(splitmix64(scene_.seed));
  stars_.reserve(scene_.n_stars);
  for (int i = 0; i < scene_.n_stars; ++i) {
    Star s;
    s.pos = {-pad + uniform01(rng) * (scene_.width + 2.0 * pad),
             -pad + uniform01(rng) * (scene_.height + 2.0 * pad)};
    s.intensity = scene_.star_intensity_min +
                  uniform01(rng) * (scene_.star_intensity_max - scene_.star_intensity_min);
    stars_.push_back(s);
  }

  int next_id = 1;
  for (const MeteorSpec& m : scene_.meteors) {
    if (m.duration < 1) throw std::invalid_argument("meteor: duration must be >= 1");
    MeteorTruth truth;
    truth.id = next_id++;
    truth.frame_begin = m.start_frame;
    truth.frame_end = m.start_frame + m.duration - 1;

    bool visible_somewhere = false;
    for (int f = truth.frame_begin; f <= truth.frame_end; ++f) {
      const Vec2 sky = m.start + m.velocity * static_cast<double>(f - m.start_frame);
      const Vec2 img = (f >= 0 && f < n_frames) ? truth_.camera[f].apply(sky) : sky;
      truth.positions.push_back(img);
      if (f >= 0 && f < n_frames && img.x >= 0 && img.x < scene_.width && img.y >= 0 &&
          img.y < scene_.height)
        visible_somewhere = true;
    }
    if (!visible_somewhere)
      throw std::invalid_argument("meteor " + std::to_string(truth.id) +
                                  ": never enters the frame during its life");
    truth_.meteors.push_back(std::move(truth));
  }
}

GrayFrame SceneRenderer::render(int frame) const {
  const int w = scene_.width, h = scene_.height;
  const RigidTransform& cam = truth_.camera[frame];
  const PsfModel psf(scene_.star_sigma);

  std::vector<double> accum(static_cast<size_t>(w) * h, scene_.background);

  for (const Star& s : stars_) {
    const Vec2 img = cam.apply(s.pos);
    if (img.x < -psf.radius || img.x >= w + psf.radius || img.y < -psf.radius ||
        img.y >= h + psf.radius)
      continue;
    add_psf(accum, w, h, img, s.intensity, psf);
  }

  for (size_t i = 0; i < scene_.meteors.size(); ++i) {
    const MeteorSpec& m = scene_.meteors[i];
    if (frame < m.start_frame || frame >= m.start_frame + m.duration) continue;
    if (m.occl_start >= 0 && frame >= m.occl_start && frame < m.occl_start + m.occl_len)
      continue;

    const Vec2 sky = m.start + m.velocity * static_cast<double>(frame - m.start_frame);
    const int n_samples =
        std::max(2, static_cast<int>(std::ceil(m.velocity.norm() / 0.3)) + 1);
    std::vector<Vec2> samples;
    samples.reserve(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      const double u = static_cast<double>(s) / (n_samples - 1) - 0.5;  // [-1/2, 1/2]
      samples.push_back(cam.apply(sky + m.velocity * u));
    }
    add_streak(accum, w, h, samples, m.intensity, psf);
  }

  GrayFrame out(w, h, 0, frame);
  if (scene_.noise_sigma > 0.0) {
    std::mt19937_64 rng(splitmix64(scene_.seed ^ splitmix64(static_cast<uint64_t>(frame) + 1)));
    GaussianDraw gauss(rng);
    for (size_t i = 0; i < accum.size(); ++i) {
      const double v = accum[i] + gauss(scene_.noise_sigma);
      out.pixels[i] = static_cast<uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
    }
  } else {
    for (size_t i = 0; i < accum.size(); ++i)
      out.pixels[i] = static_cast<uint8_t>(std::clamp<long>(std::lround(accum[i]), 0, 255));
  }
  return out;
}

std::vector<Vec2> SceneRenderer::star_positions() const {
  std::vector<Vec2> out;
  out.reserve(stars_.size());
  for (const Star& s : stars_) out.push_back(s.pos);
  return out;
}

SynthResult generate(const SceneSpec& scene, const CameraMotionSpec& cam, int n_frames) {
  SceneRenderer renderer(scene, cam, n_frames);
  SynthResult out;
  out.frames.reserve(n_frames);
  for (int f = 0; f < n_frames; ++f) out.frames.push_back(renderer.render(f));
  out.truth = renderer.truth();
  return out;
}

namespace {

std::vector<double> parse_csv_numbers(const std::string& value, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("scene file: bad number '" + item + "' in key " + key);
    }
    if (pos != item.size() && item.find_first_not_of(" \t", pos) != std::string::npos)
      throw std::runtime_error("scene file: bad number '" + item + "' in key " + key);
    out.push_back(v);
  }
  return out;
}

}  // namespace

SceneFile parse_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open scene file");

  SceneFile out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected key=value");

    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t\r");
      const size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    auto num = [&](double& dst) { dst = parse_csv_numbers(value, key).at(0); };
    auto num_i = [&](int& dst) {
      dst = static_cast<int>(std::llround(parse_csv_numbers(value, key).at(0)));
    };

    if (key == "width") num_i(out.scene.width);
    else if (key == "height") num_i(out.scene.height);
    else if (key == "frames") num_i(out.n_frames);
    else if (key == "n_stars") num_i(out.scene.n_stars);
    else if (key == "star_intensity_min") num(out.scene.star_intensity_min);
    else if (key == "star_intensity_max") num(out.scene.star_intensity_max);
    else if (key == "star_sigma") num(out.scene.star_sigma);
    else if (key == "background") num(out.scene.background);
    else if (key == "noise_sigma") num(out.scene.noise_sigma);
    else if (key == "seed") out.scene.seed = std::stoull(value);
    else if (key == "cam_mode") {
      if (value == "fixed") out.cam.mode = CamMode::fixed;
      else if (value == "gimbal") out.cam.mode = CamMode::gimbal;
      else if (value == "balloon") out.cam.mode = CamMode::balloon;
      else throw std::runtime_error("scene file: unknown cam_mode '" + value + "'");
    } else if (key == "trans_amp") num(out.cam.trans_amp);
    else if (key == "trans_period") num(out.cam.trans_period);
    else if (key == "rot_amp_deg") num(out.cam.rot_amp_deg);
    else if (key == "rot_period") num(out.cam.rot_period);
    else if (key == "drift_rate") num(out.cam.drift_rate);
    else if (key == "meteor") {
      const std::vector<double> v = parse_csv_numbers(value, key);
      if (v.size() != 7 && v.size() != 9)
        throw std::runtime_error(
            "scene file: meteor needs start,duration,x,y,vx,vy,intensity[,occl_start,occl_len]");
      MeteorSpec m;
      m.start_frame = static_cast<int>(v[0]);
      m.duration = static_cast<int>(v[1]);
      m.start = {v[2], v[3]};
      m.velocity = {v[4], v[5]};
      m.intensity = v[6];
      if (v.size() == 9) {
        m.occl_start = static_cast<int>(v[7]);
        m.occl_len = static_cast<int>(v[8]);
      }
      out.scene.meteors.push_back(m);
    } else {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }
  return out;
}

}  // namespace fmdt
