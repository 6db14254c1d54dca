#include <doctest.h>

#include <random>

#include "fmdt/detect.hpp"
#include "oracles.hpp"

using namespace fmdt;

namespace {

GrayFrame blobby_frame(int w, int h, uint32_t seed) {
  // Smooth-ish random scene: a handful of soft blobs over dim noise, taken
  // through both thresholds.
  GrayFrame f(w, h);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> level(0, 78);
  for (auto& p : f.pixels) p = static_cast<uint8_t>(level(rng));
  const int n_blobs = 2 + static_cast<int>(rng() % 5);
  for (int b = 0; b < n_blobs; ++b) {
    const int cx = static_cast<int>(rng() % w);
    const int cy = static_cast<int>(rng() % h);
    const int peak = 60 + static_cast<int>(rng() % 120);
    for (int dy = -4; dy <= 4; ++dy)
      for (int dx = -4; dx <= 4; ++dx) {
        if (!f.in_bounds(cx + dx, cy + dy)) continue;
        const double r2 = dx * dx + dy * dy;
        const int v = static_cast<int>(peak * std::exp(-r2 / 6.0));
        auto& px = f.at(cx + dx, cy + dy);
        px = static_cast<uint8_t>(std::min(255, std::max<int>(px, v)));
      }
  }
  return f;
}

std::vector<uint8_t> detection_pixel_mask(const HysteresisResult& hys, int w, int h) {
  std::vector<uint8_t> mask(static_cast<size_t>(w) * h, 0);
  for (size_t i = 0; i < hys.low.runs.size(); ++i) {
    if (!hys.keep[hys.low.label_of[i] - 1]) continue;
    const RunSegment& r = hys.low.runs[i];
    for (int x = r.x_begin; x <= r.x_end; ++x) mask[static_cast<size_t>(r.row) * w + x] = 1;
  }
  return mask;
}

}  // namespace

TEST_CASE("hysteresis keeps the full skirt of a seeded blob") {
  PipelineConfig cfg;
  cfg.tau_low = 55;
  cfg.tau_high = 70;

  GrayFrame f(16, 16, 0);
  // Skirt at 60 with a peak at 80 in the middle.
  for (int y = 4; y <= 8; ++y)
    for (int x = 4; x <= 8; ++x) f.at(x, y) = 60;
  f.at(6, 6) = 80;

  const auto dets = hysteresis_detect(f, cfg);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].cc.surface == 25);  // full 5x5 skirt, not just the peak

  // Same blob without a seed pixel above tau_high: nothing.
  f.at(6, 6) = 60;
  CHECK(hysteresis_detect(f, cfg).empty());
}

TEST_CASE("hysteresis equals the seeded-region-growing oracle") {
  PipelineConfig cfg;
  for (uint32_t seed = 0; seed < 120; ++seed) {
    const GrayFrame f = blobby_frame(64, 64, seed);
    const HysteresisResult hys = hysteresis_components(f, cfg);
    const auto ours = detection_pixel_mask(hys, 64, 64);
    const BinaryMask ref = oracle::hysteresis_grow(f, cfg.tau_low, cfg.tau_high, cfg.connectivity);
    REQUIRE(ours == ref.pixels);
  }
}

TEST_CASE("every detection pixel set contains a high component and is disjoint") {
  PipelineConfig cfg;
  const GrayFrame f = blobby_frame(64, 64, 7);
  const auto dets = hysteresis_detect(f, cfg);

  // Each detection holds at least one pixel above tau_high, checked on the
  // label raster of the low-threshold labeling.
  const HysteresisResult hys = hysteresis_components(f, cfg);
  const auto labels = oracle::rasterize_labels(hys.low, 64, 64);
  for (const Detection& d : dets) {
    bool has_high = false;
    for (int y = d.cc.y_min; y <= d.cc.y_max && !has_high; ++y)
      for (int x = d.cc.x_min; x <= d.cc.x_max && !has_high; ++x)
        has_high = labels[static_cast<size_t>(y) * 64 + x] == d.cc.label &&
                   f.at(x, y) > cfg.tau_high;
    CHECK(has_high);
  }

  // Pairwise disjoint: labels are distinct per detection by construction.
  for (size_t i = 1; i < dets.size(); ++i) CHECK(dets[i].cc.label != dets[i - 1].cc.label);
}

TEST_CASE("lowering tau_high never removes a detection") {
  PipelineConfig cfg;
  for (uint32_t seed = 200; seed < 230; ++seed) {
    const GrayFrame f = blobby_frame(48, 48, seed);
    cfg.tau_high = 90;
    const auto strict = hysteresis_detect(f, cfg);
    cfg.tau_high = 70;
    const auto loose = hysteresis_detect(f, cfg);

    for (const Detection& d : strict) {
      bool found = false;
      for (const Detection& e : loose)
        if (e.cc.label == d.cc.label && e.cc.surface == d.cc.surface) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("surface_filter keeps the stated bounds, order preserved") {
  auto det = [](int label, int64_t surface) {
    Detection d;
    d.cc.label = label;
    d.cc.surface = surface;
    return d;
  };
  const std::vector<Detection> dets = {det(1, 2), det(2, 5), det(3, 2000)};
  const auto kept = surface_filter(dets, 3, 1000);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].cc.label == 2);

  // Degenerate bounds keep everything.
  CHECK(surface_filter(dets, 0, std::numeric_limits<int64_t>::max()).size() == 3);

  // Random lists: equals the elementwise predicate.
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Detection> list;
    const int n = static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) list.push_back(det(i + 1, static_cast<int64_t>(rng() % 3000)));
    const auto out = surface_filter(list, 3, 1000);
    std::vector<Detection> expected;
    for (const Detection& d : list)
      if (d.cc.surface >= 3 && d.cc.surface <= 1000) expected.push_back(d);
    REQUIRE(out.size() == expected.size());
    for (size_t i = 0; i < out.size(); ++i) CHECK(out[i].cc.label == expected[i].cc.label);
  }
}
