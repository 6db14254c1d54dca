#include "fmdt/ellipse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fmdt {

GrayFrame max_reduce(std::span<const GrayFrame> window) {
  if (window.empty() || window.size() % 2 == 0)
    throw std::invalid_argument("max_reduce: window must hold 2r+1 frames");
  const GrayFrame& center = window[window.size() / 2];
  for (const GrayFrame& f : window)
    if (!f.same_dims(center)) throw std::invalid_argument("max_reduce: dimension mismatch");

  GrayFrame out(center.width, center.height, 0, center.index);
  for (const GrayFrame& f : window) {
    const size_t n = out.pixels.size();
    for (size_t i = 0; i < n; ++i) out.pixels[i] = std::max(out.pixels[i], f.pixels[i]);
  }
  return out;
}

EllipseStats ellipse_axes(const CCStats& cc) {
  const double s = static_cast<double>(cc.surface);
  const double cx = cc.cx(), cy = cc.cy();
  const double m20 = static_cast<double>(cc.sx2) / s - cx * cx;
  const double m02 = static_cast<double>(cc.sy2) / s - cy * cy;
  const double m11 = static_cast<double>(cc.sxy) / s - cx * cy;

  // Eigenvalues of [[m20, m11], [m11, m02]]; clamp tiny negatives from
  // cancellation.
  const double tr = m20 + m02;
  const double det = std::sqrt(std::max(0.0, (m20 - m02) * (m20 - m02) + 4.0 * m11 * m11));
  const double l1 = std::max(0.0, 0.5 * (tr + det));
  const double l2 = std::max(0.0, 0.5 * (tr - det));

  EllipseStats out;
  out.a = 2.0 * std::sqrt(l1);
  out.b = 2.0 * std::sqrt(l2);
  if (out.a == 0.0)
    out.rho = 1.0;  // single pixel: no extent at all
  else
    out.rho = out.b == 0.0 ? std::numeric_limits<double>::infinity() : out.a / out.b;
  return out;
}

int64_t FlatnessHistogram::total() const {
  int64_t n = overflow;
  for (int64_t b : bins) n += b;
  return n;
}

FlatnessHistogram flatness_histogram(std::span<const EllipseStats> stats, double bin_width) {
  if (bin_width <= 0.0) throw std::invalid_argument("flatness_histogram: bin_width must be > 0");
  FlatnessHistogram hist;
  hist.bin_width = bin_width;
  for (const EllipseStats& s : stats) {
    if (!s.rho_finite()) {
      hist.overflow += 1;
      continue;
    }
    const auto bin = static_cast<size_t>(std::max(0.0, (s.rho - 1.0) / bin_width));
    if (bin >= hist.bins.size()) hist.bins.resize(bin + 1, 0);
    hist.bins[bin] += 1;
  }
  return hist;
}

void write_csv(const FlatnessHistogram& hist, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "rho_low,rho_high,count\n";
  for (size_t i = 0; i < hist.bins.size(); ++i)
    out << 1.0 + static_cast<double>(i) * hist.bin_width << ','
        << 1.0 + static_cast<double>(i + 1) * hist.bin_width << ',' << hist.bins[i] << '\n';
  out << "inf,inf," << hist.overflow << '\n';
}

void write_svg(const FlatnessHistogram& hist, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");

  const int n = static_cast<int>(hist.bins.size()) + 1;  // + overflow bar
  int64_t peak = std::max<int64_t>(1, hist.overflow);
  for (int64_t b : hist.bins) peak = std::max(peak, b);

  const int bar_w = 18, gap = 2, h = 220, margin = 30;
  const int w = margin * 2 + n * (bar_w + gap);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h + 60
      << "\">\n";
  for (int i = 0; i < n; ++i) {
    const bool inf_bar = i == n - 1;
    const int64_t count = inf_bar ? hist.overflow : hist.bins[i];
    const int bh = static_cast<int>(static_cast<double>(count) / static_cast<double>(peak) * h);
    const int x = margin + i * (bar_w + gap);
    out << "  <rect x=\"" << x << "\" y=\"" << margin + h - bh << "\" width=\"" << bar_w
        << "\" height=\"" << bh << "\" fill=\"" << (inf_bar ? "#b04040" : "#4060b0") << "\"/>\n";
    out << "  <text x=\"" << x << "\" y=\"" << margin + h + 14 << "\" font-size=\"9\">";
    if (inf_bar)
      out << "inf";
    else
      out << 1.0 + static_cast<double>(i) * hist.bin_width;
    out << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fmdt
