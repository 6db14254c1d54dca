#include "fmdt/ccl.hpp"

#include <cassert>
#include <numeric>
#include <stdexcept>

namespace fmdt {

BinaryMask binarize(const GrayFrame& frame, int tau) {
  BinaryMask mask(frame.width, frame.height);
  const size_t n = frame.pixels.size();
  for (size_t i = 0; i < n; ++i) mask.pixels[i] = frame.pixels[i] > tau ? 1 : 0;
  return mask;
}

std::vector<RunSegment> encode_runs(const BinaryMask& mask) {
  std::vector<RunSegment> runs;
  for (int y = 0; y < mask.height; ++y) {
    const uint8_t* row = mask.pixels.data() + static_cast<size_t>(y) * mask.width;
    int x = 0;
    while (x < mask.width) {
      while (x < mask.width && row[x] == 0) ++x;
      if (x == mask.width) break;
      const int begin = x;
      while (x < mask.width && row[x] != 0) ++x;
      runs.push_back({y, begin, x - 1});
    }
  }
  return runs;
}

std::vector<RunSegment> threshold_runs(const GrayFrame& frame, int tau) {
  std::vector<RunSegment> runs;
  for (int y = 0; y < frame.height; ++y) {
    const uint8_t* row = frame.row(y);
    int x = 0;
    while (x < frame.width) {
      while (x < frame.width && row[x] <= tau) ++x;
      if (x == frame.width) break;
      const int begin = x;
      while (x < frame.width && row[x] > tau) ++x;
      runs.push_back({y, begin, x - 1});
    }
  }
  return runs;
}

namespace {

// Union-find with path compression over run indices.
class RunForest {
 public:
  explicit RunForest(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int i) {
    int root = i;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[i] != root) {
      const int next = parent_[i];
      parent_[i] = root;
      i = next;
    }
    return root;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller index as root so first-touch raster order survives.
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

LabeledRuns label(std::vector<RunSegment> runs, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("connectivity must be 4 or 8");

  const int n = static_cast<int>(runs.size());
  LabeledRuns out;
  out.runs = std::move(runs);
  out.label_of.assign(n, 0);
  if (n == 0) return out;

  // 8-connectivity widens the overlap window by one column on each side.
  const int reach = connectivity == 8 ? 1 : 0;

  RunForest forest(n);

  // Row index: first run of each row (runs are sorted by row, then x).
  int prev_row_begin = 0, prev_row_end = 0;  // [begin, end) of the previous row's runs
  int row_begin = 0;
  while (row_begin < n) {
    const int row = out.runs[row_begin].row;
    int row_end = row_begin;
    while (row_end < n && out.runs[row_end].row == row) ++row_end;

    if (prev_row_end > prev_row_begin && out.runs[prev_row_begin].row == row - 1) {
      // Merge overlapping runs between consecutive rows with two cursors.
      int p = prev_row_begin;
      for (int c = row_begin; c < row_end; ++c) {
        const int lo = out.runs[c].x_begin - reach;
        const int hi = out.runs[c].x_end + reach;
        while (p < prev_row_end && out.runs[p].x_end < lo) ++p;
        int q = p;
        while (q < prev_row_end && out.runs[q].x_begin <= hi) {
          forest.unite(c, q);
          ++q;
        }
        // q - 1 may still overlap the next run of this row; back off one.
        if (q > p) p = q - 1;
      }
    }

    prev_row_begin = row_begin;
    prev_row_end = row_end;
    row_begin = row_end;
  }

  // Dense relabel in first-touch raster order.
  std::vector<int> dense(n, 0);
  int next_label = 0;
  for (int i = 0; i < n; ++i) {
    const int root = forest.find(i);
    if (dense[root] == 0) dense[root] = ++next_label;
    out.label_of[i] = dense[root];
  }
  out.n_labels = next_label;
  return out;
}

std::vector<CCStats> analyze(const LabeledRuns& labeled) {
  std::vector<CCStats> stats(labeled.n_labels);
  for (int l = 0; l < labeled.n_labels; ++l) stats[l].label = l + 1;

  std::vector<bool> seen(labeled.n_labels, false);
  for (size_t i = 0; i < labeled.runs.size(); ++i) {
    const RunSegment& r = labeled.runs[i];
    CCStats& s = stats[labeled.label_of[i] - 1];

    const int64_t a = r.x_begin, b = r.x_end;
    const int64_t len = b - a + 1;
    const int64_t y = r.row;
    // Closed forms over x = a..b: sum x and sum x^2.
    const int64_t sum_x = (a + b) * len / 2;
    auto cube_sum = [](int64_t m) { return m * (m + 1) * (2 * m + 1) / 6; };
    const int64_t sum_x2 = cube_sum(b) - (a > 0 ? cube_sum(a - 1) : 0);

    if (!seen[labeled.label_of[i] - 1]) {
      seen[labeled.label_of[i] - 1] = true;
      s.x_min = r.x_begin;
      s.x_max = r.x_end;
      s.y_min = r.row;
      s.y_max = r.row;
    } else {
      s.x_min = std::min(s.x_min, r.x_begin);
      s.x_max = std::max(s.x_max, r.x_end);
      s.y_min = std::min(s.y_min, r.row);
      s.y_max = std::max(s.y_max, r.row);
    }
    s.surface += len;
    s.sx += sum_x;
    s.sy += y * len;
    s.sx2 += sum_x2;
    s.sy2 += y * y * len;
    s.sxy += y * sum_x;
  }
  return stats;
}

GrayFrame render_labels(const LabeledRuns& labeled, int width, int height) {
  GrayFrame img(width, height, 0);
  for (size_t i = 0; i < labeled.runs.size(); ++i) {
    const RunSegment& r = labeled.runs[i];
    const uint8_t v = static_cast<uint8_t>(1 + (labeled.label_of[i] - 1) % 255);
    for (int x = r.x_begin; x <= r.x_end; ++x) img.at(x, r.row) = v;
  }
  return img;
}

}  // namespace fmdt
