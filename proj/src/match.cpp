#include "fmdt/match.hpp"

#include <algorithm>
#include <stdexcept>

namespace fmdt {

namespace {

struct Candidate {
  double distance;
  int label_from, label_to;
  int from, to;
};

}  // namespace

std::vector<Association> knn_match(const std::vector<Detection>& dets_t,
                                   const std::vector<Detection>& dets_t1, int k,
                                   double ratio_max) {
  if (k < 1) throw std::invalid_argument("knn_match: k must be >= 1");
  if (ratio_max < 1.0) throw std::invalid_argument("knn_match: ratio_max must be >= 1");

  const int na = static_cast<int>(dets_t.size());
  const int nb = static_cast<int>(dets_t1.size());
  if (na == 0 || nb == 0) return {};

  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<size_t>(na) * std::min(k, nb));

  std::vector<Candidate> row;
  for (int i = 0; i < na; ++i) {
    row.clear();
    const Vec2 p = centroid_of(dets_t[i]);
    for (int j = 0; j < nb; ++j)
      row.push_back({distance(p, centroid_of(dets_t1[j])), dets_t[i].cc.label,
                     dets_t1[j].cc.label, i, j});
    const int keep = std::min<int>(k, nb);
    std::partial_sort(row.begin(), row.begin() + keep, row.end(),
                      [](const Candidate& a, const Candidate& b) {
                        return std::tie(a.distance, a.label_to) < std::tie(b.distance, b.label_to);
                      });
    candidates.insert(candidates.end(), row.begin(), row.begin() + keep);
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.label_from, a.label_to) <
           std::tie(b.distance, b.label_from, b.label_to);
  });

  std::vector<bool> used_a(na, false), used_b(nb, false);
  std::vector<Association> out;
  for (const Candidate& c : candidates) {
    if (used_a[c.from] || used_b[c.to]) continue;
    const double sa = static_cast<double>(dets_t[c.from].cc.surface);
    const double sb = static_cast<double>(dets_t1[c.to].cc.surface);
    if (std::max(sa, sb) > ratio_max * std::min(sa, sb)) continue;
    used_a[c.from] = true;
    used_b[c.to] = true;
    out.push_back({c.from, c.to, c.distance, 0.0});
  }

  // Stable downstream order: by source index.
  std::sort(out.begin(), out.end(),
            [](const Association& a, const Association& b) { return a.from < b.from; });
  return out;
}

}  // namespace fmdt
