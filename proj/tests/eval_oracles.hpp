// Copyright 2026 The AID Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Brute-force references for matching and average precision.

#include <algorithm>
#include <vector>

#include "aid/evaluation.hpp"

namespace aid::test {

// AP as the integral of the interpolated precision. Recall only takes values
// k / num_gt, so the integrand is constant on each such interval and can be
// sampled at the midpoints.
inline double oracle_ap(const std::vector<ScoredLabel>& labels, int num_gt) {
  std::vector<double> thresholds;
  for (const auto& l : labels) thresholds.push_back(l.score);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::vector<std::pair<double, double>> pr;  // (recall, precision)
  for (double t : thresholds) {
    int kept = 0, tp = 0;
    for (const auto& l : labels)
      if (l.score >= t) {
        ++kept;
        tp += l.true_positive;
      }
    pr.emplace_back(static_cast<double>(tp) / num_gt, static_cast<double>(tp) / kept);
  }
  double ap = 0;
  for (int m = 1; m <= num_gt; ++m) {
    const double r = (m - 0.5) / num_gt;
    double best = 0;
    for (auto [rec, prec] : pr)
      if (rec >= r) best = std::max(best, prec);
    ap += best / num_gt;
  }
  return ap;
}

// Straightforward greedy matcher for one image.
inline std::vector<int> oracle_match(const std::vector<Detection>& dets, const std::vector<Instance>& gts, double thr) {
  std::vector<int> out(dets.size(), -1);
  std::vector<bool> used(gts.size(), false);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    int best = -1;
    double best_iou = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].class_id != dets[d].class_id) continue;
      const double v = box_iou(dets[d].box, gts[g].box);
      if (v >= thr && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) used[best] = true;
    out[d] = best;
  }
  return out;
}

}  // namespace aid::test
