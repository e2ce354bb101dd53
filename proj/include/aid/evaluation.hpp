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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "aid/core_types.hpp"
#include "aid/detector.hpp"

namespace aid {

struct EvalConfig {
  double iou_threshold = 0.5;
  DecodeParams decode;
  // Scale buckets split ground-truth area at (32*s)^2 and (96*s)^2.
  double scale_factor = 1.0;

  double small_area() const { return (32.0 * scale_factor) * (32.0 * scale_factor); }
  double medium_area() const { return (96.0 * scale_factor) * (96.0 * scale_factor); }
  void validate() const;
  bool operator==(const EvalConfig&) const = default;
};

void to_json(nlohmann::json& j, const EvalConfig& c);
void from_json(const nlohmann::json& j, EvalConfig& c);

enum class ScaleBucket { kSmall = 0, kMedium = 1, kLarge = 2 };
ScaleBucket scale_bucket(double area, const EvalConfig& cfg);

// Per-detection match result for one image. `gt_index` is the matched
// ground truth or -1.
struct MatchResult {
  std::vector<bool> true_positive;
  std::vector<int> gt_index;
};

// Greedy matching. `dets` must be sorted by descending score; each one takes
// the highest-IoU still-unmatched ground truth of its class with
// IoU >= threshold (ties go to the lower index).
MatchResult match_detections(std::span<const Detection> dets, std::span<const Instance> gts,
                             double iou_threshold = 0.5);

struct ScoredLabel {
  double score = 0;
  bool true_positive = false;
};

// All-point interpolated AP. Detections with equal scores enter the PR curve
// as one step. Returns nullopt when num_gt == 0; throws on num_gt < 0.
std::optional<double> average_precision(std::span<const ScoredLabel> labels, int num_gt);

struct EvalResult {
  std::vector<std::string> class_names;
  std::vector<std::optional<double>> per_class;  // null when the class has no ground truth
  std::optional<double> map50;
  std::optional<double> ap_small;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;
  int num_gt = 0;
  int num_det = 0;
};

nlohmann::json to_json(const EvalResult& r);
EvalResult eval_result_from_json(const nlohmann::json& j);

// Scores precomputed detections. `dets[i]` and `gts[i]` belong to image i.
EvalResult evaluate_detections(std::span<const std::vector<Detection>> dets,
                               std::span<const std::vector<Instance>> gts,
                               const std::vector<std::string>& class_names, const EvalConfig& cfg);

template <typename T>
std::vector<Detection> detect(const Detector<T>& model, const Image& image, const DecodeParams& params);

// Runs the detector on every sample (pixels must be loaded).
template <typename T>
EvalResult evaluate(const Detector<T>& model, std::span<const ImageSample> samples,
                    const std::vector<std::string>& class_names, const EvalConfig& cfg);

struct ModelStats {
  std::uint64_t parameter_count = 0;
  std::uint64_t flops_per_forward = 0;  // 2 * multiply-accumulates
  int input_height = 0;
  int input_width = 0;

  double gflops() const { return static_cast<double>(flops_per_forward) * 1e-9; }
};

// Statistics of a single convolution layer.
ModelStats conv_stats(int in_channels, int out_channels, int kernel, int out_height, int out_width);

template <typename T>
ModelStats model_stats(const Detector<T>& model, int input_height, int input_width);

nlohmann::json to_json(const ModelStats& s);

}  // namespace aid
