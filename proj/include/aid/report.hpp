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

#include <optional>
#include <string>
#include <vector>

#include "aid/evaluation.hpp"
#include "aid/raster.hpp"
#include "aid/training.hpp"

namespace aid {

// What report needs from one run directory.
struct RunSummary {
  std::string dir;
  std::string name;  // directory basename
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::optional<EvalResult> eval;
  std::vector<double> instance_weights;  // last logged epoch
  ModelStats stats;
  int image_size = 0;
};

// Throws ContractError naming the run when metrics.jsonl, run.json or the
// checkpoint is missing.
RunSummary load_run(const std::string& dir);

std::vector<EpochRecord> read_metrics(const std::string& path);

// Shortest round-trip decimal; empty for nullopt.
std::string format_metric(const std::optional<double>& v);

std::string comparison_csv(const std::vector<RunSummary>& runs);

Rgb8Image weights_histogram(const std::vector<RunSummary>& runs, int bins = 20);
Rgb8Image map_curve(const std::vector<RunSummary>& runs);

// Ground truth in white, detections in class colours with scores, upscaled.
Rgb8Image render_detections(const Image& image, const std::vector<Detection>& dets,
                            const std::vector<Instance>& gts, const std::string& title, int scale = 4);

struct ReportOptions {
  std::string out_dir;
  std::optional<std::string> dataset_dir;  // enables renders/
  int num_renders = 4;
};

void write_report(const std::vector<std::string>& run_dirs, const ReportOptions& opts);

}  // namespace aid
