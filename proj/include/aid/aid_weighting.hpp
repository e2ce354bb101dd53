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

#include <span>
#include <vector>

#include "json.hpp"

#include "aid/detector.hpp"

namespace aid {

// Which task-loss components make up an instance's teacher difficulty.
struct LossComponents {
  bool cls = true;
  bool reg = true;
  bool obj = true;

  bool operator==(const LossComponents&) const = default;
};

struct AidConfig {
  double alpha = 0.1;
  double lambda = 1.0;
  double w_bg = 1.0;  // constant weight of background locations
  bool scale_weighting = true;
  LossComponents loss_components;

  void validate() const;
  bool operator==(const AidConfig&) const = default;
};

void to_json(nlohmann::json& j, const AidConfig& c);
void from_json(const nlohmann::json& j, AidConfig& c);

struct InstanceWeight {
  int instance_id = 0;
  int num_locations = 0;
  double d_teacher = 0;  // mean teacher task loss over the instance's locations
  double weight = 1;     // exp(-alpha * d_teacher)
};

struct LevelWeight {
  int num_foreground = 0;
  double d_level = 0;
  double weight = 1;
};

// Teacher difficulty per ground-truth instance and per FPN level. Only
// instances that own at least one location appear.
struct InstanceLossTable {
  std::vector<InstanceWeight> instances;
  std::vector<LevelWeight> levels;

  const InstanceWeight* find(int instance_id) const;
};

// Per-level H x W distillation weights.
struct WeightMap {
  struct Level {
    int height = 0;
    int width = 0;
    std::vector<double> values;
  };
  std::vector<Level> levels;

  std::size_t num_locations() const;
  bool operator==(const WeightMap& o) const;
};

// exp(-alpha * d). Rejects negative or non-finite inputs.
double aid_weight(double d, double alpha);

// Aggregates a (teacher) task-loss breakdown into the instance table.
InstanceLossTable teacher_instance_losses(const TaskLossBreakdown& teacher_loss, const TargetAssignment& targets,
                                          const AidConfig& cfg);

// Convenience: runs task_loss on the teacher's outputs first.
template <typename T>
InstanceLossTable teacher_instance_losses(const HeadOutputs<T>& teacher_outputs, const TargetAssignment& targets,
                                          const AidConfig& cfg);

WeightMap build_weight_map(const InstanceLossTable& table, const TargetAssignment& targets, const AidConfig& cfg);

struct ExtremeWeightReport {
  double alpha = 0;
  std::vector<double> d_values;
  std::vector<double> weights;
  bool zero_loss_gives_one = true;       // every d == 0 maps to exactly 1
  bool strictly_decreasing = true;       // over the grid sorted by d (alpha > 0)
  bool large_loss_vanishes = true;       // weight(max d) < 1e-300 or underflows, when max d >= 1e4/alpha
  bool ok() const { return zero_loss_gives_one && strictly_decreasing && large_loss_vanishes; }
};

ExtremeWeightReport extreme_weight_behavior_check(std::span<const double> d_values, double alpha);

nlohmann::json to_json(const InstanceLossTable& table);
nlohmann::json to_json(const WeightMap& map);

}  // namespace aid
