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

#include "json.hpp"

#include "aid/aid_weighting.hpp"
#include "aid/detector.hpp"

namespace aid {

enum class BaseLoss { kFeatureL2, kAttentionGuided, kHeadKl };

std::string to_string(BaseLoss b);
BaseLoss base_loss_from_string(const std::string& s);

struct DistillConfig {
  BaseLoss base_loss = BaseLoss::kAttentionGuided;
  // Attention-guided term weights and mask temperature; defaults are the
  // single-stage (RetinaNet) setting.
  double beta = 2e-2;
  double gamma = 4e-4;
  double eta = 4e-4;
  double temperature = 0.1;
  double kl_temperature = 1.0;  // head_kl softening temperature
  AidConfig aid;
  bool adapter_enabled = true;

  void validate() const;
  bool operator==(const DistillConfig&) const = default;
};

void to_json(nlohmann::json& j, const DistillConfig& c);
void from_json(const nlohmann::json& j, DistillConfig& c);

// Per-level, per-location loss values (1 x H x W tensors).
template <typename T>
struct LossMap {
  std::vector<nn::Tensor<T>> levels;

  std::size_t num_locations() const;
};

// Learnable 1x1 projection from student to teacher FPN width, shared across
// levels. Part of the student's parameter set.
template <typename T>
class ChannelAdapter {
 public:
  ChannelAdapter() = default;
  ChannelAdapter(int student_channels, int teacher_channels, std::uint64_t seed);

  int in_channels() const { return conv_.in_channels(); }
  int out_channels() const { return conv_.out_channels(); }

  FPNFeatures<T> forward(const FPNFeatures<T>& student) const;
  FPNFeatures<T> backward(const FPNFeatures<T>& student, const FPNFeatures<T>& grad_out);

  std::vector<nn::Param<T>*> params() { return {&conv_.weight(), &conv_.bias()}; }
  std::vector<const nn::Param<T>*> params() const { return {&conv_.weight(), &conv_.bias()}; }

 private:
  nn::Conv2d<T> conv_;
};

template <typename T>
struct AttentionMaps {
  std::vector<std::vector<double>> spatial;  // per level, H*W entries summing to H*W
  std::vector<std::vector<double>> channel;  // per level, C entries summing to C
};

template <typename T>
AttentionMaps<T> attention_maps(const FPNFeatures<T>& feats, double temperature);

// Mean over channels of the squared student/teacher difference.
template <typename T>
LossMap<T> feature_l2_map(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher);

// d(sum_p upstream[p] * map[p]) / d(student)
template <typename T>
FPNFeatures<T> feature_l2_backward(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher,
                                   const LossMap<T>& upstream);

// beta * teacher-attention-masked feature L2 + gamma * spatial attention gap
// + eta * channel attention gap (broadcast over locations).
template <typename T>
LossMap<T> attention_guided_map(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher,
                                const DistillConfig& cfg);

template <typename T>
FPNFeatures<T> attention_guided_backward(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher,
                                         const DistillConfig& cfg, const LossMap<T>& upstream);

// Per-location KL(teacher || student) over temperature-softened class
// distributions, times temperature^2.
template <typename T>
LossMap<T> head_kl_map(const HeadOutputs<T>& student, const HeadOutputs<T>& teacher, double temperature);

// Gradient on the student's class logits (other heads zero).
template <typename T>
HeadOutputs<T> head_kl_backward(const HeadOutputs<T>& student, const HeadOutputs<T>& teacher, double temperature,
                                const LossMap<T>& upstream);

// sum(weight * base) / number of locations. Weights are constants.
template <typename T>
double aid_distill_loss(const LossMap<T>& base, const WeightMap& weights);

// d(aid_distill_loss)/d(base) scaled by `scale`.
template <typename T>
LossMap<T> aid_distill_upstream(const WeightMap& weights, double scale);

// task.total + lambda * distill; throws NumericError on a non-finite result.
double student_total_loss(const TaskLossBreakdown& task, double aid_distill, double lambda);

// One image's objective with everything that produced it.
struct ObjectiveResult {
  TaskLossBreakdown task;
  std::optional<InstanceLossTable> table;
  std::optional<WeightMap> weights;
  double distill = 0;
  double total = 0;
};

// Student objective for one image: task loss alone when `teacher` is null,
// otherwise task + lambda * AID-weighted distillation against the teacher.
// The teacher is only ever run forward. With `accumulate`, gradients are
// added to the student's (and adapter's) parameter accumulators, scaled by
// `grad_scale`.
template <typename T>
ObjectiveResult distill_objective(Detector<T>& student, ChannelAdapter<T>* adapter, const Detector<T>* teacher,
                                  const nn::Tensor<T>& input, const TargetAssignment& targets,
                                  const DistillConfig& cfg, bool accumulate, double grad_scale = 1.0);

// Self-distillation: the previous model plays the teacher role and must
// share the new model's architecture.
template <typename T>
ObjectiveResult self_distill_objective(Detector<T>& new_model, const Detector<T>& old_model,
                                       const nn::Tensor<T>& input, const TargetAssignment& targets,
                                       const DistillConfig& cfg, bool accumulate, double grad_scale = 1.0);

// Value-only self-distillation objective (task + lambda * AID distill) from
// precomputed old/new outputs. Throws ArchitectureMismatch when the two
// outputs do not share geometry.
template <typename T>
double self_distill_loss(const TaskLossBreakdown& new_task, const DetectorOutput<T>& old_outputs,
                         const DetectorOutput<T>& new_outputs, const TargetAssignment& targets,
                         const DistillConfig& cfg);

}  // namespace aid
