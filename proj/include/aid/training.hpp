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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aid/checkpoint.hpp"
#include "aid/data.hpp"
#include "aid/distillation.hpp"
#include "aid/evaluation.hpp"

namespace aid {

enum class TrainMode { kTeacher, kNoKdStudent, kUniformKd, kAidKd, kSelfDistill };
enum class OptimizerKind { kSgdMomentum, kAdam };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);
std::string to_string(OptimizerKind o);
OptimizerKind optimizer_from_string(const std::string& s);

bool mode_needs_teacher(TrainMode m);

struct TrainConfig {
  std::uint64_t seed = 0;
  int epochs = 20;
  int batch_size = 8;
  double learning_rate = 0.02;
  std::vector<int> lr_decay_epochs{14, 18};  // 0-based epochs at which the rate is multiplied
  double lr_decay_factor = 0.1;
  int warmup_steps = 100;  // linear ramp from 1/10 of the rate
  OptimizerKind optimizer = OptimizerKind::kSgdMomentum;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double grad_clip_norm = 10.0;
  double flip_prob = 0.5;
  // self_distill: start the new model from the old one's weights instead of
  // a fresh seeded initialisation.
  bool self_distill_init_copy = false;
  TrainMode mode = TrainMode::kAidKd;
  DetectorSpec detector;
  AssignConfig assign;
  DistillConfig distill;
  EvalConfig eval;

  void validate() const;
  // The distillation settings actually used by `mode` (alpha forced to 0 in
  // uniform_kd).
  DistillConfig effective_distill() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);

struct EpochRecord {
  int epoch = 0;
  double task_loss = 0;
  double distill_loss = 0;
  std::optional<double> weight_min;
  std::optional<double> weight_mean;
  std::optional<double> weight_max;
  std::optional<double> val_map50;
  double seconds = 0;
};

nlohmann::json to_json(const EpochRecord& r, bool include_seconds = true);

struct RunRecord {
  TrainMode mode = TrainMode::kAidKd;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::optional<EvalResult> final_eval;
  std::string checkpoint_path;
  std::string teacher_hash_before;
  std::string teacher_hash_after;
  int image_size = 0;  // side of the first training image
  double seconds = 0;
};

nlohmann::json to_json(const RunRecord& r);

// Forward-only view of a trained model. Gradient or update requests raise
// FrozenModelError.
class FrozenDetector {
 public:
  explicit FrozenDetector(Detector<float> model) : model_(std::move(model)) {}

  const Detector<float>& model() const { return model_; }
  const DetectorSpec& spec() const { return model_.spec(); }
  DetectorOutput<float> forward(const nn::Tensor<float>& input) const { return model_.forward(input); }
  std::string hash() const { return parameter_hash(model_); }

  [[noreturn]] void backward(const HeadOutputs<float>&) const;
  [[noreturn]] void apply_update(double learning_rate) const;

 private:
  Detector<float> model_;
};

FrozenDetector freeze_teacher(const Checkpoint& checkpoint);
FrozenDetector freeze_teacher(const std::string& checkpoint_path);

// Per-instance weights logged for one image.
struct ImageWeights {
  std::string image_id;
  InstanceLossTable table;
};

struct BatchStats {
  double task_loss = 0;     // sum over the batch
  double distill_loss = 0;  // sum over the batch
  std::vector<double> instance_weights;
  std::vector<ImageWeights> weights;
  double grad_norm = 0;
};

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double momentum, double weight_decay);
  void step(const std::vector<nn::Param<float>*>& params, double learning_rate);

 private:
  OptimizerKind kind_;
  double momentum_;
  double weight_decay_;
  long step_count_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

// Learning rate at a global step within an epoch.
double learning_rate_at(const TrainConfig& cfg, int epoch, long global_step);

// Owns the model being trained. The loop is batch-at-a-time so that it can
// be replayed step by step.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const FrozenDetector* teacher);

  Detector<float>& model() { return model_; }
  const Detector<float>& model() const { return model_; }
  ChannelAdapter<float>* adapter() { return adapter_ ? &*adapter_ : nullptr; }
  const TrainConfig& config() const { return cfg_; }

  // Trainable parameters: the model plus the adapter when present.
  std::vector<nn::Param<float>*> trainable();

  // Forward/backward over a batch (already flipped as desired), then one
  // optimizer step at `learning_rate`. Throws NonFiniteLoss with context.
  BatchStats train_batch(const std::vector<const ImageSample*>& batch, double learning_rate, int epoch,
                         int batch_index);

  // Seeded per-epoch order and flips.
  struct EpochPlan {
    std::vector<std::size_t> order;
    std::vector<bool> flip;
  };
  EpochPlan plan_epoch(std::size_t num_samples, int epoch) const;

  EpochRecord run_epoch(const DatasetHandle& train, const DatasetHandle* val, int epoch,
                        std::vector<ImageWeights>* weights_log = nullptr);

  long global_step() const { return global_step_; }

 private:
  TrainConfig cfg_;
  DistillConfig distill_;
  const FrozenDetector* teacher_;
  Detector<float> model_;
  std::optional<ChannelAdapter<float>> adapter_;
  Optimizer optimizer_;
  long global_step_ = 0;
};

struct TrainOutputs {
  std::string out_dir;  // empty: nothing written
  std::function<void(const EpochRecord&)> on_epoch;
};

// Full run. With an out_dir, writes metrics.jsonl (one line per epoch),
// model.ckpt (+ manifest), eval.json, instance_weights.jsonl (last epoch)
// and run.json.
RunRecord train(const TrainConfig& cfg, const DatasetHandle& train_data, const DatasetHandle& val_data,
                const FrozenDetector* teacher, const TrainOutputs& outputs = {},
                const nlohmann::json& resolved_config = nlohmann::json::object());

}  // namespace aid
