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

#include "aid/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "aid/errors.hpp"
#include "aid/rng.hpp"

namespace aid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kInitSalt = 1;
constexpr std::uint64_t kAdapterSalt = 2;
constexpr std::uint64_t kEpochSalt = 1000;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kTeacher:
      return "teacher";
    case TrainMode::kNoKdStudent:
      return "no_kd_student";
    case TrainMode::kUniformKd:
      return "uniform_kd";
    case TrainMode::kAidKd:
      return "aid_kd";
    case TrainMode::kSelfDistill:
      return "self_distill";
  }
  return "unknown";
}

TrainMode train_mode_from_string(const std::string& s) {
  for (TrainMode m : {TrainMode::kTeacher, TrainMode::kNoKdStudent, TrainMode::kUniformKd, TrainMode::kAidKd,
                      TrainMode::kSelfDistill})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown training mode '" + s +
                    "' (expected teacher, no_kd_student, uniform_kd, aid_kd or self_distill)");
}

std::string to_string(OptimizerKind o) { return o == OptimizerKind::kAdam ? "adam" : "sgd_momentum"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd_momentum") return OptimizerKind::kSgdMomentum;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd_momentum or adam)");
}

bool mode_needs_teacher(TrainMode m) {
  return m == TrainMode::kUniformKd || m == TrainMode::kAidKd || m == TrainMode::kSelfDistill;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train.epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train.batch_size must be >= 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ValidationError("train.learning_rate must be > 0");
  if (!(lr_decay_factor > 0) || lr_decay_factor > 1) throw ValidationError("train.lr_decay_factor must lie in (0, 1]");
  if (warmup_steps < 0) throw ValidationError("train.warmup_steps must be >= 0");
  if (momentum < 0 || momentum >= 1) throw ValidationError("train.momentum must lie in [0, 1)");
  if (weight_decay < 0) throw ValidationError("train.weight_decay must be >= 0");
  if (!(grad_clip_norm > 0)) throw ValidationError("train.grad_clip_norm must be > 0");
  if (flip_prob < 0 || flip_prob > 1) throw ValidationError("train.flip_prob must lie in [0, 1]");
  detector.validate();
  distill.validate();
  eval.validate();
}

DistillConfig TrainConfig::effective_distill() const {
  DistillConfig d = distill;
  if (mode == TrainMode::kUniformKd) d.aid.alpha = 0.0;
  return d;
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"seed", c.seed},
           {"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"lr_decay_epochs", c.lr_decay_epochs},
           {"lr_decay_factor", c.lr_decay_factor},
           {"warmup_steps", c.warmup_steps},
           {"optimizer", to_string(c.optimizer)},
           {"momentum", c.momentum},
           {"weight_decay", c.weight_decay},
           {"grad_clip_norm", c.grad_clip_norm},
           {"flip_prob", c.flip_prob},
           {"self_distill_init_copy", c.self_distill_init_copy},
           {"mode", to_string(c.mode)}};
}

json to_json(const EpochRecord& r, bool include_seconds) {
  json j{{"epoch", r.epoch},
         {"task_loss", r.task_loss},
         {"distill_loss", r.distill_loss},
         {"weight_min", optional_json(r.weight_min)},
         {"weight_mean", optional_json(r.weight_mean)},
         {"weight_max", optional_json(r.weight_max)},
         {"val_map50", optional_json(r.val_map50)}};
  if (include_seconds) j["seconds"] = r.seconds;
  return j;
}

json to_json(const RunRecord& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) epochs.push_back(to_json(e));
  json j{{"mode", to_string(r.mode)},
         {"seed", r.seed},
         {"epochs", epochs},
         {"checkpoint", r.checkpoint_path},
         {"image_size", r.image_size},
         {"seconds", r.seconds}};
  j["final_eval"] = r.final_eval ? to_json(*r.final_eval) : json(nullptr);
  if (!r.teacher_hash_before.empty()) {
    j["teacher_hash_before"] = r.teacher_hash_before;
    j["teacher_hash_after"] = r.teacher_hash_after;
  }
  return j;
}

void FrozenDetector::backward(const HeadOutputs<float>&) const {
  throw FrozenModelError("teacher is frozen: gradients cannot be requested");
}

void FrozenDetector::apply_update(double) const {
  throw FrozenModelError("teacher is frozen: parameters cannot be updated");
}

FrozenDetector freeze_teacher(const Checkpoint& checkpoint) { return FrozenDetector(checkpoint.model); }

FrozenDetector freeze_teacher(const std::string& checkpoint_path) {
  return FrozenDetector(load_checkpoint(checkpoint_path).model);
}

Optimizer::Optimizer(OptimizerKind kind, double momentum, double weight_decay)
    : kind_(kind), momentum_(momentum), weight_decay_(weight_decay) {}

void Optimizer::step(const std::vector<nn::Param<float>*>& params, double learning_rate) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->size(), 0.0f);
      v_.emplace_back(kind_ == OptimizerKind::kAdam ? p->size() : 0, 0.0f);
    }
  }
  if (m_.size() != params.size()) throw ShapeError("optimizer: parameter set changed between steps");
  ++step_count_;
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Param<float>& p = *params[k];
    // Decay applies to convolution kernels only, not biases.
    const double wd = p.shape.size() == 4 ? weight_decay_ : 0.0;
    std::vector<float>& m = m_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = static_cast<double>(p.grad[i]) + wd * p.value[i];
      if (kind_ == OptimizerKind::kSgdMomentum) {
        m[i] = static_cast<float>(momentum_ * m[i] + g);
        p.value[i] = static_cast<float>(p.value[i] - learning_rate * m[i]);
      } else {
        std::vector<float>& v = v_[k];
        m[i] = static_cast<float>(b1 * m[i] + (1 - b1) * g);
        v[i] = static_cast<float>(b2 * v[i] + (1 - b2) * g * g);
        p.value[i] = static_cast<float>(p.value[i] - learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps));
      }
    }
  }
}

double learning_rate_at(const TrainConfig& cfg, int epoch, long global_step) {
  double lr = cfg.learning_rate;
  for (int e : cfg.lr_decay_epochs)
    if (epoch >= e) lr *= cfg.lr_decay_factor;
  if (global_step < cfg.warmup_steps)
    lr *= 0.1 + 0.9 * static_cast<double>(global_step) / static_cast<double>(cfg.warmup_steps);
  return lr;
}

Trainer::Trainer(const TrainConfig& cfg, const FrozenDetector* teacher)
    : cfg_(cfg),
      distill_(cfg.effective_distill()),
      teacher_(mode_needs_teacher(cfg.mode) ? teacher : nullptr),
      optimizer_(cfg.optimizer, cfg.momentum, cfg.weight_decay) {
  cfg_.validate();
  if (mode_needs_teacher(cfg_.mode) && !teacher_)
    throw MissingTeacher("mode " + to_string(cfg_.mode) + " requires a teacher checkpoint");
  if (teacher_) {
    const DetectorSpec& ts = teacher_->spec();
    if (cfg_.mode == TrainMode::kSelfDistill && !(ts == cfg_.detector))
      throw ArchitectureMismatch("self_distill needs the old model's architecture to equal the new model's");
    if (ts.num_classes != cfg_.detector.num_classes || ts.fpn_strides != cfg_.detector.fpn_strides)
      throw ArchitectureMismatch("teacher and student disagree on classes or FPN strides");
  }
  if (cfg_.mode == TrainMode::kSelfDistill && cfg_.self_distill_init_copy)
    model_ = teacher_->model();
  else
    model_ = Detector<float>(cfg_.detector, Rng::mix(cfg_.seed, kInitSalt));

  if (teacher_ && teacher_->spec().fpn_channels() != cfg_.detector.fpn_channels() &&
      distill_.base_loss != BaseLoss::kHeadKl) {
    if (!distill_.adapter_enabled)
      throw ArchitectureMismatch("student/teacher FPN widths differ and distill.adapter_enabled is false");
    adapter_.emplace(cfg_.detector.fpn_channels(), teacher_->spec().fpn_channels(),
                     Rng::mix(cfg_.seed, kAdapterSalt));
  }
}

std::vector<nn::Param<float>*> Trainer::trainable() {
  auto ps = model_.params();
  if (adapter_)
    for (auto* p : adapter_->params()) ps.push_back(p);
  return ps;
}

BatchStats Trainer::train_batch(const std::vector<const ImageSample*>& batch, double learning_rate, int epoch,
                                int batch_index) {
  BatchStats stats;
  auto params = trainable();
  for (auto* p : params) p->zero_grad();
  const double scale = 1.0 / static_cast<double>(batch.size());
  const Detector<float>* teacher = teacher_ ? &teacher_->model() : nullptr;
  for (const ImageSample* s : batch) {
    const auto input = image_to_tensor<float>(s->pixels, cfg_.detector.max_stride());
    const auto targets = assign_targets(s->instances, cfg_.detector, cfg_.assign, s->pixels.height, s->pixels.width);
    ObjectiveResult r;
    try {
      r = cfg_.mode == TrainMode::kSelfDistill
              ? self_distill_objective<float>(model_, *teacher, input, targets, distill_, true, scale)
              : distill_objective<float>(model_, adapter(), teacher, input, targets, distill_, true, scale);
    } catch (const NumericError& e) {
      throw NonFiniteLoss(std::string("image ") + s->image_id + ": " + e.what(), epoch, batch_index);
    }
    stats.task_loss += r.task.total;
    stats.distill_loss += r.distill;
    if (r.table) {
      for (const auto& w : r.table->instances) stats.instance_weights.push_back(w.weight);
      stats.weights.push_back({s->image_id, *r.table});
    }
  }

  double sq = 0;
  for (const auto* p : params)
    for (float g : p->grad) sq += static_cast<double>(g) * g;
  stats.grad_norm = std::sqrt(sq);
  if (!std::isfinite(stats.grad_norm)) throw NonFiniteLoss("non-finite gradient norm", epoch, batch_index);
  if (stats.grad_norm > cfg_.grad_clip_norm) {
    const float f = static_cast<float>(cfg_.grad_clip_norm / stats.grad_norm);
    for (auto* p : params)
      for (float& g : p->grad) g *= f;
  }
  optimizer_.step(params, learning_rate);
  ++global_step_;
  return stats;
}

Trainer::EpochPlan Trainer::plan_epoch(std::size_t num_samples, int epoch) const {
  Rng rng(Rng::mix(cfg_.seed, kEpochSalt + static_cast<std::uint64_t>(epoch)));
  EpochPlan plan;
  plan.order.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) plan.order[i] = i;
  for (std::size_t i = num_samples; i > 1; --i)
    std::swap(plan.order[i - 1], plan.order[rng.uniform_int(0, static_cast<int>(i - 1))]);
  plan.flip.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) plan.flip[i] = rng.bernoulli(cfg_.flip_prob);
  return plan;
}

EpochRecord Trainer::run_epoch(const DatasetHandle& train, const DatasetHandle* val, int epoch,
                               std::vector<ImageWeights>* weights_log) {
  if (train.samples.empty()) throw EmptyDataset("training set is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const EpochPlan plan = plan_epoch(train.size(), epoch);
  EpochRecord rec;
  rec.epoch = epoch;
  double task = 0, distill = 0;
  std::vector<double> weights;
  int batch_index = 0;
  for (std::size_t start = 0; start < plan.order.size(); start += cfg_.batch_size, ++batch_index) {
    const std::size_t end = std::min(plan.order.size(), start + cfg_.batch_size);
    std::vector<ImageSample> flipped;
    flipped.reserve(end - start);
    std::vector<const ImageSample*> batch;
    for (std::size_t i = start; i < end; ++i) {
      const ImageSample& s = train.samples[plan.order[i]];
      if (plan.flip[i]) {
        flipped.push_back(flip_horizontal(s));
        batch.push_back(&flipped.back());
      } else {
        batch.push_back(&s);
      }
    }
    const BatchStats st = train_batch(batch, learning_rate_at(cfg_, epoch, global_step_), epoch, batch_index);
    task += st.task_loss;
    distill += st.distill_loss;
    weights.insert(weights.end(), st.instance_weights.begin(), st.instance_weights.end());
    if (weights_log) weights_log->insert(weights_log->end(), st.weights.begin(), st.weights.end());
  }
  rec.task_loss = task / static_cast<double>(train.size());
  rec.distill_loss = distill / static_cast<double>(train.size());
  if (!std::isfinite(rec.task_loss) || !std::isfinite(rec.distill_loss))
    throw NonFiniteLoss("non-finite epoch mean loss", epoch, batch_index);
  if (teacher_ && !weights.empty()) {
    double sum = 0;
    for (double w : weights) sum += w;
    rec.weight_min = *std::min_element(weights.begin(), weights.end());
    rec.weight_max = *std::max_element(weights.begin(), weights.end());
    rec.weight_mean = sum / static_cast<double>(weights.size());
  }
  if (val && !val->samples.empty()) rec.val_map50 = evaluate(model_, val->samples, val->class_names, cfg_.eval).map50;
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  out << line << "\n";
  if (!out) throw ContractError("failed writing '" + path.string() + "'");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw ContractError("failed writing '" + path.string() + "'");
}

}  // namespace

RunRecord train(const TrainConfig& cfg, const DatasetHandle& train_data, const DatasetHandle& val_data,
                const FrozenDetector* teacher, const TrainOutputs& outputs, const json& resolved_config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (train_data.samples.empty()) throw EmptyDataset("training set is empty");
  if (static_cast<int>(train_data.class_names.size()) != cfg.detector.num_classes)
    throw ClassCountMismatch("detector has " + std::to_string(cfg.detector.num_classes) + " classes, dataset has " +
                             std::to_string(train_data.class_names.size()));
  Trainer trainer(cfg, teacher);

  RunRecord rec;
  rec.mode = cfg.mode;
  rec.seed = cfg.seed;
  rec.image_size = std::max(train_data.samples.front().height, train_data.samples.front().width);
  const bool has_teacher = mode_needs_teacher(cfg.mode);
  if (has_teacher) rec.teacher_hash_before = teacher->hash();

  fs::path dir;
  if (!outputs.out_dir.empty()) {
    dir = outputs.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ContractError("cannot create run directory '" + outputs.out_dir + "': " + ec.message());
    fs::remove(dir / "metrics.jsonl", ec);
  }

  std::vector<ImageWeights> last_weights;
  for (int e = 0; e < cfg.epochs; ++e) {
    last_weights.clear();
    EpochRecord er = trainer.run_epoch(train_data, &val_data, e, has_teacher ? &last_weights : nullptr);
    if (!dir.empty()) append_line(dir / "metrics.jsonl", to_json(er).dump());
    if (outputs.on_epoch) outputs.on_epoch(er);
    rec.epochs.push_back(er);
  }
  if (!val_data.samples.empty())
    rec.final_eval = evaluate(trainer.model(), val_data.samples, val_data.class_names, cfg.eval);
  if (has_teacher) rec.teacher_hash_after = teacher->hash();

  if (!dir.empty()) {
    CheckpointMeta meta{cfg.detector, resolved_config, cfg.seed, cfg.epochs};
    rec.checkpoint_path = (dir / "model.ckpt").string();
    save_checkpoint(rec.checkpoint_path, trainer.model(), meta, trainer.adapter());
    if (rec.final_eval) write_file(dir / "eval.json", to_json(*rec.final_eval).dump(2) + "\n");
    if (has_teacher) {
      std::string lines;
      for (const auto& w : last_weights) {
        json j = to_json(w.table);
        j["image_id"] = w.image_id;
        j["epoch"] = cfg.epochs - 1;
        lines += j.dump() + "\n";
      }
      write_file(dir / "instance_weights.jsonl", lines);
    }
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!dir.empty()) write_file(dir / "run.json", to_json(rec).dump(2) + "\n");
  return rec;
}

}  // namespace aid
