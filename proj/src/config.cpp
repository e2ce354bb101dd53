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

#include "aid/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "aid/errors.hpp"

namespace aid {

using nlohmann::json;

DetectorSpec ExperimentConfig::teacher_spec() const {
  DetectorSpec s = train.detector;
  s.width_multiplier = teacher_width_multiplier;
  return s;
}

void ExperimentConfig::validate() const {
  data.validate();
  train.validate();
  const AssignConfig& a = train.assign;
  if (!(a.size_lo_factor > 0) || !(a.size_hi_factor > a.size_lo_factor))
    throw ValidationError("assign.size_lo_factor/size_hi_factor must satisfy 0 < lo < hi");
  if (!(a.center_fraction > 0) || a.center_fraction > 1)
    throw ValidationError("assign.center_fraction must lie in (0, 1]");
  if (!(teacher_width_multiplier > 0)) throw ValidationError("detector.teacher_width_multiplier must be > 0");
  teacher_spec().validate();
}

json to_json(const ExperimentConfig& c) {
  json detector = c.train.detector;
  detector["teacher_width_multiplier"] = c.teacher_width_multiplier;
  return json{{"data", c.data},
              {"detector", detector},
              {"assign", c.train.assign},
              {"aid", c.train.distill.aid},
              {"distill", c.train.distill},
              {"train", c.train},
              {"eval", c.train.eval}};
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.data = j.at("data").get<SyntheticSpec>();
    const json& d = j.at("detector");
    c.train.detector = d.get<DetectorSpec>();
    c.teacher_width_multiplier = d.at("teacher_width_multiplier").get<double>();
    c.train.assign = j.at("assign").get<AssignConfig>();
    c.train.distill = j.at("distill").get<DistillConfig>();
    c.train.distill.aid = j.at("aid").get<AidConfig>();
    c.train.eval = j.at("eval").get<EvalConfig>();
    const json& t = j.at("train");
    c.train.seed = t.at("seed").get<std::uint64_t>();
    c.train.epochs = t.at("epochs").get<int>();
    c.train.batch_size = t.at("batch_size").get<int>();
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.lr_decay_epochs = t.at("lr_decay_epochs").get<std::vector<int>>();
    c.train.lr_decay_factor = t.at("lr_decay_factor").get<double>();
    c.train.warmup_steps = t.at("warmup_steps").get<int>();
    c.train.optimizer = optimizer_from_string(t.at("optimizer").get<std::string>());
    c.train.momentum = t.at("momentum").get<double>();
    c.train.weight_decay = t.at("weight_decay").get<double>();
    c.train.grad_clip_norm = t.at("grad_clip_norm").get<double>();
    c.train.flip_prob = t.at("flip_prob").get<double>();
    c.train.self_distill_init_copy = t.at("self_distill_init_copy").get<bool>();
    c.train.mode = train_mode_from_string(t.at("mode").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

namespace {

void merge_strict(json& base, const json& overlay, const std::string& path) {
  if (!overlay.is_object()) throw ConfigError("config: '" + (path.empty() ? "<root>" : path) + "' must be an object");
  for (const auto& [key, value] : overlay.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("config: unknown key '" + where + "'");
    json& slot = base[key];
    if (slot.is_object())
      merge_strict(slot, value, where);
    else
      slot = value;
  }
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) throw ConfigError("--set: unknown key '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("--set: '" + path + "' names a section, not a key");
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = value;
}

ResolvedConfig resolve_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides,
                              const std::optional<std::string>& env_seed) {
  json doc = to_json(ExperimentConfig{});
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file '" + *path + "'");
    json user = json::parse(in, nullptr, false);
    if (user.is_discarded()) throw ConfigError("config file '" + *path + "' is not valid JSON");
    merge_strict(doc, user, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  if (env_seed) {
    std::uint64_t seed = 0;
    const char* b = env_seed->data();
    const char* e = b + env_seed->size();
    auto [ptr, ec] = std::from_chars(b, e, seed);
    if (env_seed->empty() || ec != std::errc() || ptr != e)
      throw ConfigError("AID_SEED must be a non-negative integer, got '" + *env_seed + "'");
    doc["train"]["seed"] = seed;
  }
  ResolvedConfig r;
  r.config = experiment_from_json(doc);
  r.config.validate();
  // Canonical form: re-serialise so defaults and types are normalised.
  r.json = to_json(r.config);
  return r;
}

}  // namespace aid
