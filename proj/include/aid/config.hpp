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

#include "aid/data.hpp"
#include "aid/training.hpp"

namespace aid {

// Everything a command can be configured with. Sections of the JSON file:
// data, detector, assign, aid, distill, train, eval.
struct ExperimentConfig {
  // Scale buckets default to 0.4x the COCO thresholds, i.e. proportional
  // for 64-pixel images against a 160-pixel reference.
  ExperimentConfig() { train.eval.scale_factor = 0.4; }

  SyntheticSpec data;
  TrainConfig train;  // carries detector, assign, distill (+aid) and eval
  double teacher_width_multiplier = 2.0;

  // Detector spec used when training in teacher mode.
  DetectorSpec teacher_spec() const;
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Layers defaults <- file <- --set overrides <- AID_SEED. Unknown keys and
// badly typed values raise ConfigError; the result is fully validated.
struct ResolvedConfig {
  ExperimentConfig config;
  nlohmann::json json;
};

ResolvedConfig resolve_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides,
                              const std::optional<std::string>& env_seed);

// Applies one "section.key=value" override in place. The value is parsed as
// JSON and taken as a plain string when that fails.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace aid
