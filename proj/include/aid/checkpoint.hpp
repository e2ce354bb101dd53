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
#include <string>

#include "json.hpp"

#include "aid/detector.hpp"
#include "aid/distillation.hpp"

namespace aid {

struct CheckpointMeta {
  DetectorSpec spec;
  nlohmann::json config = nlohmann::json::object();  // resolved config that produced the model
  std::uint64_t seed = 0;
  int epoch = 0;
};

struct Checkpoint {
  CheckpointMeta meta;
  Detector<float> model;
  std::optional<ChannelAdapter<float>> adapter;
};

// Binary container: magic, JSON header (meta + array table), then raw
// little-endian float32 arrays. A sidecar `<path>.json` manifest repeats the
// meta block.
void save_checkpoint(const std::string& path, const Detector<float>& model, const CheckpointMeta& meta,
                     const ChannelAdapter<float>* adapter = nullptr);

// Throws CheckpointError when the file is missing, truncated or inconsistent.
Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over parameter names, shapes and value bytes.
std::string parameter_hash(const Detector<float>& model);

}  // namespace aid
