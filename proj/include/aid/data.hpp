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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "aid/core_types.hpp"

namespace aid {

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int num_images = 100;
  int num_val = 0;  // the last num_val images form the val split
  int image_size = 64;
  int objects_min = 1;
  int objects_max = 4;
  double size_min = 0.15;  // object extent as a fraction of the image side
  double size_max = 0.5;
  double occlusion_prob = 0.25;
  double noise_std = 0.05;
  // Non-occluding placements keep IoU with every earlier box at or below this.
  double max_free_iou = 0.3;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

const std::vector<std::string>& synthetic_class_names();  // circle, square, triangle

struct DatasetHandle {
  std::vector<ImageSample> samples;
  std::vector<std::string> class_names;
  std::string split;  // "train", "val" or "all"

  std::size_t size() const { return samples.size(); }
  std::size_t num_instances() const;
};

// Pure function of the spec. Image i draws from its own stream seeded by
// Rng::mix(seed, i); its first draw is the object count.
DatasetHandle generate_synthetic(const SyntheticSpec& spec);

// Splits a generated set into train (first N - num_val) and val (rest).
std::pair<DatasetHandle, DatasetHandle> split_synthetic(const DatasetHandle& all, int num_val);

// KITTI object label line (15 fields, optional trailing score).
struct KittiLabel {
  std::string type;
  double truncated = 0;
  int occluded = 0;
  double alpha = 0;
  BoundingBox box;
  std::array<double, 7> geometry{};  // h, w, l, x, y, z, rotation_y (unused)
};

const std::vector<std::string>& kitti_default_classes();  // Car, Pedestrian, Cyclist

// Every non-empty line; throws ParseError with the 1-based line number.
std::vector<KittiLabel> parse_kitti_file(const std::string& text);

// Lines whose type is in `class_filter` become instances with class_id equal
// to the filter index; other types are skipped.
std::vector<Instance> parse_kitti_labels(const std::string& text,
                                         const std::vector<std::string>& class_filter = kitti_default_classes());

// Inverse of parse_kitti_labels on the class and bbox fields; other fields
// are written as KITTI's "unknown" placeholders.
std::string serialize_kitti_labels(const std::vector<Instance>& instances, const std::vector<std::string>& class_names);

const std::vector<std::string>& coco_traffic_categories();

// Keeps annotations of the named categories (class id = index in `names`),
// converts [x, y, w, h] to corners, skips iscrowd and degenerate boxes, drops
// images left empty. Throws SchemaError on missing keys.
DatasetHandle filter_coco_traffic(const nlohmann::json& doc,
                                  const std::vector<std::string>& names = coco_traffic_categories());

// Dataset directory: images/{id}.png, labels.jsonl, split.json.
struct DatasetDir {
  DatasetHandle train;
  DatasetHandle val;
};

void write_dataset(const std::string& dir, const DatasetHandle& train, const DatasetHandle& val);
DatasetDir load_dataset(const std::string& dir, bool load_pixels = true);

nlohmann::json labels_record(const ImageSample& s);
ImageSample sample_from_record(const nlohmann::json& j, int line);

// Mirror image and boxes about the vertical axis.
ImageSample flip_horizontal(const ImageSample& s);

}  // namespace aid
