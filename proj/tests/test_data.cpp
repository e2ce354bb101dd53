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

#include <gtest/gtest.h>

#include <fstream>

#include "aid/data.hpp"
#include "aid/errors.hpp"
#include "aid/rng.hpp"
#include "test_util.hpp"

using namespace aid;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec s;
  s.seed = seed;
  s.num_images = 30;
  s.num_val = 10;
  s.image_size = 48;
  return s;
}

const char* kKittiCar = "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59";
const char* kKittiPed = "Pedestrian 0.00 0 -0.20 712.40 143.00 810.73 307.92 1.89 0.48 1.20 1.84 1.47 8.41 0.01";
const char* kKittiVan = "Van 0.00 0 -1.57 599.41 156.40 629.75 189.25 2.85 2.63 12.34 0.47 1.49 69.44 -1.56";

}  // namespace

TEST(Synthetic, DeterministicAndSeedSensitive) {
  const auto a = generate_synthetic(small_spec());
  const auto b = generate_synthetic(small_spec());
  const auto c = generate_synthetic(small_spec(2));
  ASSERT_EQ(a.size(), 30u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.samples[i].pixels.data, b.samples[i].pixels.data);
    EXPECT_EQ(a.samples[i].instances, b.samples[i].instances);
    differs |= a.samples[i].pixels.data != c.samples[i].pixels.data;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.class_names, (std::vector<std::string>{"circle", "square", "triangle"}));
}

TEST(Synthetic, ImagesAreIndependentOfDatasetSize) {
  auto spec = small_spec();
  const auto big = generate_synthetic(spec);
  spec.num_images = 5;
  spec.num_val = 0;
  const auto small = generate_synthetic(spec);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(small.samples[i].instances, big.samples[i].instances);
}

TEST(Synthetic, ObjectCountMatchesFirstDraw) {
  auto spec = small_spec(4);
  spec.occlusion_prob = 1.0;  // every placement succeeds
  const auto ds = generate_synthetic(spec);
  for (int i = 0; i < spec.num_images; ++i) {
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(i)));
    EXPECT_EQ(static_cast<int>(ds.samples[i].instances.size()), rng.uniform_int(spec.objects_min, spec.objects_max));
  }
  spec.occlusion_prob = 0.25;
  const auto ds2 = generate_synthetic(spec);
  for (int i = 0; i < spec.num_images; ++i) {
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(i)));
    EXPECT_LE(static_cast<int>(ds2.samples[i].instances.size()), rng.uniform_int(spec.objects_min, spec.objects_max));
  }
}

TEST(Synthetic, BoxesInsideImageAndSized) {
  auto spec = small_spec(9);
  spec.num_images = 200;
  spec.num_val = 0;
  spec.occlusion_prob = 0.0;
  const auto ds = generate_synthetic(spec);
  for (const auto& s : ds.samples) {
    EXPECT_EQ(s.width, 48);
    for (std::size_t k = 0; k < s.instances.size(); ++k) {
      const auto& b = s.instances[k].box;
      EXPECT_GE(b.x1, 0.0);
      EXPECT_LE(b.x2, 48.0);
      EXPECT_GE(b.width(), spec.size_min * 48 - 1e-9);
      EXPECT_LE(b.width(), spec.size_max * 48 + 1e-9);
      EXPECT_EQ(s.instances[k].instance_id, static_cast<int>(k));
      // Without occlusion no pair overlaps beyond the free-placement bound.
      for (std::size_t m = 0; m < k; ++m) EXPECT_LE(box_iou(b, s.instances[m].box), spec.max_free_iou + 1e-12);
    }
    for (float v : s.pixels.data) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Synthetic, SplitAndValidation) {
  const auto all = generate_synthetic(small_spec());
  const auto [train, val] = split_synthetic(all, 10);
  EXPECT_EQ(train.size(), 20u);
  EXPECT_EQ(val.size(), 10u);
  EXPECT_EQ(val.samples[0].image_id, all.samples[20].image_id);
  EXPECT_THROW(split_synthetic(all, 31), ValidationError);
  auto bad = small_spec();
  bad.size_min = 0.6;
  bad.size_max = 0.5;
  EXPECT_THROW(generate_synthetic(bad), ValidationError);
  bad = small_spec();
  bad.num_val = 40;
  EXPECT_THROW(bad.validate(), ValidationError);
  nlohmann::json j = small_spec(3);
  EXPECT_EQ(j.get<SyntheticSpec>(), small_spec(3));
}

TEST(Kitti, ParsesExamples) {
  const std::string text = std::string(kKittiCar) + "\n" + kKittiPed + "\n" + kKittiVan + "\n";
  const auto labels = parse_kitti_file(text);
  ASSERT_EQ(labels.size(), 3u);
  EXPECT_EQ(labels[0].type, "Car");
  EXPECT_DOUBLE_EQ(labels[0].box.x1, 587.01);
  EXPECT_DOUBLE_EQ(labels[0].box.y2, 200.12);
  EXPECT_DOUBLE_EQ(labels[1].geometry[5], 8.41);
  EXPECT_EQ(labels[2].occluded, 0);

  const auto inst = parse_kitti_labels(text);
  ASSERT_EQ(inst.size(), 2u);  // Van is not a default class
  EXPECT_EQ(inst[0].class_id, 0);
  EXPECT_EQ(inst[1].class_id, 1);
  EXPECT_DOUBLE_EQ(inst[1].box.x2, 810.73);
  EXPECT_EQ(parse_kitti_labels(text, {"Van"}).size(), 1u);
}

TEST(Kitti, ScoreColumnAndBlankLines) {
  const std::string text = std::string("\n") + kKittiCar + " 0.93\n\n";
  EXPECT_EQ(parse_kitti_file(text).size(), 1u);
}

TEST(Kitti, ErrorsCarryLineNumbers) {
  const std::string bad_field = std::string(kKittiCar) + "\n" + "Car 0 0 0 1 2 x 4 1 1 1 1 1 1 1\n";
  try {
    parse_kitti_labels(bad_field);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("right"), std::string::npos);
  }
  try {
    parse_kitti_file("\n\nCar 1 2 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  try {
    parse_kitti_labels("Car 0 0 0 10 10 5 20 1 1 1 1 1 1 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(Kitti, RoundTrip) {
  Rng rng(17);
  std::vector<Instance> inst;
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(0, 1000), y = rng.uniform(0, 300);
    inst.push_back({i, rng.uniform_int(0, 2), {x, y, x + rng.uniform(1, 200), y + rng.uniform(1, 100)}});
  }
  const auto text = serialize_kitti_labels(inst, kitti_default_classes());
  EXPECT_EQ(parse_kitti_labels(text), inst);
  EXPECT_THROW(serialize_kitti_labels({{0, 7, {0, 0, 1, 1}}}, kitti_default_classes()), ValidationError);
}

TEST(Coco, FiltersTrafficCategories) {
  const auto doc = nlohmann::json::parse(R"({
    "images": [{"id": 1, "file_name": "a.jpg", "width": 100, "height": 80},
               {"id": 2, "file_name": "b.jpg", "width": 50, "height": 50},
               {"id": 3, "file_name": "c.jpg", "width": 50, "height": 50}],
    "categories": [{"id": 1, "name": "person"}, {"id": 3, "name": "car"}, {"id": 18, "name": "dog"},
                   {"id": 13, "name": "stop sign"}],
    "annotations": [
      {"id": 1, "image_id": 1, "category_id": 3, "bbox": [10, 20, 30, 40], "iscrowd": 0},
      {"id": 2, "image_id": 1, "category_id": 18, "bbox": [0, 0, 5, 5], "iscrowd": 0},
      {"id": 3, "image_id": 1, "category_id": 1, "bbox": [90, 70, 20, 20], "iscrowd": 0},
      {"id": 4, "image_id": 2, "category_id": 1, "bbox": [1, 1, 5, 5], "iscrowd": 1},
      {"id": 5, "image_id": 3, "category_id": 13, "bbox": [5, 5, 0, 4], "iscrowd": 0}
    ]})");
  const auto ds = filter_coco_traffic(doc);
  EXPECT_EQ(ds.class_names.size(), 11u);
  ASSERT_EQ(ds.size(), 1u);
  const auto& s = ds.samples[0];
  EXPECT_EQ(s.image_id, "1");
  EXPECT_EQ(s.file_path, "a.jpg");
  ASSERT_EQ(s.instances.size(), 2u);
  EXPECT_EQ(s.instances[0].class_id, 8);  // car
  EXPECT_EQ(s.instances[0].box, (BoundingBox{10, 20, 40, 60}));
  EXPECT_EQ(s.instances[1].class_id, 0);  // person, clipped
  EXPECT_EQ(s.instances[1].box, (BoundingBox{90, 70, 100, 80}));

  auto broken = doc;
  broken.erase("categories");
  EXPECT_THROW(filter_coco_traffic(broken), SchemaError);
}

TEST(DatasetDirTest, WriteLoadRoundTrip) {
  const auto all = generate_synthetic(small_spec());
  const auto [train, val] = split_synthetic(all, 10);
  test::TempDir d("ds");
  write_dataset(d.str(), train, val);
  EXPECT_TRUE(fs::exists(d.path() / "labels.jsonl"));
  EXPECT_TRUE(fs::exists(d.path() / "split.json"));
  const auto loaded = load_dataset(d.str());
  ASSERT_EQ(loaded.train.size(), train.size());
  ASSERT_EQ(loaded.val.size(), val.size());
  EXPECT_EQ(loaded.train.class_names, train.class_names);
  for (std::size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(loaded.train.samples[i].image_id, train.samples[i].image_id);
    EXPECT_EQ(loaded.train.samples[i].instances, train.samples[i].instances);
    EXPECT_EQ(loaded.train.samples[i].pixels.data, train.samples[i].pixels.data);
  }
  const auto no_pixels = load_dataset(d.str(), false);
  EXPECT_TRUE(no_pixels.val.samples[0].pixels.empty());
  EXPECT_EQ(no_pixels.val.samples[0].instances, val.samples[0].instances);
}

TEST(DatasetDirTest, CorruptLabels) {
  const auto all = generate_synthetic(small_spec());
  const auto [train, val] = split_synthetic(all, 10);
  test::TempDir d("bad");
  write_dataset(d.str(), train, val);
  {
    std::ofstream out(d.path() / "labels.jsonl", std::ios::app);
    out << "{not json\n";
  }
  EXPECT_THROW(load_dataset(d.str()), ContractError);
  EXPECT_THROW(load_dataset((d.path() / "missing").string()), ContractError);
}

TEST(Flip, MirrorsBoxesAndPixels) {
  ImageSample s;
  s.width = 4;
  s.height = 2;
  s.pixels = Image(2, 4);
  s.pixels.at(0, 0, 1) = 1.0f;
  s.instances = {test::make_instance(0, 0, 0, 0, 1, 2)};
  const auto f = flip_horizontal(s);
  EXPECT_EQ(f.instances[0].box, (BoundingBox{3, 0, 4, 2}));
  EXPECT_EQ(f.pixels.at(0, 3, 1), 1.0f);
  EXPECT_EQ(f.pixels.at(0, 0, 1), 0.0f);
  const auto ff = flip_horizontal(f);
  EXPECT_EQ(ff.pixels.data, s.pixels.data);
  EXPECT_EQ(ff.instances, s.instances);
}
