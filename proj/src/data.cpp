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

#include "aid/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aid/errors.hpp"
#include "aid/image_io.hpp"
#include "aid/rng.hpp"

namespace aid {

namespace fs = std::filesystem;
using nlohmann::json;

void SyntheticSpec::validate() const {
  if (num_images < 1) throw ValidationError("data.num_images must be >= 1");
  if (num_val < 0 || num_val >= num_images) throw ValidationError("data.num_val must lie in [0, num_images)");
  if (image_size < 8) throw ValidationError("data.image_size must be >= 8");
  if (objects_min < 0 || objects_max < objects_min) throw ValidationError("data.objects_min/max form an empty range");
  if (!(size_min > 0) || size_max < size_min || size_max > 1)
    throw ValidationError("data.size_min/max must satisfy 0 < min <= max <= 1");
  if (occlusion_prob < 0 || occlusion_prob > 1) throw ValidationError("data.occlusion_prob must lie in [0, 1]");
  if (!(noise_std >= 0) || !std::isfinite(noise_std)) throw ValidationError("data.noise_std must be >= 0");
  if (max_free_iou < 0 || max_free_iou > 1) throw ValidationError("data.max_free_iou must lie in [0, 1]");
}

void to_json(json& j, const SyntheticSpec& s) {
  j = json{{"seed", s.seed},
           {"num_images", s.num_images},
           {"num_val", s.num_val},
           {"image_size", s.image_size},
           {"objects_min", s.objects_min},
           {"objects_max", s.objects_max},
           {"size_min", s.size_min},
           {"size_max", s.size_max},
           {"occlusion_prob", s.occlusion_prob},
           {"noise_std", s.noise_std},
           {"max_free_iou", s.max_free_iou}};
}

void from_json(const json& j, SyntheticSpec& s) {
  s.seed = j.at("seed").get<std::uint64_t>();
  s.num_images = j.at("num_images").get<int>();
  s.num_val = j.at("num_val").get<int>();
  s.image_size = j.at("image_size").get<int>();
  s.objects_min = j.at("objects_min").get<int>();
  s.objects_max = j.at("objects_max").get<int>();
  s.size_min = j.at("size_min").get<double>();
  s.size_max = j.at("size_max").get<double>();
  s.occlusion_prob = j.at("occlusion_prob").get<double>();
  s.noise_std = j.at("noise_std").get<double>();
  s.max_free_iou = j.at("max_free_iou").get<double>();
}

const std::vector<std::string>& synthetic_class_names() {
  static const std::vector<std::string> names{"circle", "square", "triangle"};
  return names;
}

std::size_t DatasetHandle::num_instances() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.instances.size();
  return n;
}

namespace {

constexpr int kPlacementAttempts = 200;
constexpr double kColorJitter = 0.15;
const std::array<std::array<double, 3>, 3> kBaseColors{{{0.85, 0.25, 0.2}, {0.2, 0.75, 0.3}, {0.25, 0.35, 0.85}}};

std::string image_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

bool inside_shape(int cls, const BoundingBox& b, double x, double y) {
  if (x < b.x1 || x > b.x2 || y < b.y1 || y > b.y2) return false;
  switch (cls) {
    case 0: {
      const double r = 0.5 * b.width();
      const double dx = x - b.center_x(), dy = y - b.center_y();
      return dx * dx + dy * dy <= r * r;
    }
    case 1:
      return true;
    default: {
      const double t = (y - b.y1) / b.height();
      return std::abs(x - b.center_x()) <= 0.5 * b.width() * t;
    }
  }
}

ImageSample generate_one(const SyntheticSpec& spec, int index) {
  Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(index)));
  const int n = rng.uniform_int(spec.objects_min, spec.objects_max);
  const int size = spec.image_size;
  const double side = static_cast<double>(size);

  ImageSample s;
  s.image_id = image_name(index);
  s.width = s.height = size;
  s.pixels = Image(size, size);
  std::array<double, 3> bg;
  for (double& c : bg) c = rng.uniform(0.3, 0.6);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < 3; ++c) s.pixels.at(y, x, c) = static_cast<float>(bg[c]);

  for (int k = 0; k < n; ++k) {
    const int cls = rng.uniform_int(0, 2);
    const bool occlude = rng.bernoulli(spec.occlusion_prob);
    BoundingBox box;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const double extent = rng.uniform(spec.size_min, spec.size_max) * side;
      const double x1 = rng.uniform(0.0, side - extent);
      const double y1 = rng.uniform(0.0, side - extent);
      box = {x1, y1, x1 + extent, y1 + extent};
      placed = true;
      if (!occlude)
        for (const Instance& other : s.instances)
          if (box_iou(box, other.box) > spec.max_free_iou) placed = false;
    }
    if (!placed) continue;
    std::array<double, 3> color;
    for (int c = 0; c < 3; ++c)
      color[c] = std::clamp(kBaseColors[cls][c] + rng.uniform(-kColorJitter, kColorJitter), 0.0, 1.0);
    const int x0 = static_cast<int>(std::floor(box.x1)), x1 = std::min(size - 1, static_cast<int>(box.x2));
    const int y0 = static_cast<int>(std::floor(box.y1)), y1 = std::min(size - 1, static_cast<int>(box.y2));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (inside_shape(cls, box, x + 0.5, y + 0.5))
          for (int c = 0; c < 3; ++c) s.pixels.at(y, x, c) = static_cast<float>(color[c]);
    s.instances.push_back({static_cast<int>(s.instances.size()), cls, box});
  }

  // Noise, then 8-bit quantisation so the PNG round trip is exact.
  for (float& v : s.pixels.data) {
    const double noisy = v + (spec.noise_std > 0 ? spec.noise_std * rng.normal() : 0.0);
    v = static_cast<float>(quantize_channel(static_cast<float>(noisy))) / 255.0f;
  }
  return s;
}

}  // namespace

DatasetHandle generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  DatasetHandle h;
  h.class_names = synthetic_class_names();
  h.split = "all";
  h.samples.reserve(spec.num_images);
  for (int i = 0; i < spec.num_images; ++i) h.samples.push_back(generate_one(spec, i));
  return h;
}

std::pair<DatasetHandle, DatasetHandle> split_synthetic(const DatasetHandle& all, int num_val) {
  if (num_val < 0 || num_val > static_cast<int>(all.size())) throw ValidationError("split: num_val out of range");
  DatasetHandle train, val;
  train.class_names = val.class_names = all.class_names;
  train.split = "train";
  val.split = "val";
  const std::size_t cut = all.size() - num_val;
  train.samples.assign(all.samples.begin(), all.samples.begin() + cut);
  val.samples.assign(all.samples.begin() + cut, all.samples.end());
  return {std::move(train), std::move(val)};
}

// KITTI

const std::vector<std::string>& kitti_default_classes() {
  static const std::vector<std::string> names{"Car", "Pedestrian", "Cyclist"};
  return names;
}

namespace {

template <typename V>
V parse_number(const std::string& tok, int line, const char* field) {
  V v{};
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(std::string("field '") + field + "': cannot parse '" + tok + "'", line);
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<KittiLabel> parse_kitti_file(const std::string& text) {
  static const char* kGeometry[] = {"height", "width", "length", "x", "y", "z", "rotation_y"};
  std::vector<KittiLabel> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 15 && tok.size() != 16)
      throw ParseError("expected 15 or 16 fields, found " + std::to_string(tok.size()), line_no);
    KittiLabel l;
    l.type = tok[0];
    l.truncated = parse_number<double>(tok[1], line_no, "truncated");
    l.occluded = parse_number<int>(tok[2], line_no, "occluded");
    l.alpha = parse_number<double>(tok[3], line_no, "alpha");
    l.box = {parse_number<double>(tok[4], line_no, "left"), parse_number<double>(tok[5], line_no, "top"),
             parse_number<double>(tok[6], line_no, "right"), parse_number<double>(tok[7], line_no, "bottom")};
    for (int g = 0; g < 7; ++g) l.geometry[g] = parse_number<double>(tok[8 + g], line_no, kGeometry[g]);
    if (tok.size() == 16) parse_number<double>(tok[15], line_no, "score");
    out.push_back(l);
  }
  return out;
}

std::vector<Instance> parse_kitti_labels(const std::string& text, const std::vector<std::string>& class_filter) {
  std::vector<Instance> out;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<KittiLabel> parsed;
    try {
      parsed = parse_kitti_file(line);
    } catch (const ParseError& e) {
      // Re-anchor the error on the file's line number.
      const std::string msg = e.what();
      throw ParseError(msg.substr(msg.find(": ") + 2), line_no);
    }
    if (parsed.empty()) continue;
    const KittiLabel& l = parsed.front();
    auto it = std::find(class_filter.begin(), class_filter.end(), l.type);
    if (it == class_filter.end()) continue;
    if (!l.box.valid()) throw ParseError("degenerate or non-finite bbox", line_no);
    out.push_back({static_cast<int>(out.size()), static_cast<int>(it - class_filter.begin()), l.box});
  }
  return out;
}

std::string serialize_kitti_labels(const std::vector<Instance>& instances, const std::vector<std::string>& class_names) {
  std::string out;
  for (const Instance& inst : instances) {
    if (inst.class_id < 0 || inst.class_id >= static_cast<int>(class_names.size()))
      throw ValidationError("serialize_kitti_labels: class id out of range");
    out += class_names[inst.class_id] + " -1 -1 -10 " + format_number(inst.box.x1) + " " +
           format_number(inst.box.y1) + " " + format_number(inst.box.x2) + " " + format_number(inst.box.y2) +
           " -1 -1 -1 -1000 -1000 -1000 -10\n";
  }
  return out;
}

// COCO

const std::vector<std::string>& coco_traffic_categories() {
  static const std::vector<std::string> names{"person",        "stop sign", "traffic light", "fire hydrant",
                                              "parking meter", "bus",       "motorcycle",    "bicycle",
                                              "car",           "train",     "truck"};
  return names;
}

DatasetHandle filter_coco_traffic(const json& doc, const std::vector<std::string>& names) {
  try {
    std::map<std::int64_t, int> category_to_class;
    for (const auto& c : doc.at("categories")) {
      const std::string name = c.at("name").get<std::string>();
      auto it = std::find(names.begin(), names.end(), name);
      if (it != names.end()) category_to_class[c.at("id").get<std::int64_t>()] = static_cast<int>(it - names.begin());
    }
    DatasetHandle h;
    h.class_names = names;
    h.split = "all";
    std::map<std::int64_t, std::size_t> image_index;
    for (const auto& im : doc.at("images")) {
      ImageSample s;
      const auto id = im.at("id").get<std::int64_t>();
      s.image_id = std::to_string(id);
      s.file_path = im.at("file_name").get<std::string>();
      s.width = im.at("width").get<int>();
      s.height = im.at("height").get<int>();
      if (s.width < 1 || s.height < 1) throw SchemaError("COCO image " + s.image_id + " has non-positive size");
      image_index[id] = h.samples.size();
      h.samples.push_back(std::move(s));
    }
    for (const auto& a : doc.at("annotations")) {
      const auto cat = a.at("category_id").get<std::int64_t>();
      const auto img = a.at("image_id").get<std::int64_t>();
      const auto bbox = a.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) throw SchemaError("COCO annotation bbox must have 4 numbers");
      if (a.value("iscrowd", 0) != 0) continue;
      auto cls = category_to_class.find(cat);
      if (cls == category_to_class.end()) continue;
      auto im = image_index.find(img);
      if (im == image_index.end()) throw SchemaError("COCO annotation references unknown image " + std::to_string(img));
      ImageSample& s = h.samples[im->second];
      const BoundingBox raw{bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3]};
      if (!raw.valid()) continue;
      BoundingBox box;
      try {
        box = clip_box(raw, s.width, s.height);
      } catch (const BoxOutsideImage&) {
        continue;
      }
      s.instances.push_back({static_cast<int>(s.instances.size()), cls->second, box});
    }
    std::erase_if(h.samples, [](const ImageSample& s) { return s.instances.empty(); });
    return h;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("COCO annotation document: ") + e.what());
  }
}

// Dataset directory

json labels_record(const ImageSample& s) {
  json inst = json::array();
  for (const Instance& i : s.instances)
    inst.push_back({{"instance_id", i.instance_id},
                    {"class_id", i.class_id},
                    {"box", {i.box.x1, i.box.y1, i.box.x2, i.box.y2}}});
  return json{{"image_id", s.image_id}, {"width", s.width}, {"height", s.height}, {"instances", inst}};
}

ImageSample sample_from_record(const json& j, int line) {
  try {
    ImageSample s;
    s.image_id = j.at("image_id").get<std::string>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    int next_id = 0;
    for (const auto& i : j.at("instances")) {
      const auto b = i.at("box").get<std::vector<double>>();
      if (b.size() != 4) throw ParseError("box must have 4 numbers", line);
      Instance inst;
      inst.instance_id = i.contains("instance_id") ? i.at("instance_id").get<int>() : next_id;
      inst.class_id = i.at("class_id").get<int>();
      inst.box = {b[0], b[1], b[2], b[3]};
      s.instances.push_back(inst);
      next_id = inst.instance_id + 1;
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("labels record: ") + e.what(), line);
  }
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ContractError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_dataset(const std::string& dir, const DatasetHandle& train, const DatasetHandle& val) {
  if (train.class_names != val.class_names && !val.samples.empty())
    throw ValidationError("write_dataset: class tables differ between splits");
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "images", ec);
  if (ec) throw ContractError("cannot create dataset directory '" + dir + "': " + ec.message());

  std::string labels;
  json split{{"class_names", train.class_names}, {"train", json::array()}, {"val", json::array()}};
  for (const DatasetHandle* h : {&train, &val}) {
    for (const ImageSample& s : h->samples) {
      if (s.pixels.empty()) throw ValidationError("write_dataset: sample '" + s.image_id + "' has no pixels");
      write_png((root / "images" / (s.image_id + ".png")).string(), s.pixels);
      labels += labels_record(s).dump() + "\n";
      split[h == &train ? "train" : "val"].push_back(s.image_id);
    }
  }
  write_text(root / "labels.jsonl", labels);
  write_text(root / "split.json", split.dump(2) + "\n");
}

DatasetDir load_dataset(const std::string& dir, bool load_pixels) {
  const fs::path root(dir);
  std::ifstream split_in(root / "split.json");
  if (!split_in) throw ContractError("dataset '" + dir + "' has no split.json");
  json split;
  try {
    split = json::parse(split_in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("split.json: ") + e.what(), 0);
  }

  std::ifstream labels_in(root / "labels.jsonl");
  if (!labels_in) throw ContractError("dataset '" + dir + "' has no labels.jsonl");
  std::map<std::string, ImageSample> by_id;
  std::string line;
  int line_no = 0;
  while (std::getline(labels_in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("labels.jsonl: ") + e.what(), line_no);
    }
    ImageSample s = sample_from_record(rec, line_no);
    const std::string id = s.image_id;
    if (!by_id.emplace(id, std::move(s)).second) throw ParseError("duplicate image_id '" + id + "'", line_no);
  }

  DatasetDir out;
  try {
    out.train.class_names = out.val.class_names = split.at("class_names").get<std::vector<std::string>>();
    out.train.split = "train";
    out.val.split = "val";
    for (auto [key, handle] : {std::pair{"train", &out.train}, std::pair{"val", &out.val}}) {
      for (const auto& idj : split.at(key)) {
        const std::string id = idj.get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) throw SchemaError("split.json lists unknown image '" + id + "'");
        ImageSample s = it->second;
        if (load_pixels) {
          const Rgb8Image raw = read_png((root / "images" / (id + ".png")).string());
          if (raw.width != s.width || raw.height != s.height)
            throw ValidationError("image '" + id + "' size differs from its label record");
          s.pixels = from_rgb8(raw);
        }
        validate(s, static_cast<int>(out.train.class_names.size()));
        handle->samples.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("split.json: ") + e.what());
  }
  return out;
}

ImageSample flip_horizontal(const ImageSample& s) {
  ImageSample out = s;
  const double w = s.width;
  for (Instance& i : out.instances) i.box = {w - i.box.x2, i.box.y1, w - i.box.x1, i.box.y2};
  if (!s.pixels.empty()) {
    const int pw = s.pixels.width;
    for (int y = 0; y < s.pixels.height; ++y)
      for (int x = 0; x < pw; ++x)
        for (int c = 0; c < 3; ++c) out.pixels.at(y, x, c) = s.pixels.at(y, pw - 1 - x, c);
  }
  return out;
}

}  // namespace aid
