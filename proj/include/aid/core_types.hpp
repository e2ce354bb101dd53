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

#include <string>
#include <vector>

#include "aid/errors.hpp"

namespace aid {

// Axis-aligned box in continuous image coordinates, corner form.
struct BoundingBox {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const;

  bool operator==(const BoundingBox&) const = default;
};

// Throws ValidationError when the box is degenerate or non-finite.
void validate(const BoundingBox& b);

double box_area(const BoundingBox& b);
double box_iou(const BoundingBox& a, const BoundingBox& b);

// Clamps to [0,width]x[0,height]; throws BoxOutsideImage when nothing is left.
BoundingBox clip_box(const BoundingBox& b, double width, double height);

struct Instance {
  int instance_id = 0;
  int class_id = 0;
  BoundingBox box;

  bool operator==(const Instance&) const = default;
};

// Interleaved HxWx3 image, values in [0,1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, 0.0f) {}

  bool empty() const { return data.empty(); }
  float& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

struct ImageSample {
  std::string image_id;
  int width = 0;
  int height = 0;
  Image pixels;           // may be empty when pixels live on disk
  std::string file_path;  // set for samples ingested from external datasets
  std::vector<Instance> instances;
};

// Checks H,W > 0, unique instance ids, class ids in range and boxes inside
// the image.
void validate(const ImageSample& s, int num_classes);

struct Detection {
  int class_id = 0;
  BoundingBox box;
  double score = 0;
};

}  // namespace aid
