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

#include "aid/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace aid {

namespace {

std::string describe(const BoundingBox& b) {
  std::ostringstream os;
  os << "(" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << ")";
  return os.str();
}

}  // namespace

bool BoundingBox::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) && x2 > x1 && y2 > y1;
}

void validate(const BoundingBox& b) {
  if (!b.valid()) throw ValidationError("degenerate or non-finite box " + describe(b));
}

double box_area(const BoundingBox& b) {
  validate(b);
  return (b.x2 - b.x1) * (b.y2 - b.y1);
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  validate(a);
  validate(b);
  if (a == b) return 1.0;
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = box_area(a) + box_area(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox clip_box(const BoundingBox& b, double width, double height) {
  if (!(width > 0) || !(height > 0)) throw ValidationError("clip_box: image size must be positive");
  BoundingBox c{std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height), std::clamp(b.x2, 0.0, width),
                std::clamp(b.y2, 0.0, height)};
  if (!(c.x2 > c.x1) || !(c.y2 > c.y1)) throw BoxOutsideImage("box " + describe(b) + " lies outside the image");
  return c;
}

void validate(const ImageSample& s, int num_classes) {
  if (s.width <= 0 || s.height <= 0) throw ValidationError("image '" + s.image_id + "' has non-positive size");
  if (!s.pixels.empty() && (s.pixels.width != s.width || s.pixels.height != s.height))
    throw ValidationError("image '" + s.image_id + "' pixel buffer does not match its declared size");
  std::unordered_set<int> ids;
  for (const Instance& inst : s.instances) {
    if (!ids.insert(inst.instance_id).second)
      throw ValidationError("image '" + s.image_id + "' repeats instance id " + std::to_string(inst.instance_id));
    if (inst.class_id < 0 || inst.class_id >= num_classes)
      throw ValidationError("image '" + s.image_id + "' has class id " + std::to_string(inst.class_id) +
                            " outside [0, " + std::to_string(num_classes) + ")");
    validate(inst.box);
    if (inst.box.x1 < 0 || inst.box.y1 < 0 || inst.box.x2 > s.width || inst.box.y2 > s.height)
      throw ValidationError("image '" + s.image_id + "' has a box outside the image: " + describe(inst.box));
  }
}

}  // namespace aid
