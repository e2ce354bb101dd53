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

#include "aid/image_io.hpp"

namespace aid {

using Color = std::array<std::uint8_t, 3>;

// Minimal RGB drawing surface for report plots and detection renders.
class Canvas {
 public:
  Canvas(int width, int height, Color background = {255, 255, 255});
  explicit Canvas(Rgb8Image image) : img_(std::move(image)) {}

  int width() const { return img_.width; }
  int height() const { return img_.height; }
  const Rgb8Image& image() const { return img_; }

  void set(int x, int y, Color c);
  void fill_rect(int x0, int y0, int x1, int y1, Color c);  // inclusive corners
  void rect(int x0, int y0, int x1, int y1, Color c, int thickness = 1);
  void line(int x0, int y0, int x1, int y1, Color c);

  // 5x7 bitmap glyphs; lowercase renders as uppercase. Returns the advance.
  int text(int x, int y, const std::string& s, Color c, int scale = 1);
  static int text_width(const std::string& s, int scale = 1) { return static_cast<int>(s.size()) * 6 * scale; }

  // Copies `src` with its top-left corner at (x, y), nearest-neighbour
  // upscaled by `scale`.
  void blit(const Rgb8Image& src, int x, int y, int scale = 1);

 private:
  Rgb8Image img_;
};

// A fixed, distinguishable colour per series index.
Color palette(int index);

}  // namespace aid
