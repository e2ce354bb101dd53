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
#include <string>
#include <vector>

#include "aid/core_types.hpp"

namespace aid {

// 8-bit RGB raster.
struct Rgb8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // interleaved RGB

  Rgb8Image() = default;
  Rgb8Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}
};

std::uint8_t quantize_channel(float v);
Rgb8Image to_rgb8(const Image& image);
Image from_rgb8(const Rgb8Image& image);

// Throws ContractError on I/O failure.
void write_png(const std::string& path, const Rgb8Image& image);
Rgb8Image read_png(const std::string& path);

inline void write_png(const std::string& path, const Image& image) { write_png(path, to_rgb8(image)); }
inline Image read_png_image(const std::string& path) { return from_rgb8(read_png(path)); }

}  // namespace aid
