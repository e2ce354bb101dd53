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
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"

#include "aid/core_types.hpp"
#include "aid/nn.hpp"

namespace aid {

// Architecture of the anchor-free FPN detector. Teacher and student differ
// only in width_multiplier.
struct DetectorSpec {
  double width_multiplier = 1.0;
  int num_classes = 3;
  std::vector<int> fpn_strides{8, 16, 32};
  // FPN width is round(channel_base * width_multiplier); the stem is 1/8 of
  // that and doubles per backbone stage up to the FPN width.
  int channel_base = 64;

  int fpn_channels() const;
  int stem_channels() const;
  int backbone_stages() const;
  int stage_channels(int stage) const;
  int max_stride() const { return fpn_strides.back(); }
  int num_levels() const { return static_cast<int>(fpn_strides.size()); }
  void validate() const;

  bool operator==(const DetectorSpec&) const = default;
};

void to_json(nlohmann::json& j, const DetectorSpec& s);
void from_json(const nlohmann::json& j, DetectorSpec& s);

// Level-bucket and center-sampling constants for target assignment.
struct AssignConfig {
  double size_lo_factor = 4.0;  // level l takes longest side in [lo*stride, hi*stride)
  double size_hi_factor = 8.0;
  double center_fraction = 0.5;
  // An instance that receives no location under center sampling gets the
  // location whose cell contains its center, if that cell center lies inside
  // the box.
  bool center_fallback = true;

  bool operator==(const AssignConfig&) const = default;
};

void to_json(nlohmann::json& j, const AssignConfig& c);
void from_json(const nlohmann::json& j, AssignConfig& c);

template <typename T>
struct FPNFeatures {
  std::vector<nn::Tensor<T>> levels;
};

template <typename T>
struct LevelHead {
  nn::Tensor<T> cls_logits;  // C x H x W
  nn::Tensor<T> box_reg;     // 4 x H x W, log-distances (l, t, r, b) in stride units
  nn::Tensor<T> objectness;  // 1 x H x W
};

template <typename T>
struct HeadOutputs {
  std::vector<LevelHead<T>> levels;

  // Zero-filled outputs with the same geometry.
  HeadOutputs zeros_like() const;
};

template <typename T>
struct DetectorOutput {
  FPNFeatures<T> features;
  HeadOutputs<T> heads;
};

// Raw box regression is clamped to this range before exponentiation.
inline constexpr double kMaxLogDistance = 12.0;

template <typename T>
double decode_distance(T raw);

inline constexpr int kBackground = std::numeric_limits<int>::min();

struct LevelAssignment {
  int stride = 0;
  int height = 0;
  int width = 0;
  std::vector<int> instance_id;  // kBackground for background locations
  std::vector<int> cls_target;   // -1 for background
  std::vector<std::array<double, 4>> box_target;  // (l, t, r, b) in stride units
  std::vector<std::uint8_t> objectness;

  int size() const { return height * width; }
  double center_x(int x) const { return (x + 0.5) * stride; }
  double center_y(int y) const { return (y + 0.5) * stride; }
};

struct TargetAssignment {
  std::vector<LevelAssignment> levels;
  std::vector<Instance> instances;

  int num_foreground() const;
  int num_locations() const;
};

// Feature-map extent of a level: ceil(image / stride).
int level_extent(int image_extent, int stride);

TargetAssignment assign_targets(std::span<const Instance> instances, const DetectorSpec& spec,
                                const AssignConfig& cfg, int image_height, int image_width);

struct FocalParams {
  double gamma = 2.0;
  double alpha = 0.25;
};

// Per-location task losses of one level (cls summed over classes).
struct LevelLoss {
  std::vector<double> cls;
  std::vector<double> reg;
  std::vector<double> obj;
};

struct TaskLossBreakdown {
  std::vector<LevelLoss> levels;
  double cls_sum = 0;
  double reg_sum = 0;
  double obj_sum = 0;
  int num_foreground = 0;
  double normalizer = 1;  // max(1, num_foreground)
  double total = 0;
};

// Scalar focal loss of one sigmoid logit against a binary target.
double focal_loss(double logit, bool positive, const FocalParams& p = {});
double focal_loss_grad(double logit, bool positive, const FocalParams& p = {});
double bce_with_logits(double logit, double target);

// 1 - IoU between two boxes that share an anchor point, given as (l,t,r,b).
double iou_loss_ltrb(const std::array<double, 4>& pred, const std::array<double, 4>& target);

// Per-image task loss. When grad is non-null it is filled with
// d(total)/d(head outputs). Throws NumericError naming the component on
// non-finite values.
template <typename T>
TaskLossBreakdown task_loss(const HeadOutputs<T>& outputs, const TargetAssignment& targets,
                            HeadOutputs<T>* grad = nullptr, const FocalParams& focal = {});

struct DecodeParams {
  double score_threshold = 0.05;
  double nms_iou = 0.5;
  int max_detections = 100;
};

template <typename T>
std::vector<Detection> decode(const HeadOutputs<T>& outputs, const DetectorSpec& spec, const DecodeParams& params,
                              int image_height, int image_width);

// Class-wise greedy NMS. Boxes with IoU above the threshold against a kept,
// higher-scored box of the same class are dropped; equal scores keep input
// order. Result is sorted by descending score.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

// Interleaved HxWx3 pixels to a 3xHxW input tensor, zero-padded to a
// multiple of `multiple`, centred at 0.5.
template <typename T>
nn::Tensor<T> image_to_tensor(const Image& image, int multiple);

template <typename T>
class Detector {
 public:
  struct Trace {
    nn::Tensor<T> input;
    std::vector<nn::Tensor<T>> stage_pre;   // backbone pre-activations
    std::vector<nn::Tensor<T>> stage_out;   // backbone activations
    std::vector<nn::Tensor<T>> fpn;         // FPN outputs per level
    std::vector<nn::Tensor<T>> tower_pre;   // head tower pre-activations per level
    std::vector<nn::Tensor<T>> tower_out;
  };

  using Output = DetectorOutput<T>;

  Detector() = default;
  Detector(const DetectorSpec& spec, std::uint64_t seed);

  const DetectorSpec& spec() const { return spec_; }

  // Deterministic; `trace` receives what backward needs.
  Output forward(const nn::Tensor<T>& input, Trace* trace = nullptr) const;

  // Accumulates parameter gradients given upstream gradients on the head
  // outputs and, optionally, on the FPN features.
  void backward(const Trace& trace, const HeadOutputs<T>& grad_heads, const FPNFeatures<T>* grad_features);

  std::vector<nn::Param<T>*> params();
  std::vector<const nn::Param<T>*> params() const;
  void zero_grad();
  std::size_t parameter_count() const;

  // Analytic multiply-accumulate count of one forward pass (convolutions).
  std::uint64_t forward_macs(int image_height, int image_width) const;

  // Sets every weight to zero; biases keep their values.
  void zero_weights();

  template <typename U>
  Detector<U> cast() const;

 private:
  template <typename U>
  friend class Detector;

  DetectorSpec spec_;
  std::vector<nn::Conv2d<T>> stages_;
  std::vector<nn::Conv2d<T>> laterals_;
  nn::Conv2d<T> tower_;
  nn::Conv2d<T> pred_;
};

}  // namespace aid
