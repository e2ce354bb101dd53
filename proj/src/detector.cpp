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

#include "aid/detector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "aid/errors.hpp"

namespace aid {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec

int DetectorSpec::fpn_channels() const {
  return std::max(1, static_cast<int>(std::lround(channel_base * width_multiplier)));
}

int DetectorSpec::stem_channels() const {
  return std::max(1, static_cast<int>(std::lround(channel_base * width_multiplier / 8.0)));
}

int DetectorSpec::backbone_stages() const { return std::countr_zero(static_cast<unsigned>(max_stride())); }

int DetectorSpec::stage_channels(int stage) const { return std::min(stem_channels() << stage, fpn_channels()); }

void DetectorSpec::validate() const {
  if (!(width_multiplier > 0) || !std::isfinite(width_multiplier))
    throw ValidationError("detector.width_multiplier must be positive");
  if (num_classes < 1) throw ValidationError("detector.num_classes must be >= 1");
  if (channel_base < 1) throw ValidationError("detector.channel_base must be >= 1");
  if (fpn_strides.empty()) throw ValidationError("detector.fpn_strides must not be empty");
  for (std::size_t i = 0; i < fpn_strides.size(); ++i) {
    const int s = fpn_strides[i];
    if (s < 2 || !std::has_single_bit(static_cast<unsigned>(s)))
      throw ValidationError("detector.fpn_strides entries must be powers of two >= 2");
    if (i > 0 && s <= fpn_strides[i - 1]) throw ValidationError("detector.fpn_strides must be strictly increasing");
  }
}

void to_json(json& j, const DetectorSpec& s) {
  j = json{{"width_multiplier", s.width_multiplier},
           {"num_classes", s.num_classes},
           {"fpn_strides", s.fpn_strides},
           {"channel_base", s.channel_base}};
}

void from_json(const json& j, DetectorSpec& s) {
  s.width_multiplier = j.at("width_multiplier").get<double>();
  s.num_classes = j.at("num_classes").get<int>();
  s.fpn_strides = j.at("fpn_strides").get<std::vector<int>>();
  s.channel_base = j.at("channel_base").get<int>();
}

void to_json(json& j, const AssignConfig& c) {
  j = json{{"size_lo_factor", c.size_lo_factor},
           {"size_hi_factor", c.size_hi_factor},
           {"center_fraction", c.center_fraction},
           {"center_fallback", c.center_fallback}};
}

void from_json(const json& j, AssignConfig& c) {
  c.size_lo_factor = j.at("size_lo_factor").get<double>();
  c.size_hi_factor = j.at("size_hi_factor").get<double>();
  c.center_fraction = j.at("center_fraction").get<double>();
  c.center_fallback = j.at("center_fallback").get<bool>();
}

template <typename T>
HeadOutputs<T> HeadOutputs<T>::zeros_like() const {
  HeadOutputs<T> out;
  out.levels.reserve(levels.size());
  for (const auto& l : levels) {
    out.levels.push_back({nn::Tensor<T>(l.cls_logits.channels(), l.cls_logits.height(), l.cls_logits.width()),
                          nn::Tensor<T>(4, l.box_reg.height(), l.box_reg.width()),
                          nn::Tensor<T>(1, l.objectness.height(), l.objectness.width())});
  }
  return out;
}

template <typename T>
double decode_distance(T raw) {
  return std::exp(std::clamp(static_cast<double>(raw), -kMaxLogDistance, kMaxLogDistance));
}

// ---------------------------------------------------------------------------
// Assignment

int TargetAssignment::num_foreground() const {
  int n = 0;
  for (const auto& l : levels)
    for (int id : l.instance_id) n += id != kBackground;
  return n;
}

int TargetAssignment::num_locations() const {
  int n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

int level_extent(int image_extent, int stride) { return (image_extent + stride - 1) / stride; }

TargetAssignment assign_targets(std::span<const Instance> instances, const DetectorSpec& spec,
                                const AssignConfig& cfg, int image_height, int image_width) {
  spec.validate();
  if (image_height <= 0 || image_width <= 0) throw ValidationError("assign_targets: image size must be positive");
  const int num_levels = spec.num_levels();
  const int n = static_cast<int>(instances.size());

  std::vector<int> level_of(n, -1);
  std::vector<double> area(n);
  for (int i = 0; i < n; ++i) {
    const BoundingBox& b = instances[i].box;
    validate(b);
    area[i] = box_area(b);
    const double longest = std::max(b.width(), b.height());
    for (int l = 0; l < num_levels; ++l) {
      const double s = spec.fpn_strides[l];
      const double lo = l == 0 ? -std::numeric_limits<double>::infinity() : cfg.size_lo_factor * s;
      const double hi = l == num_levels - 1 ? std::numeric_limits<double>::infinity() : cfg.size_hi_factor * s;
      if (longest >= lo && longest < hi) {
        level_of[i] = l;
        break;
      }
    }
  }
  // Smaller area wins; equal areas go to the lower index.
  auto prefer = [&](int cand, int current) {
    return current < 0 || area[cand] < area[current] || (area[cand] == area[current] && cand < current);
  };

  TargetAssignment out;
  out.instances.assign(instances.begin(), instances.end());
  std::vector<std::vector<int>> owner(num_levels);
  const double half = 0.5 * cfg.center_fraction;
  std::vector<int> hits(n, 0);
  for (int l = 0; l < num_levels; ++l) {
    LevelAssignment la;
    la.stride = spec.fpn_strides[l];
    la.height = level_extent(image_height, la.stride);
    la.width = level_extent(image_width, la.stride);
    owner[l].assign(la.size(), -1);
    for (int y = 0; y < la.height; ++y) {
      for (int x = 0; x < la.width; ++x) {
        const double cx = la.center_x(x);
        const double cy = la.center_y(y);
        int& own = owner[l][y * la.width + x];
        for (int i = 0; i < n; ++i) {
          if (level_of[i] != l) continue;
          const BoundingBox& b = instances[i].box;
          if (std::abs(cx - b.center_x()) <= half * b.width() && std::abs(cy - b.center_y()) <= half * b.height() &&
              cx > b.x1 && cx < b.x2 && cy > b.y1 && cy < b.y2 && prefer(i, own))
            own = i;
        }
      }
    }
    for (int o : owner[l])
      if (o >= 0) ++hits[o];
    out.levels.push_back(std::move(la));
  }

  if (cfg.center_fallback) {
    for (int i = 0; i < n; ++i) {
      if (hits[i] > 0 || level_of[i] < 0) continue;
      const int l = level_of[i];
      const LevelAssignment& la = out.levels[l];
      const BoundingBox& b = instances[i].box;
      const int x = std::clamp(static_cast<int>(std::floor(b.center_x() / la.stride)), 0, la.width - 1);
      const int y = std::clamp(static_cast<int>(std::floor(b.center_y() / la.stride)), 0, la.height - 1);
      const double cx = la.center_x(x);
      const double cy = la.center_y(y);
      if (!(cx > b.x1 && cx < b.x2 && cy > b.y1 && cy < b.y2)) continue;
      int& own = owner[l][y * la.width + x];
      if (prefer(i, own)) own = i;
    }
  }

  for (int l = 0; l < num_levels; ++l) {
    LevelAssignment& la = out.levels[l];
    const int size = la.size();
    la.instance_id.assign(size, kBackground);
    la.cls_target.assign(size, -1);
    la.box_target.assign(size, {0, 0, 0, 0});
    la.objectness.assign(size, 0);
    for (int p = 0; p < size; ++p) {
      const int i = owner[l][p];
      if (i < 0) continue;
      const Instance& inst = instances[i];
      const double cx = la.center_x(p % la.width);
      const double cy = la.center_y(p / la.width);
      const double s = la.stride;
      la.instance_id[p] = inst.instance_id;
      la.cls_target[p] = inst.class_id;
      la.box_target[p] = {(cx - inst.box.x1) / s, (cy - inst.box.y1) / s, (inst.box.x2 - cx) / s,
                          (inst.box.y2 - cy) / s};
      la.objectness[p] = 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Loss and d(loss)/d(pred) for 1 - IoU of anchor-sharing (l,t,r,b) boxes.
double iou_loss_with_grad(const std::array<double, 4>& d, const std::array<double, 4>& t, std::array<double, 4>* g) {
  const double ap = (d[0] + d[2]) * (d[1] + d[3]);
  const double at = (t[0] + t[2]) * (t[1] + t[3]);
  const double iw = std::min(d[0], t[0]) + std::min(d[2], t[2]);
  const double ih = std::min(d[1], t[1]) + std::min(d[3], t[3]);
  const double inter = iw * ih;
  const double uni = ap + at - inter;
  const double iou = inter / uni;
  if (g) {
    const double u2 = uni * uni;
    for (int k = 0; k < 4; ++k) {
      const bool horizontal = k == 0 || k == 2;
      const double dinter = d[k] < t[k] ? (horizontal ? ih : iw) : 0.0;
      const double dap = horizontal ? d[1] + d[3] : d[0] + d[2];
      (*g)[k] = -(dinter * (uni + inter) - inter * dap) / u2;
    }
  }
  return 1.0 - iou;
}

}  // namespace

double focal_loss(double logit, bool positive, const FocalParams& fp) {
  const double p = sigmoid(logit);
  if (positive) return fp.alpha * std::pow(1.0 - p, fp.gamma) * softplus(-logit);
  return (1.0 - fp.alpha) * std::pow(p, fp.gamma) * softplus(logit);
}

double focal_loss_grad(double logit, bool positive, const FocalParams& fp) {
  const double p = sigmoid(logit);
  const double q = sigmoid(-logit);
  if (positive) return fp.alpha * std::pow(q, fp.gamma) * (-fp.gamma * p * softplus(-logit) - q);
  return (1.0 - fp.alpha) * std::pow(p, fp.gamma) * (p + fp.gamma * q * softplus(logit));
}

double bce_with_logits(double logit, double target) { return softplus(logit) - target * logit; }

double iou_loss_ltrb(const std::array<double, 4>& pred, const std::array<double, 4>& target) {
  return iou_loss_with_grad(pred, target, nullptr);
}

template <typename T>
TaskLossBreakdown task_loss(const HeadOutputs<T>& outputs, const TargetAssignment& targets, HeadOutputs<T>* grad,
                            const FocalParams& focal) {
  if (outputs.levels.size() != targets.levels.size())
    throw ShapeError("task_loss: level count differs between outputs and targets");
  TaskLossBreakdown br;
  br.num_foreground = targets.num_foreground();
  br.normalizer = std::max(1, br.num_foreground);
  const double inv = 1.0 / br.normalizer;
  if (grad) *grad = outputs.zeros_like();

  for (std::size_t l = 0; l < outputs.levels.size(); ++l) {
    const LevelHead<T>& head = outputs.levels[l];
    const LevelAssignment& la = targets.levels[l];
    const int num_classes = head.cls_logits.channels();
    if (head.cls_logits.height() != la.height || head.cls_logits.width() != la.width ||
        head.box_reg.channels() != 4 || head.objectness.channels() != 1)
      throw ShapeError("task_loss: head output geometry does not match the assignment at level " + std::to_string(l));
    const int size = la.size();
    LevelLoss ll{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
    for (int p = 0; p < size; ++p) {
      const bool fg = la.instance_id[p] != kBackground;
      double cls = 0;
      for (int c = 0; c < num_classes; ++c) {
        const double z = head.cls_logits.plane(c)[p];
        const bool pos = fg && la.cls_target[p] == c;
        cls += focal_loss(z, pos, focal);
        if (grad) grad->levels[l].cls_logits.plane(c)[p] = static_cast<T>(focal_loss_grad(z, pos, focal) * inv);
      }
      ll.cls[p] = cls;

      const double zo = head.objectness.plane(0)[p];
      ll.obj[p] = bce_with_logits(zo, fg ? 1.0 : 0.0);
      if (grad) grad->levels[l].objectness.plane(0)[p] = static_cast<T>((sigmoid(zo) - (fg ? 1.0 : 0.0)) * inv);

      if (fg) {
        std::array<double, 4> d{};
        for (int k = 0; k < 4; ++k) d[k] = decode_distance(head.box_reg.plane(k)[p]);
        std::array<double, 4> g{};
        ll.reg[p] = iou_loss_with_grad(d, la.box_target[p], grad ? &g : nullptr);
        if (grad) {
          for (int k = 0; k < 4; ++k) {
            const double raw = head.box_reg.plane(k)[p];
            const double chain = std::abs(raw) < kMaxLogDistance ? d[k] : 0.0;
            grad->levels[l].box_reg.plane(k)[p] = static_cast<T>(g[k] * chain * inv);
          }
        }
      }
      br.cls_sum += ll.cls[p];
      br.reg_sum += ll.reg[p];
      br.obj_sum += ll.obj[p];
    }
    br.levels.push_back(std::move(ll));
  }
  if (!std::isfinite(br.cls_sum)) throw NumericError("task_loss: non-finite classification loss");
  if (!std::isfinite(br.reg_sum)) throw NumericError("task_loss: non-finite regression loss");
  if (!std::isfinite(br.obj_sum)) throw NumericError("task_loss: non-finite objectness loss");
  br.total = (br.cls_sum + br.reg_sum + br.obj_sum) * inv;
  return br;
}

// ---------------------------------------------------------------------------
// Decoding

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dets[a].score > dets[b].score; });
  std::vector<int> kept;
  for (int i : order) {
    bool keep = true;
    for (int k : kept) {
      if (dets[k].class_id == dets[i].class_id && box_iou(dets[k].box, dets[i].box) > iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(i);
  }
  std::vector<Detection> out;
  out.reserve(kept.size());
  for (int k : kept) out.push_back(dets[k]);
  return out;
}

template <typename T>
std::vector<Detection> decode(const HeadOutputs<T>& outputs, const DetectorSpec& spec, const DecodeParams& params,
                              int image_height, int image_width) {
  if (outputs.levels.size() != spec.fpn_strides.size()) throw ShapeError("decode: level count mismatch");
  std::vector<Detection> cands;
  for (std::size_t l = 0; l < outputs.levels.size(); ++l) {
    const LevelHead<T>& head = outputs.levels[l];
    const double s = spec.fpn_strides[l];
    const int w = head.cls_logits.width();
    const int size = head.cls_logits.plane_size();
    for (int p = 0; p < size; ++p) {
      const double obj = sigmoid(head.objectness.plane(0)[p]);
      const double cx = (p % w + 0.5) * s;
      const double cy = (p / w + 0.5) * s;
      bool have_box = false;
      BoundingBox box;
      for (int c = 0; c < head.cls_logits.channels(); ++c) {
        const double score = sigmoid(head.cls_logits.plane(c)[p]) * obj;
        if (!(score > params.score_threshold)) continue;
        if (!have_box) {
          const BoundingBox raw{cx - decode_distance(head.box_reg.plane(0)[p]) * s,
                                cy - decode_distance(head.box_reg.plane(1)[p]) * s,
                                cx + decode_distance(head.box_reg.plane(2)[p]) * s,
                                cy + decode_distance(head.box_reg.plane(3)[p]) * s};
          try {
            box = clip_box(raw, image_width, image_height);
          } catch (const BoxOutsideImage&) {
            break;
          }
          have_box = true;
        }
        cands.push_back({c, box, score});
      }
    }
  }
  std::vector<Detection> kept = nms(cands, params.nms_iou);
  if (static_cast<int>(kept.size()) > params.max_detections) kept.resize(std::max(0, params.max_detections));
  return kept;
}

template <typename T>
nn::Tensor<T> image_to_tensor(const Image& image, int multiple) {
  const int h = level_extent(image.height, multiple) * multiple;
  const int w = level_extent(image.width, multiple) * multiple;
  nn::Tensor<T> t(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) t(c, y, x) = static_cast<T>(image.at(y, x, c) - 0.5f);
  return t;
}

// ---------------------------------------------------------------------------
// Model

template <typename T>
Detector<T>::Detector(const DetectorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  int in = 3;
  for (int s = 0; s < spec_.backbone_stages(); ++s) {
    const int out = spec_.stage_channels(s);
    stages_.emplace_back("backbone.stage" + std::to_string(s), in, out, 3, 2);
    stages_.back().init_he(rng);
    in = out;
  }
  const int f = spec_.fpn_channels();
  for (int l = 0; l < spec_.num_levels(); ++l) {
    const int stage = std::countr_zero(static_cast<unsigned>(spec_.fpn_strides[l])) - 1;
    laterals_.emplace_back("fpn.lateral" + std::to_string(l), spec_.stage_channels(stage), f, 1, 1);
    laterals_.back().init_he(rng);
  }
  tower_ = nn::Conv2d<T>("head.tower", f, f, 3, 1);
  tower_.init_he(rng);
  pred_ = nn::Conv2d<T>("head.pred", f, spec_.num_classes + 5, 1, 1);
  pred_.init_normal(rng, 0.01, 0.0);
  const double prior = -std::log((1.0 - 0.01) / 0.01);
  for (int c = 0; c < spec_.num_classes; ++c) pred_.bias().value[c] = static_cast<T>(prior);
  pred_.bias().value[spec_.num_classes + 4] = static_cast<T>(prior);
}

template <typename T>
typename Detector<T>::Output Detector<T>::forward(const nn::Tensor<T>& input, Trace* trace) const {
  if (input.channels() != 3) throw ShapeError("detector input must have 3 channels");
  if (input.height() % spec_.max_stride() != 0 || input.width() % spec_.max_stride() != 0)
    throw ShapeError("detector input extent must be a multiple of the largest stride (pad first)");
  Trace local;
  Trace& tr = trace ? *trace : local;
  tr = Trace{};
  tr.input = input;
  tr.stage_pre.reserve(stages_.size());
  tr.stage_out.reserve(stages_.size());
  const nn::Tensor<T>* x = &tr.input;
  for (const auto& conv : stages_) {
    tr.stage_pre.push_back(conv.forward(*x));
    tr.stage_out.push_back(nn::silu(tr.stage_pre.back()));
    x = &tr.stage_out.back();
  }

  const int levels = spec_.num_levels();
  tr.fpn.assign(levels, {});
  for (int l = levels - 1; l >= 0; --l) {
    const int stage = std::countr_zero(static_cast<unsigned>(spec_.fpn_strides[l])) - 1;
    nn::Tensor<T> lat = laterals_[l].forward(tr.stage_out[stage]);
    if (l + 1 < levels) {
      const int factor = spec_.fpn_strides[l + 1] / spec_.fpn_strides[l];
      nn::add_inplace(lat, nn::upsample_nearest(tr.fpn[l + 1], factor, lat.height(), lat.width()));
    }
    tr.fpn[l] = std::move(lat);
  }

  Output out;
  const int c = spec_.num_classes;
  for (int l = 0; l < levels; ++l) {
    tr.tower_pre.push_back(tower_.forward(tr.fpn[l]));
    tr.tower_out.push_back(nn::silu(tr.tower_pre.back()));
    const nn::Tensor<T> pred = pred_.forward(tr.tower_out.back());
    const int h = pred.height(), w = pred.width(), plane = h * w;
    LevelHead<T> head{nn::Tensor<T>(c, h, w), nn::Tensor<T>(4, h, w), nn::Tensor<T>(1, h, w)};
    std::copy(pred.plane(0), pred.plane(c), head.cls_logits.data());
    std::copy(pred.plane(c), pred.plane(c + 4), head.box_reg.data());
    std::copy(pred.plane(c + 4), pred.plane(c + 4) + plane, head.objectness.data());
    out.heads.levels.push_back(std::move(head));
  }
  out.features.levels = tr.fpn;
  return out;
}

template <typename T>
void Detector<T>::backward(const Trace& tr, const HeadOutputs<T>& grad_heads, const FPNFeatures<T>* grad_features) {
  const int levels = spec_.num_levels();
  if (static_cast<int>(grad_heads.levels.size()) != levels) throw ShapeError("backward: head gradient level count");
  if (grad_features && static_cast<int>(grad_features->levels.size()) != levels)
    throw ShapeError("backward: feature gradient level count");
  const int c = spec_.num_classes;

  std::vector<nn::Tensor<T>> grad_fpn(levels);
  for (int l = 0; l < levels; ++l) {
    const auto& gh = grad_heads.levels[l];
    const int h = gh.cls_logits.height(), w = gh.cls_logits.width(), plane = h * w;
    nn::Tensor<T> gpred(c + 5, h, w);
    std::copy(gh.cls_logits.data(), gh.cls_logits.data() + static_cast<std::size_t>(c) * plane, gpred.plane(0));
    std::copy(gh.box_reg.data(), gh.box_reg.data() + 4 * static_cast<std::size_t>(plane), gpred.plane(c));
    std::copy(gh.objectness.data(), gh.objectness.data() + plane, gpred.plane(c + 4));
    nn::Tensor<T> gtower = pred_.backward(tr.tower_out[l], gpred, true);
    nn::silu_backward_inplace(tr.tower_pre[l], gtower);
    grad_fpn[l] = tower_.backward(tr.fpn[l], gtower, true);
    if (grad_features) {
      if (!grad_features->levels[l].same_shape(grad_fpn[l])) throw ShapeError("backward: feature gradient shape");
      nn::add_inplace(grad_fpn[l], grad_features->levels[l]);
    }
  }

  std::vector<nn::Tensor<T>> grad_stage(stages_.size());
  for (int l = 0; l < levels; ++l) {
    if (l + 1 < levels) {
      const int factor = spec_.fpn_strides[l + 1] / spec_.fpn_strides[l];
      nn::add_inplace(grad_fpn[l + 1], nn::upsample_nearest_backward(grad_fpn[l], factor, tr.fpn[l + 1].height(),
                                                                     tr.fpn[l + 1].width()));
    }
    const int stage = std::countr_zero(static_cast<unsigned>(spec_.fpn_strides[l])) - 1;
    nn::Tensor<T> g = laterals_[l].backward(tr.stage_out[stage], grad_fpn[l], true);
    if (grad_stage[stage].empty())
      grad_stage[stage] = std::move(g);
    else
      nn::add_inplace(grad_stage[stage], g);
  }

  for (int s = static_cast<int>(stages_.size()) - 1; s >= 0; --s) {
    nn::Tensor<T>& g = grad_stage[s];
    if (g.empty()) continue;
    nn::silu_backward_inplace(tr.stage_pre[s], g);
    const nn::Tensor<T>& in = s == 0 ? tr.input : tr.stage_out[s - 1];
    nn::Tensor<T> gin = stages_[s].backward(in, g, s > 0);
    if (s > 0) {
      if (grad_stage[s - 1].empty())
        grad_stage[s - 1] = std::move(gin);
      else
        nn::add_inplace(grad_stage[s - 1], gin);
    }
  }
}

template <typename T>
std::vector<nn::Param<T>*> Detector<T>::params() {
  std::vector<nn::Param<T>*> out;
  for (auto& c : stages_) out.push_back(&c.weight()), out.push_back(&c.bias());
  for (auto& c : laterals_) out.push_back(&c.weight()), out.push_back(&c.bias());
  out.push_back(&tower_.weight()), out.push_back(&tower_.bias());
  out.push_back(&pred_.weight()), out.push_back(&pred_.bias());
  return out;
}

template <typename T>
std::vector<const nn::Param<T>*> Detector<T>::params() const {
  std::vector<const nn::Param<T>*> out;
  for (auto* p : const_cast<Detector*>(this)->params()) out.push_back(p);
  return out;
}

template <typename T>
void Detector<T>::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

template <typename T>
std::size_t Detector<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : params()) n += p->size();
  return n;
}

template <typename T>
std::uint64_t Detector<T>::forward_macs(int image_height, int image_width) const {
  const int h = level_extent(image_height, spec_.max_stride()) * spec_.max_stride();
  const int w = level_extent(image_width, spec_.max_stride()) * spec_.max_stride();
  std::uint64_t macs = 0;
  int ch = h, cw = w;
  for (const auto& conv : stages_) {
    ch = conv.output_extent(ch);
    cw = conv.output_extent(cw);
    macs += conv.macs(ch, cw);
  }
  for (int l = 0; l < spec_.num_levels(); ++l) {
    const int lh = level_extent(h, spec_.fpn_strides[l]);
    const int lw = level_extent(w, spec_.fpn_strides[l]);
    macs += laterals_[l].macs(lh, lw) + tower_.macs(lh, lw) + pred_.macs(lh, lw);
  }
  return macs;
}

template <typename T>
void Detector<T>::zero_weights() {
  for (auto* p : params())
    if (p->shape.size() == 4) std::fill(p->value.begin(), p->value.end(), T(0));
}

template <typename T>
template <typename U>
Detector<U> Detector<T>::cast() const {
  Detector<U> out;
  out.spec_ = spec_;
  auto convert = [](const nn::Conv2d<T>& src) {
    const auto& wt = src.weight();
    nn::Conv2d<U> dst(wt.name.substr(0, wt.name.size() - 7), src.in_channels(), src.out_channels(), src.kernel(),
                      src.stride());
    for (std::size_t i = 0; i < wt.value.size(); ++i) dst.weight().value[i] = static_cast<U>(wt.value[i]);
    for (std::size_t i = 0; i < src.bias().value.size(); ++i)
      dst.bias().value[i] = static_cast<U>(src.bias().value[i]);
    return dst;
  };
  for (const auto& c : stages_) out.stages_.push_back(convert(c));
  for (const auto& c : laterals_) out.laterals_.push_back(convert(c));
  out.tower_ = convert(tower_);
  out.pred_ = convert(pred_);
  return out;
}

#define AID_INSTANTIATE_DETECTOR(T)                                                                          \
  template struct HeadOutputs<T>;                                                                            \
  template double decode_distance<T>(T);                                                                     \
  template TaskLossBreakdown task_loss<T>(const HeadOutputs<T>&, const TargetAssignment&, HeadOutputs<T>*,   \
                                          const FocalParams&);                                               \
  template std::vector<Detection> decode<T>(const HeadOutputs<T>&, const DetectorSpec&, const DecodeParams&, \
                                            int, int);                                                       \
  template nn::Tensor<T> image_to_tensor<T>(const Image&, int);                                              \
  template class Detector<T>;

AID_INSTANTIATE_DETECTOR(float)
AID_INSTANTIATE_DETECTOR(double)

template Detector<double> Detector<float>::cast<double>() const;
template Detector<float> Detector<double>::cast<float>() const;
template Detector<float> Detector<float>::cast<float>() const;
template Detector<double> Detector<double>::cast<double>() const;

#undef AID_INSTANTIATE_DETECTOR

}  // namespace aid
