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

#include "aid/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "aid/errors.hpp"

namespace aid {

using nlohmann::json;

void EvalConfig::validate() const {
  if (!(iou_threshold > 0) || iou_threshold > 1) throw ValidationError("eval.iou_threshold must lie in (0, 1]");
  if (decode.score_threshold < 0 || decode.score_threshold > 1)
    throw ValidationError("eval.score_threshold must lie in [0, 1]");
  if (decode.nms_iou < 0 || decode.nms_iou > 1) throw ValidationError("eval.nms_iou must lie in [0, 1]");
  if (decode.max_detections < 1) throw ValidationError("eval.max_detections must be >= 1");
  if (!(scale_factor > 0) || !std::isfinite(scale_factor)) throw ValidationError("eval.scale_factor must be > 0");
}

void to_json(json& j, const EvalConfig& c) {
  j = json{{"iou_threshold", c.iou_threshold},
           {"score_threshold", c.decode.score_threshold},
           {"nms_iou", c.decode.nms_iou},
           {"max_detections", c.decode.max_detections},
           {"scale_factor", c.scale_factor}};
}

void from_json(const json& j, EvalConfig& c) {
  c.iou_threshold = j.at("iou_threshold").get<double>();
  c.decode.score_threshold = j.at("score_threshold").get<double>();
  c.decode.nms_iou = j.at("nms_iou").get<double>();
  c.decode.max_detections = j.at("max_detections").get<int>();
  c.scale_factor = j.at("scale_factor").get<double>();
}

ScaleBucket scale_bucket(double area, const EvalConfig& cfg) {
  if (area < cfg.small_area()) return ScaleBucket::kSmall;
  if (area < cfg.medium_area()) return ScaleBucket::kMedium;
  return ScaleBucket::kLarge;
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const Instance> gts, double iou_threshold) {
  MatchResult r;
  r.true_positive.assign(dets.size(), false);
  r.gt_index.assign(dets.size(), -1);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != dets[d].class_id) continue;
      const double iou = box_iou(dets[d].box, gts[g].box);
      if (iou >= best_iou && (best < 0 || iou > best_iou)) {
        best = static_cast<int>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      r.true_positive[d] = true;
      r.gt_index[d] = best;
    }
  }
  return r;
}

std::optional<double> average_precision(std::span<const ScoredLabel> labels, int num_gt) {
  if (num_gt < 0) throw ValidationError("average_precision: num_gt must be >= 0");
  if (num_gt == 0) return std::nullopt;
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a].score > labels[b].score; });

  std::vector<double> recall, precision;
  int tp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (labels[order[i]].true_positive) ++tp;
    const bool group_end = i + 1 == order.size() || labels[order[i + 1]].score != labels[order[i]].score;
    if (!group_end) continue;
    recall.push_back(static_cast<double>(tp) / num_gt);
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0, prev = 0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev) * precision[i];
    prev = recall[i];
  }
  return std::clamp(ap, 0.0, 1.0);
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  double s = 0;
  int n = 0;
  for (const auto& x : v)
    if (x) {
      s += *x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / n;
}

}  // namespace

json to_json(const EvalResult& r) {
  json per_class = json::object();
  for (std::size_t c = 0; c < r.class_names.size(); ++c) per_class[r.class_names[c]] = optional_json(r.per_class[c]);
  return json{{"class_names", r.class_names},
              {"per_class", per_class},           {"map50", optional_json(r.map50)},
              {"ap_small", optional_json(r.ap_small)}, {"ap_medium", optional_json(r.ap_medium)},
              {"ap_large", optional_json(r.ap_large)}, {"num_gt", r.num_gt},
              {"num_det", r.num_det}};
}

EvalResult eval_result_from_json(const json& j) {
  try {
    EvalResult r;
    // per_class is keyed by name; class_names keeps the model's order.
    const json& per_class = j.at("per_class");
    if (j.contains("class_names"))
      r.class_names = j.at("class_names").get<std::vector<std::string>>();
    else
      for (const auto& [name, ap] : per_class.items()) r.class_names.push_back(name);
    for (const auto& name : r.class_names) r.per_class.push_back(optional_from(per_class.at(name)));
    r.map50 = optional_from(j.at("map50"));
    r.ap_small = optional_from(j.at("ap_small"));
    r.ap_medium = optional_from(j.at("ap_medium"));
    r.ap_large = optional_from(j.at("ap_large"));
    r.num_gt = j.at("num_gt").get<int>();
    r.num_det = j.at("num_det").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("EvalResult: ") + e.what());
  }
}

EvalResult evaluate_detections(std::span<const std::vector<Detection>> dets,
                               std::span<const std::vector<Instance>> gts,
                               const std::vector<std::string>& class_names, const EvalConfig& cfg) {
  if (dets.size() != gts.size()) throw ShapeError("evaluate_detections: detection and ground-truth image counts differ");
  if (gts.empty()) throw EmptyDataset("evaluate: dataset has no images");
  const int num_classes = static_cast<int>(class_names.size());
  if (num_classes < 1) throw ValidationError("evaluate: no classes");

  // [class][bucket + 1], bucket -1 = all
  std::vector<std::array<std::vector<ScoredLabel>, 4>> labels(num_classes);
  std::vector<std::array<int, 4>> gt_count(num_classes, {0, 0, 0, 0});
  EvalResult r;
  r.class_names = class_names;

  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (const Instance& g : gts[i]) {
      if (g.class_id < 0 || g.class_id >= num_classes)
        throw ClassCountMismatch("evaluate: ground-truth class " + std::to_string(g.class_id) + " outside [0, " +
                                 std::to_string(num_classes) + ")");
      gt_count[g.class_id][0] += 1;
      gt_count[g.class_id][1 + static_cast<int>(scale_bucket(box_area(g.box), cfg))] += 1;
    }
    std::vector<Detection> sorted(dets[i].begin(), dets[i].end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    for (const Detection& d : sorted)
      if (d.class_id < 0 || d.class_id >= num_classes)
        throw ClassCountMismatch("evaluate: detection class " + std::to_string(d.class_id) + " outside [0, " +
                                 std::to_string(num_classes) + ")");
    const MatchResult m = match_detections(sorted, gts[i], cfg.iou_threshold);
    for (std::size_t d = 0; d < sorted.size(); ++d) {
      const ScoredLabel sl{sorted[d].score, static_cast<bool>(m.true_positive[d])};
      auto& cls = labels[sorted[d].class_id];
      cls[0].push_back(sl);
      // A match counts in its ground truth's bucket; an unmatched detection
      // in the bucket of its own area.
      const double area = m.gt_index[d] >= 0 ? box_area(gts[i][m.gt_index[d]].box) : box_area(sorted[d].box);
      cls[1 + static_cast<int>(scale_bucket(area, cfg))].push_back(sl);
    }
    r.num_det += static_cast<int>(sorted.size());
    r.num_gt += static_cast<int>(gts[i].size());
  }

  std::array<std::vector<std::optional<double>>, 4> aps;
  for (int c = 0; c < num_classes; ++c)
    for (int b = 0; b < 4; ++b) aps[b].push_back(average_precision(labels[c][b], gt_count[c][b]));
  r.per_class = aps[0];
  r.map50 = mean_of(aps[0]);
  r.ap_small = mean_of(aps[1]);
  r.ap_medium = mean_of(aps[2]);
  r.ap_large = mean_of(aps[3]);
  return r;
}

template <typename T>
std::vector<Detection> detect(const Detector<T>& model, const Image& image, const DecodeParams& params) {
  const auto out = model.forward(image_to_tensor<T>(image, model.spec().max_stride()));
  return decode(out.heads, model.spec(), params, image.height, image.width);
}

template <typename T>
EvalResult evaluate(const Detector<T>& model, std::span<const ImageSample> samples,
                    const std::vector<std::string>& class_names, const EvalConfig& cfg) {
  if (samples.empty()) throw EmptyDataset("evaluate: dataset has no images");
  if (model.spec().num_classes != static_cast<int>(class_names.size()))
    throw ClassCountMismatch("evaluate: model has " + std::to_string(model.spec().num_classes) +
                             " classes, dataset has " + std::to_string(class_names.size()));
  std::vector<std::vector<Detection>> dets;
  std::vector<std::vector<Instance>> gts;
  dets.reserve(samples.size());
  gts.reserve(samples.size());
  for (const ImageSample& s : samples) {
    if (s.pixels.empty()) throw ValidationError("evaluate: image '" + s.image_id + "' has no pixels loaded");
    dets.push_back(detect(model, s.pixels, cfg.decode));
    gts.push_back(s.instances);
  }
  return evaluate_detections(dets, gts, class_names, cfg);
}

ModelStats conv_stats(int in_channels, int out_channels, int kernel, int out_height, int out_width) {
  ModelStats s;
  s.parameter_count = static_cast<std::uint64_t>(in_channels) * out_channels * kernel * kernel + out_channels;
  s.flops_per_forward =
      2ULL * static_cast<std::uint64_t>(in_channels) * out_channels * kernel * kernel * out_height * out_width;
  s.input_height = out_height;
  s.input_width = out_width;
  return s;
}

template <typename T>
ModelStats model_stats(const Detector<T>& model, int input_height, int input_width) {
  if (model.parameter_count() == 0) throw EmptyModel("model_stats: model has no parameters");
  if (input_height < 1 || input_width < 1) throw ValidationError("model_stats: input resolution must be positive");
  ModelStats s;
  s.parameter_count = model.parameter_count();
  s.flops_per_forward = 2 * model.forward_macs(input_height, input_width);
  s.input_height = input_height;
  s.input_width = input_width;
  return s;
}

json to_json(const ModelStats& s) {
  return json{{"parameter_count", s.parameter_count},
              {"flops_per_forward", s.flops_per_forward},
              {"gflops", s.gflops()},
              {"input_height", s.input_height},
              {"input_width", s.input_width}};
}

template std::vector<Detection> detect<float>(const Detector<float>&, const Image&, const DecodeParams&);
template std::vector<Detection> detect<double>(const Detector<double>&, const Image&, const DecodeParams&);
template EvalResult evaluate<float>(const Detector<float>&, std::span<const ImageSample>,
                                    const std::vector<std::string>&, const EvalConfig&);
template EvalResult evaluate<double>(const Detector<double>&, std::span<const ImageSample>,
                                     const std::vector<std::string>&, const EvalConfig&);
template ModelStats model_stats<float>(const Detector<float>&, int, int);
template ModelStats model_stats<double>(const Detector<double>&, int, int);

}  // namespace aid
