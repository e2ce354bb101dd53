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

#include "aid/aid_weighting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "aid/errors.hpp"

namespace aid {

using nlohmann::json;

void AidConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0) throw ValidationError("aid.alpha must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda < 0) throw ValidationError("aid.lambda must be finite and >= 0");
  if (!(w_bg > 0) || w_bg > 1) throw ValidationError("aid.w_bg must lie in (0, 1]");
  if (!loss_components.cls && !loss_components.reg && !loss_components.obj)
    throw ValidationError("aid.loss_components must select at least one component");
}

void to_json(json& j, const AidConfig& c) {
  std::vector<std::string> comps;
  if (c.loss_components.cls) comps.push_back("cls");
  if (c.loss_components.reg) comps.push_back("reg");
  if (c.loss_components.obj) comps.push_back("obj");
  j = json{{"alpha", c.alpha},
           {"lambda", c.lambda},
           {"w_bg", c.w_bg},
           {"scale_weighting", c.scale_weighting},
           {"loss_components", comps}};
}

void from_json(const json& j, AidConfig& c) {
  c.alpha = j.at("alpha").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.w_bg = j.at("w_bg").get<double>();
  c.scale_weighting = j.at("scale_weighting").get<bool>();
  c.loss_components = {false, false, false};
  for (const auto& name : j.at("loss_components").get<std::vector<std::string>>()) {
    if (name == "cls")
      c.loss_components.cls = true;
    else if (name == "reg")
      c.loss_components.reg = true;
    else if (name == "obj")
      c.loss_components.obj = true;
    else
      throw ConfigError("aid.loss_components: unknown component '" + name + "'");
  }
}

const InstanceWeight* InstanceLossTable::find(int instance_id) const {
  for (const auto& w : instances)
    if (w.instance_id == instance_id) return &w;
  return nullptr;
}

std::size_t WeightMap::num_locations() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.values.size();
  return n;
}

bool WeightMap::operator==(const WeightMap& o) const {
  if (levels.size() != o.levels.size()) return false;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].height != o.levels[l].height || levels[l].width != o.levels[l].width) return false;
    if (levels[l].values != o.levels[l].values) return false;
  }
  return true;
}

double aid_weight(double d, double alpha) {
  if (!std::isfinite(d) || d < 0) throw ValidationError("aid_weight: teacher loss must be finite and >= 0");
  if (!std::isfinite(alpha) || alpha < 0) throw ValidationError("aid_weight: alpha must be finite and >= 0");
  return std::exp(-alpha * d);
}

InstanceLossTable teacher_instance_losses(const TaskLossBreakdown& loss, const TargetAssignment& targets,
                                          const AidConfig& cfg) {
  if (loss.levels.size() != targets.levels.size())
    throw ShapeError("teacher_instance_losses: level count differs between loss and assignment");
  const LossComponents& use = cfg.loss_components;
  auto location_loss = [&](const LevelLoss& ll, int p) {
    double v = 0;
    if (use.cls) v += ll.cls[p];
    if (use.reg) v += ll.reg[p];
    if (use.obj) v += ll.obj[p];
    return v;
  };

  // Keyed by instance id, ordered as the instances appear in the assignment.
  std::map<int, std::pair<double, int>> sums;
  InstanceLossTable table;
  for (std::size_t l = 0; l < targets.levels.size(); ++l) {
    const LevelAssignment& la = targets.levels[l];
    const LevelLoss& ll = loss.levels[l];
    if (static_cast<int>(ll.cls.size()) != la.size())
      throw ShapeError("teacher_instance_losses: location count mismatch at level " + std::to_string(l));
    LevelWeight lw;
    double level_sum = 0;
    for (int p = 0; p < la.size(); ++p) {
      if (la.instance_id[p] == kBackground) continue;
      const double v = location_loss(ll, p);
      auto& s = sums[la.instance_id[p]];
      s.first += v;
      s.second += 1;
      level_sum += v;
      lw.num_foreground += 1;
    }
    lw.d_level = lw.num_foreground > 0 ? level_sum / lw.num_foreground : 0.0;
    lw.weight = aid_weight(lw.d_level, cfg.alpha);
    table.levels.push_back(lw);
  }
  for (const Instance& inst : targets.instances) {
    auto it = sums.find(inst.instance_id);
    if (it == sums.end()) continue;
    InstanceWeight w;
    w.instance_id = inst.instance_id;
    w.num_locations = it->second.second;
    w.d_teacher = it->second.first / it->second.second;
    w.weight = aid_weight(w.d_teacher, cfg.alpha);
    table.instances.push_back(w);
  }
  return table;
}

template <typename T>
InstanceLossTable teacher_instance_losses(const HeadOutputs<T>& teacher_outputs, const TargetAssignment& targets,
                                          const AidConfig& cfg) {
  return teacher_instance_losses(task_loss(teacher_outputs, targets), targets, cfg);
}

template InstanceLossTable teacher_instance_losses<float>(const HeadOutputs<float>&, const TargetAssignment&,
                                                          const AidConfig&);
template InstanceLossTable teacher_instance_losses<double>(const HeadOutputs<double>&, const TargetAssignment&,
                                                           const AidConfig&);

WeightMap build_weight_map(const InstanceLossTable& table, const TargetAssignment& targets, const AidConfig& cfg) {
  if (cfg.scale_weighting && table.levels.size() != targets.levels.size())
    throw ShapeError("build_weight_map: table and assignment disagree on level count");
  std::map<int, double> by_id;
  for (const auto& w : table.instances) by_id[w.instance_id] = w.weight;

  WeightMap map;
  for (std::size_t l = 0; l < targets.levels.size(); ++l) {
    const LevelAssignment& la = targets.levels[l];
    const double level_weight = cfg.scale_weighting ? table.levels[l].weight : 1.0;
    WeightMap::Level out{la.height, la.width, std::vector<double>(la.size())};
    for (int p = 0; p < la.size(); ++p) {
      double w = cfg.w_bg;
      if (la.instance_id[p] != kBackground) {
        auto it = by_id.find(la.instance_id[p]);
        if (it == by_id.end())
          throw ShapeError("build_weight_map: instance " + std::to_string(la.instance_id[p]) + " missing from table");
        w = it->second;
      }
      out.values[p] = w * level_weight;
    }
    map.levels.push_back(std::move(out));
  }
  return map;
}

ExtremeWeightReport extreme_weight_behavior_check(std::span<const double> d_values, double alpha) {
  ExtremeWeightReport r;
  r.alpha = alpha;
  r.d_values.assign(d_values.begin(), d_values.end());
  for (double d : d_values) r.weights.push_back(aid_weight(d, alpha));

  std::vector<std::size_t> order(d_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d_values[a] < d_values[b]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (d_values[order[i]] == 0 && r.weights[order[i]] != 1.0) r.zero_loss_gives_one = false;
    if (i > 0 && alpha > 0) {
      const std::size_t a = order[i - 1], b = order[i];
      // Once both weights have underflowed there is nothing left to order.
      if (d_values[b] > d_values[a] && !(r.weights[b] < r.weights[a]) && r.weights[a] != 0.0)
        r.strictly_decreasing = false;
    }
  }
  if (!order.empty() && alpha > 0) {
    const std::size_t top = order.back();
    if (alpha * d_values[top] >= 1e4 && !(r.weights[top] < 1e-300)) r.large_loss_vanishes = false;
  }
  return r;
}

json to_json(const InstanceLossTable& table) {
  json inst = json::array();
  for (const auto& w : table.instances)
    inst.push_back({{"instance_id", w.instance_id},
                    {"num_locations", w.num_locations},
                    {"d_teacher", w.d_teacher},
                    {"weight", w.weight}});
  json levels = json::array();
  for (const auto& l : table.levels)
    levels.push_back({{"num_foreground", l.num_foreground}, {"d_level", l.d_level}, {"weight", l.weight}});
  return json{{"instances", inst}, {"levels", levels}};
}

json to_json(const WeightMap& map) {
  json levels = json::array();
  for (const auto& l : map.levels) levels.push_back({{"height", l.height}, {"width", l.width}, {"values", l.values}});
  return json{{"levels", levels}};
}

}  // namespace aid
