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

#include <cmath>
#include <map>

#include "aid/aid_weighting.hpp"
#include "aid/errors.hpp"
#include "aid/rng.hpp"
#include "test_util.hpp"

using namespace aid;

namespace {

struct Scene {
  DetectorSpec spec = test::micro_spec();
  std::vector<Instance> instances;
  TargetAssignment targets;
  HeadOutputs<double> outputs;
};

Scene random_scene(std::uint64_t seed, int n) {
  Scene s;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double w = rng.uniform(3, 14), h = rng.uniform(3, 14);
    const double x = rng.uniform(0, 16 - w), y = rng.uniform(0, 16 - h);
    s.instances.push_back(test::make_instance(100 + i, rng.uniform_int(0, 1), x, y, x + w, y + h));
  }
  s.targets = assign_targets(s.instances, s.spec, {}, 16, 16);
  Detector<double> model(s.spec, seed);
  s.outputs = model.forward(test::random_tensor<double>(3, 16, 16, seed + 1)).heads;
  return s;
}

}  // namespace

TEST(AidWeight, Examples) {
  EXPECT_EQ(aid_weight(0, 0.1), 1.0);
  EXPECT_NEAR(aid_weight(10, 0.1), 0.3678794412, 1e-10);
  EXPECT_NEAR(aid_weight(2.3, 0.1), 0.7945336025, 1e-10);
  EXPECT_EQ(aid_weight(123.0, 0.0), 1.0);
}

TEST(AidWeight, RejectsBadInputs) {
  EXPECT_THROW(aid_weight(-1, 0.1), ValidationError);
  EXPECT_THROW(aid_weight(1, -0.1), ValidationError);
  EXPECT_THROW(aid_weight(std::nan(""), 0.1), ValidationError);
  EXPECT_THROW(aid_weight(1, std::numeric_limits<double>::infinity()), ValidationError);
}

TEST(AidWeight, OrderAndMultiplicativity) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(0.001, 5), d1 = rng.uniform(0, 20), d2 = rng.uniform(0, 20);
    if (d1 < d2) EXPECT_GT(aid_weight(d1, a), aid_weight(d2, a));
    EXPECT_NEAR(aid_weight(d1 + d2, a), aid_weight(d1, a) * aid_weight(d2, a), 1e-12);
  }
}

TEST(ExtremeWeight, Report) {
  EXPECT_LT(aid_weight(1e6, 0.1), 1e-300);
  std::vector<double> grid;
  for (int d = 0; d <= 50; ++d) grid.push_back(d);
  grid.push_back(1e6);
  const auto r = extreme_weight_behavior_check(grid, 0.1);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.weights[0], 1.0);
  for (int d = 1; d <= 50; ++d) EXPECT_LT(r.weights[d], r.weights[d - 1]);
}

TEST(TeacherInstanceLosses, PerfectTeacherGivesUnitWeight) {
  Scene s = random_scene(1, 1);
  ASSERT_GT(s.targets.num_foreground(), 0);
  for (std::size_t l = 0; l < s.outputs.levels.size(); ++l) {
    const auto& la = s.targets.levels[l];
    auto& h = s.outputs.levels[l];
    for (int p = 0; p < la.size(); ++p) {
      const bool fg = la.instance_id[p] != kBackground;
      for (int c = 0; c < 2; ++c) h.cls_logits.plane(c)[p] = fg && la.cls_target[p] == c ? 800 : -800;
      h.objectness.plane(0)[p] = fg ? 800 : -800;
      for (int k = 0; k < 4; ++k) h.box_reg.plane(k)[p] = fg ? std::log(la.box_target[p][k]) : 0;
    }
  }
  const auto table = teacher_instance_losses(s.outputs, s.targets, AidConfig{});
  ASSERT_EQ(table.instances.size(), 1u);
  EXPECT_NEAR(table.instances[0].d_teacher, 0.0, 1e-12);
  EXPECT_NEAR(table.instances[0].weight, 1.0, 1e-12);
}

TEST(TeacherInstanceLosses, EmptyImage) {
  Scene s = random_scene(2, 0);
  const auto table = teacher_instance_losses(s.outputs, s.targets, AidConfig{});
  EXPECT_TRUE(table.instances.empty());
  for (const auto& l : table.levels) EXPECT_EQ(l.weight, 1.0);
}

// Location-by-location scalar recomputation of every loss term, using only
// the scalar loss primitives.
TEST(TeacherInstanceLosses, MatchesScalarOracle) {
  for (std::uint64_t seed = 10; seed < 40; ++seed) {
    Scene s = random_scene(seed, 2 + seed % 3);
    for (LossComponents comp : {LossComponents{}, LossComponents{true, false, false}, LossComponents{false, true, true}}) {
      AidConfig cfg;
      cfg.loss_components = comp;
      const auto table = teacher_instance_losses(s.outputs, s.targets, cfg);
      std::map<int, std::pair<double, int>> acc;
      for (std::size_t l = 0; l < s.targets.levels.size(); ++l) {
        const auto& la = s.targets.levels[l];
        const auto& h = s.outputs.levels[l];
        double lsum = 0;
        int lcount = 0;
        for (int p = 0; p < la.size(); ++p) {
          if (la.instance_id[p] == kBackground) continue;
          double v = 0;
          if (comp.cls)
            for (int c = 0; c < 2; ++c) v += focal_loss(h.cls_logits.plane(c)[p], la.cls_target[p] == c);
          if (comp.reg) {
            std::array<double, 4> d;
            for (int k = 0; k < 4; ++k) d[k] = std::exp(h.box_reg.plane(k)[p]);
            v += iou_loss_ltrb(d, la.box_target[p]);
          }
          if (comp.obj) v += bce_with_logits(h.objectness.plane(0)[p], 1.0);
          acc[la.instance_id[p]].first += v;
          acc[la.instance_id[p]].second += 1;
          lsum += v;
          ++lcount;
        }
        EXPECT_EQ(table.levels[l].num_foreground, lcount);
        EXPECT_NEAR(table.levels[l].d_level, lcount ? lsum / lcount : 0.0, 1e-12);
        EXPECT_EQ(table.levels[l].weight, std::exp(-cfg.alpha * table.levels[l].d_level));
      }
      ASSERT_EQ(table.instances.size(), acc.size());
      for (const auto& w : table.instances) {
        const auto& [sum, n] = acc.at(w.instance_id);
        EXPECT_EQ(w.num_locations, n);
        EXPECT_NEAR(w.d_teacher, sum / n, 1e-12);
        EXPECT_EQ(w.weight, std::exp(-cfg.alpha * w.d_teacher));
        EXPECT_GT(w.weight, 0.0);
        EXPECT_LE(w.weight, 1.0);
      }
    }
  }
}

TEST(WeightMapTest, AlphaZeroIsAllOnes) {
  Scene s = random_scene(3, 3);
  AidConfig cfg;
  cfg.alpha = 0;
  const auto map = build_weight_map(teacher_instance_losses(s.outputs, s.targets, cfg), s.targets, cfg);
  for (const auto& l : map.levels)
    for (double v : l.values) EXPECT_EQ(v, 1.0);
}

TEST(WeightMapTest, HandSetInstanceWeight) {
  Scene s = random_scene(4, 1);
  ASSERT_GT(s.targets.num_foreground(), 0);
  InstanceLossTable table;
  table.instances.push_back({s.instances[0].instance_id, 1, 0.0, 0.5});
  table.levels.assign(2, LevelWeight{});
  AidConfig cfg;
  cfg.scale_weighting = false;
  const auto map = build_weight_map(table, s.targets, cfg);
  for (std::size_t l = 0; l < map.levels.size(); ++l)
    for (int p = 0; p < s.targets.levels[l].size(); ++p)
      EXPECT_EQ(map.levels[l].values[p], s.targets.levels[l].instance_id[p] == kBackground ? 1.0 : 0.5);
}

TEST(WeightMapTest, MatchesBruteForceRasterization) {
  for (std::uint64_t seed = 50; seed < 80; ++seed) {
    Scene s = random_scene(seed, 3);
    for (bool scale : {true, false}) {
      AidConfig cfg;
      cfg.scale_weighting = scale;
      cfg.w_bg = 0.7;
      const auto table = teacher_instance_losses(s.outputs, s.targets, cfg);
      const auto map = build_weight_map(table, s.targets, cfg);
      ASSERT_EQ(map.num_locations(), static_cast<std::size_t>(s.targets.num_locations()));
      for (std::size_t l = 0; l < map.levels.size(); ++l) {
        const auto& la = s.targets.levels[l];
        for (int p = 0; p < la.size(); ++p) {
          double w = 0.7;
          if (la.instance_id[p] != kBackground)
            for (const auto& iw : table.instances)
              if (iw.instance_id == la.instance_id[p]) w = iw.weight;
          if (scale) w *= table.levels[l].weight;
          EXPECT_EQ(map.levels[l].values[p], w);
          EXPECT_GT(map.levels[l].values[p], 0.0);
          EXPECT_LE(map.levels[l].values[p], 1.0);
        }
      }
    }
  }
}

TEST(WeightMapTest, LevelMismatchThrows) {
  Scene s = random_scene(5, 2);
  InstanceLossTable table = teacher_instance_losses(s.outputs, s.targets, AidConfig{});
  table.levels.pop_back();
  EXPECT_THROW(build_weight_map(table, s.targets, AidConfig{}), ShapeError);
}

TEST(AidConfigTest, ValidationAndJson) {
  AidConfig c;
  c.w_bg = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.w_bg = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = AidConfig{};
  c.alpha = -1;
  EXPECT_THROW(c.validate(), ValidationError);
  AidConfig d;
  d.alpha = 0.3;
  d.loss_components.reg = false;
  nlohmann::json j = d;
  EXPECT_EQ(j.get<AidConfig>(), d);
}
