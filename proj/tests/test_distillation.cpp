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
#include <numbers>

#include "aid/distillation.hpp"
#include "aid/errors.hpp"
#include "aid/rng.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

using namespace aid;
using nn::Tensor;
using test::GradCheck;
using test::gradient_check;
using test::kink_signature;
using test::MicroCase;

namespace {

FPNFeatures<double> random_features(int c, std::vector<std::pair<int, int>> sizes, std::uint64_t seed) {
  FPNFeatures<double> f;
  for (std::size_t l = 0; l < sizes.size(); ++l)
    f.levels.push_back(test::random_tensor<double>(c, sizes[l].first, sizes[l].second, seed + l));
  return f;
}

std::vector<double> softmax_scaled(const std::vector<double>& e, double temperature) {
  double mx = -1e300, sum = 0;
  for (double v : e) mx = std::max(mx, v / temperature);
  std::vector<double> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) sum += out[i] = std::exp(e[i] / temperature - mx);
  for (auto& v : out) v = v / sum * static_cast<double>(e.size());
  return out;
}

// Spatial and channel attention of one level by direct loops.
std::pair<std::vector<double>, std::vector<double>> oracle_attention(const Tensor<double>& f, double temperature) {
  const int c = f.channels(), h = f.height(), w = f.width();
  std::vector<double> se(h * w, 0.0), ce(c, 0.0);
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        se[y * w + x] += std::abs(f(k, y, x)) / c;
        ce[k] += std::abs(f(k, y, x)) / (h * w);
      }
  return {softmax_scaled(se, temperature), softmax_scaled(ce, temperature)};
}

HeadOutputs<double> random_heads(int classes, std::vector<std::pair<int, int>> sizes, std::uint64_t seed) {
  HeadOutputs<double> h;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    auto [hh, ww] = sizes[l];
    h.levels.push_back({test::random_tensor<double>(classes, hh, ww, seed + 3 * l, 2.0),
                        test::random_tensor<double>(4, hh, ww, seed + 3 * l + 1),
                        test::random_tensor<double>(1, hh, ww, seed + 3 * l + 2)});
  }
  return h;
}

WeightMap random_weights(const std::vector<std::pair<int, int>>& sizes, std::uint64_t seed) {
  Rng rng(seed);
  WeightMap m;
  for (auto [h, w] : sizes) {
    WeightMap::Level l{h, w, std::vector<double>(h * w)};
    for (auto& v : l.values) v = rng.uniform(0.05, 1.0);
    m.levels.push_back(std::move(l));
  }
  return m;
}

}  // namespace

TEST(FeatureL2, Examples) {
  FPNFeatures<double> s, t;
  s.levels.push_back(Tensor<double>(1, 1, 1, 2.0));
  t.levels.push_back(Tensor<double>(1, 1, 1, 5.0));
  EXPECT_EQ(feature_l2_map(s, t).levels[0](0, 0, 0), 9.0);
  const auto a = random_features(4, {{3, 3}, {2, 2}}, 1);
  for (const auto& l : feature_l2_map(a, a).levels)
    for (double v : l.values()) EXPECT_EQ(v, 0.0);
}

TEST(FeatureL2, MatchesTripleLoop) {
  const auto s = random_features(5, {{4, 3}, {2, 2}}, 1), t = random_features(5, {{4, 3}, {2, 2}}, 9);
  const auto m = feature_l2_map(s, t);
  for (std::size_t l = 0; l < 2; ++l)
    for (int y = 0; y < s.levels[l].height(); ++y)
      for (int x = 0; x < s.levels[l].width(); ++x) {
        double acc = 0;
        for (int c = 0; c < 5; ++c) acc += std::pow(s.levels[l](c, y, x) - t.levels[l](c, y, x), 2) / 5;
        EXPECT_NEAR(m.levels[l](0, y, x), acc, 1e-12);
      }
}

TEST(FeatureL2, LevelMismatchThrows) {
  const auto s = random_features(2, {{2, 2}, {1, 1}}, 1), t = random_features(2, {{2, 2}}, 1);
  EXPECT_THROW(feature_l2_map(s, t), ShapeError);
}

TEST(Attention, ConstantFeaturesAreUniform) {
  FPNFeatures<double> f;
  f.levels.push_back(Tensor<double>(3, 4, 5, -0.7));
  const auto a = attention_maps(f, 0.1);
  for (double v : a.spatial[0]) EXPECT_NEAR(v, 1.0, 1e-12);
  for (double v : a.channel[0]) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Attention, DominantLocationAtLowTemperature) {
  FPNFeatures<double> f;
  f.levels.push_back(Tensor<double>(2, 3, 3, 0.1));
  f.levels[0](0, 1, 2) = 3.0;
  f.levels[0](1, 1, 2) = 3.0;
  const auto a = attention_maps(f, 1e-3);
  EXPECT_NEAR(a.spatial[0][1 * 3 + 2], 9.0, 1e-9);
  EXPECT_NEAR(a.spatial[0][0], 0.0, 1e-9);
}

TEST(Attention, SumsAndOracle) {
  for (double temp : {0.1, 0.5, 2.0}) {
    const auto f = random_features(6, {{5, 4}, {3, 2}}, 3);
    const auto a = attention_maps(f, temp);
    for (std::size_t l = 0; l < 2; ++l) {
      double ss = 0, cs = 0;
      for (double v : a.spatial[l]) ss += v;
      for (double v : a.channel[l]) cs += v;
      EXPECT_NEAR(ss, f.levels[l].plane_size(), 1e-5);
      EXPECT_NEAR(cs, 6, 1e-5);
      const auto [sp, ch] = oracle_attention(f.levels[l], temp);
      for (std::size_t i = 0; i < sp.size(); ++i) EXPECT_NEAR(a.spatial[l][i], sp[i], 1e-9);
      for (std::size_t i = 0; i < ch.size(); ++i) EXPECT_NEAR(a.channel[l][i], ch[i], 1e-9);
    }
  }
}

TEST(AttentionGuided, IdenticalFeaturesGiveZero) {
  const auto f = random_features(4, {{3, 3}, {2, 2}}, 5);
  for (const auto& l : attention_guided_map(f, f, DistillConfig{}).levels)
    for (double v : l.values()) EXPECT_EQ(v, 0.0);
}

TEST(AttentionGuided, ReducesToFeatureL2) {
  // Teacher magnitude constant everywhere, so both attentions are uniform.
  auto t = random_features(4, {{3, 3}, {2, 2}}, 6);
  for (auto& l : t.levels)
    for (auto& v : l.values()) v = v < 0 ? -0.8 : 0.8;
  const auto s = random_features(4, {{3, 3}, {2, 2}}, 7);
  DistillConfig cfg;
  cfg.beta = 1;
  cfg.gamma = 0;
  cfg.eta = 0;
  const auto a = attention_guided_map(s, t, cfg), b = feature_l2_map(s, t);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < a.levels[l].size(); ++i)
      EXPECT_NEAR(a.levels[l].data()[i], b.levels[l].data()[i], 1e-9);
}

TEST(AttentionGuided, MatchesTermByTermOracle) {
  DistillConfig cfg;
  cfg.beta = 0.7;
  cfg.gamma = 0.3;
  cfg.eta = 0.2;
  cfg.temperature = 0.5;
  const auto s = random_features(3, {{3, 4}, {2, 2}}, 11), t = random_features(3, {{3, 4}, {2, 2}}, 12);
  const auto m = attention_guided_map(s, t, cfg);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto [ss, sc] = oracle_attention(s.levels[l], cfg.temperature);
    const auto [ts, tc] = oracle_attention(t.levels[l], cfg.temperature);
    double channel_gap = 0;
    for (int c = 0; c < 3; ++c) channel_gap += std::pow(sc[c] - tc[c], 2) / 3;
    const int w = s.levels[l].width();
    for (int p = 0; p < s.levels[l].plane_size(); ++p) {
      double masked = 0;
      for (int c = 0; c < 3; ++c)
        masked += tc[c] * std::pow(s.levels[l](c, p / w, p % w) - t.levels[l](c, p / w, p % w), 2) / 3;
      const double expect = cfg.beta * ts[p] * masked + cfg.gamma * std::pow(ss[p] - ts[p], 2) + cfg.eta * channel_gap;
      EXPECT_NEAR(m.levels[l].data()[p], expect, 1e-9);
      EXPECT_GE(m.levels[l].data()[p], 0.0);
    }
  }
}

TEST(HeadKl, Examples) {
  HeadOutputs<double> s = random_heads(2, {{1, 1}}, 1), t = s;
  EXPECT_NEAR(head_kl_map(s, t, 1.0).levels[0](0, 0, 0), 0.0, 1e-15);
  t.levels[0].cls_logits(0, 0, 0) = 60;
  t.levels[0].cls_logits(1, 0, 0) = -60;
  s.levels[0].cls_logits.fill(0.3);
  EXPECT_NEAR(head_kl_map(s, t, 1.0).levels[0](0, 0, 0), std::numbers::ln2, 1e-12);
}

TEST(HeadKl, MatchesScalarOracle) {
  for (double temp : {1.0, 2.0, 4.0}) {
    const auto s = random_heads(3, {{3, 2}, {2, 1}}, 4), t = random_heads(3, {{3, 2}, {2, 1}}, 40);
    const auto m = head_kl_map(s, t, temp);
    for (std::size_t l = 0; l < 2; ++l)
      for (int p = 0; p < s.levels[l].cls_logits.plane_size(); ++p) {
        double zs = 0, zt = 0;
        for (int c = 0; c < 3; ++c) {
          zs += std::exp(s.levels[l].cls_logits.plane(c)[p] / temp);
          zt += std::exp(t.levels[l].cls_logits.plane(c)[p] / temp);
        }
        double kl = 0;
        for (int c = 0; c < 3; ++c) {
          const double pt = std::exp(t.levels[l].cls_logits.plane(c)[p] / temp) / zt;
          const double ps = std::exp(s.levels[l].cls_logits.plane(c)[p] / temp) / zs;
          kl += pt * std::log(pt / ps);
        }
        EXPECT_NEAR(m.levels[l].data()[p], temp * temp * kl, 1e-7);
      }
  }
}

TEST(BaseLossBackward, MatchesFiniteDifferences) {
  DistillConfig cfg;
  cfg.beta = 0.5;
  cfg.gamma = 0.2;
  cfg.eta = 0.3;
  cfg.temperature = 0.7;
  const std::vector<std::pair<int, int>> sizes{{3, 3}, {2, 2}};
  auto s = random_features(3, sizes, 21);
  const auto t = random_features(3, sizes, 22);
  LossMap<double> up;
  for (auto [h, w] : sizes) up.levels.push_back(test::random_tensor<double>(1, h, w, 23));
  auto contract = [&](const LossMap<double>& m) {
    double acc = 0;
    for (std::size_t l = 0; l < m.levels.size(); ++l)
      for (std::size_t i = 0; i < m.levels[l].size(); ++i) acc += m.levels[l].data()[i] * up.levels[l].data()[i];
    return acc;
  };
  const auto g_l2 = feature_l2_backward(s, t, up);
  const auto g_ag = attention_guided_backward(s, t, cfg, up);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < s.levels[l].size(); ++i) {
      double& x = s.levels[l].data()[i];
      const double n1 = test::central_difference(x, 1e-6, std::function<double()>([&] { return contract(feature_l2_map(s, t)); }));
      const double n2 = test::central_difference(
          x, 1e-6, std::function<double()>([&] { return contract(attention_guided_map(s, t, cfg)); }));
      EXPECT_NEAR(g_l2.levels[l].data()[i], n1, 1e-7);
      EXPECT_NEAR(g_ag.levels[l].data()[i], n2, 1e-6);
    }

  auto hs = random_heads(3, sizes, 31);
  const auto ht = random_heads(3, sizes, 32);
  const auto gk = head_kl_backward(hs, ht, 2.0, up);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < hs.levels[l].cls_logits.size(); ++i) {
      double& x = hs.levels[l].cls_logits.data()[i];
      const double n = test::central_difference(x, 1e-6, std::function<double()>([&] { return contract(head_kl_map(hs, ht, 2.0)); }));
      EXPECT_NEAR(gk.levels[l].cls_logits.data()[i], n, 1e-7);
    }
}

TEST(AidDistillLoss, UniformHalfAndOracle) {
  const std::vector<std::pair<int, int>> sizes{{4, 4}, {2, 2}};
  const auto base = feature_l2_map(random_features(3, sizes, 1), random_features(3, sizes, 2));
  WeightMap ones, half;
  for (auto [h, w] : sizes) {
    ones.levels.push_back({h, w, std::vector<double>(h * w, 1.0)});
    half.levels.push_back({h, w, std::vector<double>(h * w, 0.5)});
  }
  double mean = 0;
  for (const auto& l : base.levels)
    for (double v : l.values()) mean += v;
  mean /= 20;
  EXPECT_NEAR(aid_distill_loss(base, ones), mean, 1e-14);
  EXPECT_EQ(aid_distill_loss(base, half), 0.5 * aid_distill_loss(base, ones));
  const auto w = random_weights(sizes, 3);
  double dot = 0;
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < w.levels[l].values.size(); ++i) dot += w.levels[l].values[i] * base.levels[l].data()[i];
  EXPECT_NEAR(aid_distill_loss(base, w), dot / 20, 1e-12);
  WeightMap bad = w;
  bad.levels.pop_back();
  EXPECT_THROW(aid_distill_loss(base, bad), ShapeError);
}

TEST(AidDistillLoss, MonotoneInTeacherDifficulty) {
  MicroCase mc;
  Detector<double> student(mc.spec, 1), teacher(mc.spec, 2);
  const auto s = student.forward(mc.input), t = teacher.forward(mc.input);
  const auto base = feature_l2_map(s.features, t.features);
  AidConfig cfg;
  InstanceLossTable table = teacher_instance_losses(t.heads, mc.targets, cfg);
  ASSERT_FALSE(table.instances.empty());
  double prev = aid_distill_loss(base, build_weight_map(table, mc.targets, cfg));
  for (int step = 0; step < 10; ++step) {
    table.instances[0].d_teacher += 0.5;
    table.instances[0].weight = aid_weight(table.instances[0].d_teacher, cfg.alpha);
    const double v = aid_distill_loss(base, build_weight_map(table, mc.targets, cfg));
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(StudentTotalLoss, Arithmetic) {
  TaskLossBreakdown t;
  t.total = 1.5;
  EXPECT_EQ(student_total_loss(t, 0.4, 2.0), 2.3);
  EXPECT_EQ(student_total_loss(t, 0.4, 0.0), 1.5);
  EXPECT_EQ(student_total_loss(t, 0.0, 1.0), 1.5);
  EXPECT_THROW(student_total_loss(t, std::nan(""), 1.0), NumericError);
}

TEST(DistillObjective, AlphaZeroEqualsUniform) {
  MicroCase mc;
  Detector<double> student(mc.spec, 1), teacher(mc.spec, 2);
  DistillConfig aid;
  aid.aid.alpha = 0;
  DistillConfig uniform = aid;
  uniform.aid.scale_weighting = false;
  const auto a = distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, aid, false);
  const auto b = distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, uniform, false);
  EXPECT_EQ(a.total, b.total);
  for (const auto& l : a.weights->levels)
    for (double v : l.values) EXPECT_EQ(v, 1.0);
}

// Student objective on a micro-model: teacher wider than student, so the adapter is in
// the gradient path too.
TEST(DistillObjective, GradientMatchesFiniteDifferences) {
  MicroCase mc;
  Detector<double> student(mc.spec, 3);
  const Detector<double> teacher(test::micro_spec(1.5), 4);
  ChannelAdapter<double> adapter(mc.spec.fpn_channels(), teacher.spec().fpn_channels(), 5);
  ASSERT_LE(student.parameter_count(), 2000u);
  for (BaseLoss base : {BaseLoss::kAttentionGuided, BaseLoss::kFeatureL2, BaseLoss::kHeadKl}) {
    DistillConfig cfg;
    cfg.base_loss = base;
    cfg.kl_temperature = 2.0;
    ChannelAdapter<double>* ad = base == BaseLoss::kHeadKl ? nullptr : &adapter;
    student.zero_grad();
    for (auto* p : adapter.params()) p->zero_grad();
    const auto obj = distill_objective<double>(student, ad, &teacher, mc.input, mc.targets, cfg, true);
    EXPECT_GT(obj.distill, 0.0);
    auto params = student.params();
    if (ad)
      for (auto* p : adapter.params()) params.push_back(p);
    auto f = [&] { return distill_objective<double>(student, ad, &teacher, mc.input, mc.targets, cfg, false).total; };
    const auto signs = [&] { return kink_signature(student, ad, mc.input, mc.targets); };
    const GradCheck r = gradient_check(params, f, signs);
    EXPECT_LT(r.worst, 1e-3) << to_string(base);
    EXPECT_GT(r.checked, 4 * r.skipped) << to_string(base);
  }
}

TEST(DistillObjective, GradScaleIsLinear) {
  MicroCase mc;
  Detector<double> student(mc.spec, 3), teacher(mc.spec, 4);
  student.zero_grad();
  distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, DistillConfig{}, true, 1.0);
  std::vector<double> g1;
  for (auto* p : student.params()) g1.insert(g1.end(), p->grad.begin(), p->grad.end());
  student.zero_grad();
  distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, DistillConfig{}, true, 0.25);
  std::size_t k = 0;
  for (auto* p : student.params())
    for (double g : p->grad) EXPECT_NEAR(g, 0.25 * g1[k++], 1e-12);
}

TEST(DistillObjective, TeacherReceivesNoGradient) {
  MicroCase mc;
  Detector<double> student(mc.spec, 3), teacher(mc.spec, 4);
  teacher.zero_grad();
  std::vector<std::vector<double>> before;
  for (auto* p : teacher.params()) before.push_back(p->value);
  distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, DistillConfig{}, true);
  std::size_t k = 0;
  for (auto* p : teacher.params()) {
    for (double g : p->grad) ASSERT_EQ(g, 0.0);
    EXPECT_EQ(p->value, before[k++]);
  }
}

TEST(DistillObjective, WeightMapIgnoresStudent) {
  MicroCase mc;
  Detector<double> student(mc.spec, 3), teacher(mc.spec, 4);
  const auto a = distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, DistillConfig{}, false);
  Rng rng(1);
  for (auto* p : student.params())
    for (double& v : p->value) v += rng.normal(0, 0.05);
  const auto b = distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, DistillConfig{}, false);
  EXPECT_TRUE(*a.weights == *b.weights);
  EXPECT_NE(a.total, b.total);
}

TEST(DistillObjective, ChannelMismatchWithoutAdapterThrows) {
  MicroCase mc;
  Detector<double> student(mc.spec, 3);
  const Detector<double> teacher(test::micro_spec(1.5), 4);
  EXPECT_THROW(distill_objective<double>(student, nullptr, &teacher, mc.input, mc.targets, DistillConfig{}, false),
               ArchitectureMismatch);
}

TEST(DistillObjective, NoTeacherIsTaskLoss) {
  MicroCase mc;
  Detector<double> student(mc.spec, 3);
  const auto r = distill_objective<double>(student, nullptr, nullptr, mc.input, mc.targets, DistillConfig{}, false);
  EXPECT_EQ(r.total, task_loss(student.forward(mc.input).heads, mc.targets).total);
  EXPECT_FALSE(r.weights.has_value());
}

TEST(SelfDistill, CopyGivesTaskLoss) {
  MicroCase mc;
  Detector<double> old_model(mc.spec, 8);
  Detector<double> fresh = old_model;
  const auto r = self_distill_objective<double>(fresh, old_model, mc.input, mc.targets, DistillConfig{}, false);
  EXPECT_EQ(r.distill, 0.0);
  EXPECT_EQ(r.total, r.task.total);
}

TEST(SelfDistill, ArchitectureMismatch) {
  MicroCase mc;
  Detector<double> a(mc.spec, 1);
  const Detector<double> b(test::micro_spec(1.5), 2);
  EXPECT_THROW(self_distill_objective<double>(a, b, mc.input, mc.targets, DistillConfig{}, false), ArchitectureMismatch);
  const auto oa = a.forward(mc.input), ob = b.forward(mc.input);
  const auto task = task_loss(oa.heads, mc.targets);
  EXPECT_THROW(self_distill_loss<double>(task, ob, oa, mc.targets, DistillConfig{}), ArchitectureMismatch);
}

TEST(SelfDistill, PipelineMatchesManualComposition) {
  MicroCase mc;
  const Detector<double> old_model(mc.spec, 8);
  Detector<double> fresh(mc.spec, 9);
  DistillConfig cfg;
  cfg.aid.lambda = 0.7;
  const auto o = old_model.forward(mc.input), n = fresh.forward(mc.input);
  const auto new_task = task_loss(n.heads, mc.targets);
  const auto table = teacher_instance_losses(o.heads, mc.targets, cfg.aid);
  const auto weights = build_weight_map(table, mc.targets, cfg.aid);
  const double distill = aid_distill_loss(attention_guided_map(n.features, o.features, cfg), weights);
  const double manual = new_task.total + cfg.aid.lambda * distill;
  EXPECT_NEAR(self_distill_loss<double>(new_task, o, n, mc.targets, cfg), manual, 1e-14);
  const auto r = self_distill_objective<double>(fresh, old_model, mc.input, mc.targets, cfg, false);
  EXPECT_NEAR(r.total, manual, 1e-14);

  DistillConfig zero = cfg, uniform = cfg;
  zero.aid.alpha = 0;
  uniform.aid.alpha = 0;
  uniform.aid.scale_weighting = false;
  EXPECT_EQ(self_distill_loss<double>(new_task, o, n, mc.targets, zero),
            self_distill_loss<double>(new_task, o, n, mc.targets, uniform));
}

// Self-distillation gradient: the old model is frozen, the new one is checked.
TEST(SelfDistill, GradientMatchesFiniteDifferences) {
  MicroCase mc;
  const Detector<double> old_model(mc.spec, 8);
  Detector<double> fresh(mc.spec, 9);
  DistillConfig cfg;
  cfg.beta = 0.5;
  cfg.gamma = 0.1;
  cfg.eta = 0.1;
  cfg.temperature = 0.5;
  fresh.zero_grad();
  self_distill_objective<double>(fresh, old_model, mc.input, mc.targets, cfg, true);
  auto f = [&] { return self_distill_objective<double>(fresh, old_model, mc.input, mc.targets, cfg, false).total; };
  const GradCheck r = gradient_check(fresh.params(), f, [&] { return kink_signature(fresh, nullptr, mc.input, mc.targets); });
  EXPECT_LT(r.worst, 1e-3);
  EXPECT_GT(r.checked, 4 * r.skipped);
}

TEST(DistillConfigTest, JsonRoundTripAndValidation) {
  DistillConfig c;
  c.base_loss = BaseLoss::kHeadKl;
  c.beta = 4e-3;
  c.temperature = 0.5;
  nlohmann::json j = c;
  EXPECT_EQ(j.get<DistillConfig>(), c);
  c.temperature = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(base_loss_from_string("nope"), ConfigError);
}
