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

#include "aid/distillation.hpp"

#include <algorithm>
#include <cmath>

#include "aid/errors.hpp"

namespace aid {

using nlohmann::json;

std::string to_string(BaseLoss b) {
  switch (b) {
    case BaseLoss::kFeatureL2:
      return "feature_l2";
    case BaseLoss::kAttentionGuided:
      return "attention_guided";
    case BaseLoss::kHeadKl:
      return "head_kl";
  }
  return "unknown";
}

BaseLoss base_loss_from_string(const std::string& s) {
  if (s == "feature_l2") return BaseLoss::kFeatureL2;
  if (s == "attention_guided") return BaseLoss::kAttentionGuided;
  if (s == "head_kl") return BaseLoss::kHeadKl;
  throw ConfigError("unknown base loss '" + s + "' (expected feature_l2, attention_guided or head_kl)");
}

void DistillConfig::validate() const {
  for (double v : {beta, gamma, eta})
    if (!std::isfinite(v) || v < 0) throw ValidationError("distill.beta/gamma/eta must be finite and >= 0");
  if (!(temperature > 0) || !std::isfinite(temperature)) throw ValidationError("distill.temperature must be > 0");
  if (!(kl_temperature > 0) || !std::isfinite(kl_temperature))
    throw ValidationError("distill.kl_temperature must be > 0");
  aid.validate();
}

void to_json(json& j, const DistillConfig& c) {
  j = json{{"base_loss", to_string(c.base_loss)},
           {"beta", c.beta},
           {"gamma", c.gamma},
           {"eta", c.eta},
           {"temperature", c.temperature},
           {"kl_temperature", c.kl_temperature},
           {"adapter_enabled", c.adapter_enabled}};
}

void from_json(const json& j, DistillConfig& c) {
  c.base_loss = base_loss_from_string(j.at("base_loss").get<std::string>());
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.eta = j.at("eta").get<double>();
  c.temperature = j.at("temperature").get<double>();
  c.kl_temperature = j.at("kl_temperature").get<double>();
  c.adapter_enabled = j.at("adapter_enabled").get<bool>();
}

template <typename T>
std::size_t LossMap<T>::num_locations() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

namespace {

template <typename T>
void check_pair(const FPNFeatures<T>& s, const FPNFeatures<T>& t) {
  if (s.levels.size() != t.levels.size()) throw ShapeError("student and teacher have different FPN level counts");
  for (std::size_t l = 0; l < s.levels.size(); ++l)
    if (!s.levels[l].same_shape(t.levels[l]))
      throw ShapeError("student and teacher features differ in shape at level " + std::to_string(l));
}

template <typename T>
void check_upstream(const LossMap<T>& up, const FPNFeatures<T>& s) {
  if (up.levels.size() != s.levels.size()) throw ShapeError("upstream map level count mismatch");
  for (std::size_t l = 0; l < s.levels.size(); ++l)
    if (up.levels[l].plane_size() != s.levels[l].plane_size()) throw ShapeError("upstream map shape mismatch");
}

// n * softmax(x / temperature)
std::vector<double> scaled_softmax(const std::vector<double>& x, double temperature) {
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double z = 0;
  for (std::size_t i = 0; i < x.size(); ++i) z += out[i] = std::exp((x[i] - mx) / temperature);
  const double scale = static_cast<double>(x.size()) / z;
  for (double& v : out) v *= scale;
  return out;
}

template <typename T>
std::vector<double> spatial_energy(const nn::Tensor<T>& f) {
  const int c = f.channels(), p = f.plane_size();
  std::vector<double> u(p, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    const T* src = f.plane(ch);
    for (int i = 0; i < p; ++i) u[i] += std::abs(static_cast<double>(src[i]));
  }
  for (double& v : u) v /= c;
  return u;
}

template <typename T>
std::vector<double> channel_energy(const nn::Tensor<T>& f) {
  const int c = f.channels(), p = f.plane_size();
  std::vector<double> v(c, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    const T* src = f.plane(ch);
    double s = 0;
    for (int i = 0; i < p; ++i) s += std::abs(static_cast<double>(src[i]));
    v[ch] = s / p;
  }
  return v;
}

// Gradient of n*softmax(x/T) pulled back from `g` (d/dA) onto x.
std::vector<double> scaled_softmax_backward(const std::vector<double>& attention, const std::vector<double>& g,
                                            double temperature) {
  const double n = static_cast<double>(attention.size());
  double dotp = 0;
  for (std::size_t i = 0; i < g.size(); ++i) dotp += g[i] * attention[i] / n;
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = attention[i] * (g[i] - dotp) / temperature;
  return out;
}

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

template <typename T>
std::vector<double> softmax_logits(const nn::Tensor<T>& logits, int p, double temperature) {
  const int c = logits.channels();
  std::vector<double> out(c);
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < c; ++k) mx = std::max(mx, static_cast<double>(logits.plane(k)[p]) / temperature);
  double z = 0;
  for (int k = 0; k < c; ++k) z += out[k] = std::exp(static_cast<double>(logits.plane(k)[p]) / temperature - mx);
  for (double& v : out) v /= z;
  return out;
}

}  // namespace

template <typename T>
ChannelAdapter<T>::ChannelAdapter(int student_channels, int teacher_channels, std::uint64_t seed)
    : conv_("adapter", student_channels, teacher_channels, 1, 1) {
  Rng rng(seed);
  conv_.init_he(rng);
}

template <typename T>
FPNFeatures<T> ChannelAdapter<T>::forward(const FPNFeatures<T>& student) const {
  FPNFeatures<T> out;
  for (const auto& l : student.levels) out.levels.push_back(conv_.forward(l));
  return out;
}

template <typename T>
FPNFeatures<T> ChannelAdapter<T>::backward(const FPNFeatures<T>& student, const FPNFeatures<T>& grad_out) {
  FPNFeatures<T> out;
  for (std::size_t l = 0; l < student.levels.size(); ++l)
    out.levels.push_back(conv_.backward(student.levels[l], grad_out.levels[l], true));
  return out;
}

template <typename T>
AttentionMaps<T> attention_maps(const FPNFeatures<T>& feats, double temperature) {
  if (!(temperature > 0)) throw ValidationError("attention_maps: temperature must be > 0");
  AttentionMaps<T> a;
  for (const auto& f : feats.levels) {
    a.spatial.push_back(scaled_softmax(spatial_energy(f), temperature));
    a.channel.push_back(scaled_softmax(channel_energy(f), temperature));
  }
  return a;
}

template <typename T>
LossMap<T> feature_l2_map(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher) {
  check_pair(student, teacher);
  LossMap<T> out;
  for (std::size_t l = 0; l < student.levels.size(); ++l) {
    const auto& s = student.levels[l];
    const auto& t = teacher.levels[l];
    const int c = s.channels(), p = s.plane_size();
    nn::Tensor<T> m(1, s.height(), s.width());
    std::vector<double> acc(p, 0.0);
    for (int ch = 0; ch < c; ++ch) {
      const T* sp = s.plane(ch);
      const T* tp = t.plane(ch);
      for (int i = 0; i < p; ++i) {
        const double d = static_cast<double>(sp[i]) - tp[i];
        acc[i] += d * d;
      }
    }
    for (int i = 0; i < p; ++i) m.data()[i] = static_cast<T>(acc[i] / c);
    out.levels.push_back(std::move(m));
  }
  return out;
}

template <typename T>
FPNFeatures<T> feature_l2_backward(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher,
                                   const LossMap<T>& upstream) {
  check_pair(student, teacher);
  check_upstream(upstream, student);
  FPNFeatures<T> out;
  for (std::size_t l = 0; l < student.levels.size(); ++l) {
    const auto& s = student.levels[l];
    const auto& t = teacher.levels[l];
    const int c = s.channels(), p = s.plane_size();
    nn::Tensor<T> g(c, s.height(), s.width());
    const T* up = upstream.levels[l].data();
    for (int ch = 0; ch < c; ++ch)
      for (int i = 0; i < p; ++i)
        g.plane(ch)[i] = static_cast<T>(2.0 / c * up[i] * (static_cast<double>(s.plane(ch)[i]) - t.plane(ch)[i]));
    out.levels.push_back(std::move(g));
  }
  return out;
}

template <typename T>
LossMap<T> attention_guided_map(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher,
                                const DistillConfig& cfg) {
  check_pair(student, teacher);
  const AttentionMaps<T> at = attention_maps(teacher, cfg.temperature);
  const AttentionMaps<T> as = attention_maps(student, cfg.temperature);
  LossMap<T> out;
  for (std::size_t l = 0; l < student.levels.size(); ++l) {
    const auto& s = student.levels[l];
    const auto& t = teacher.levels[l];
    const int c = s.channels(), p = s.plane_size();
    std::vector<double> masked(p, 0.0);
    for (int ch = 0; ch < c; ++ch) {
      const double wc = at.channel[l][ch];
      const T* sp = s.plane(ch);
      const T* tp = t.plane(ch);
      for (int i = 0; i < p; ++i) {
        const double d = static_cast<double>(sp[i]) - tp[i];
        masked[i] += wc * d * d;
      }
    }
    double channel_gap = 0;
    for (int ch = 0; ch < c; ++ch) {
      const double d = as.channel[l][ch] - at.channel[l][ch];
      channel_gap += d * d;
    }
    channel_gap /= c;
    nn::Tensor<T> m(1, s.height(), s.width());
    for (int i = 0; i < p; ++i) {
      const double ds = as.spatial[l][i] - at.spatial[l][i];
      m.data()[i] = static_cast<T>(cfg.beta * at.spatial[l][i] * masked[i] / c + cfg.gamma * ds * ds +
                                   cfg.eta * channel_gap);
    }
    out.levels.push_back(std::move(m));
  }
  return out;
}

template <typename T>
FPNFeatures<T> attention_guided_backward(const FPNFeatures<T>& student, const FPNFeatures<T>& teacher,
                                         const DistillConfig& cfg, const LossMap<T>& upstream) {
  check_pair(student, teacher);
  check_upstream(upstream, student);
  const AttentionMaps<T> at = attention_maps(teacher, cfg.temperature);
  const AttentionMaps<T> as = attention_maps(student, cfg.temperature);
  FPNFeatures<T> out;
  for (std::size_t l = 0; l < student.levels.size(); ++l) {
    const auto& s = student.levels[l];
    const auto& t = teacher.levels[l];
    const int c = s.channels(), p = s.plane_size();
    const T* up = upstream.levels[l].data();
    double up_sum = 0;
    for (int i = 0; i < p; ++i) up_sum += up[i];

    std::vector<double> g_spatial(p);
    for (int i = 0; i < p; ++i) g_spatial[i] = up[i] * 2.0 * cfg.gamma * (as.spatial[l][i] - at.spatial[l][i]);
    const std::vector<double> g_u = scaled_softmax_backward(as.spatial[l], g_spatial, cfg.temperature);

    std::vector<double> g_channel(c);
    for (int ch = 0; ch < c; ++ch) g_channel[ch] = up_sum * cfg.eta * 2.0 / c * (as.channel[l][ch] - at.channel[l][ch]);
    const std::vector<double> g_v = scaled_softmax_backward(as.channel[l], g_channel, cfg.temperature);

    nn::Tensor<T> g(c, s.height(), s.width());
    for (int ch = 0; ch < c; ++ch) {
      const T* sp = s.plane(ch);
      const T* tp = t.plane(ch);
      T* gp = g.plane(ch);
      const double wc = at.channel[l][ch];
      for (int i = 0; i < p; ++i) {
        const double sv = sp[i];
        const double sg = sign(sv);
        const double v = up[i] * cfg.beta * at.spatial[l][i] * wc * 2.0 / c * (sv - tp[i]) + g_u[i] * sg / c +
                         g_v[ch] * sg / p;
        gp[i] = static_cast<T>(v);
      }
    }
    out.levels.push_back(std::move(g));
  }
  return out;
}

template <typename T>
LossMap<T> head_kl_map(const HeadOutputs<T>& student, const HeadOutputs<T>& teacher, double temperature) {
  if (!(temperature > 0)) throw ValidationError("head_kl_map: temperature must be > 0");
  if (student.levels.size() != teacher.levels.size()) throw ShapeError("head_kl_map: level count mismatch");
  LossMap<T> out;
  for (std::size_t l = 0; l < student.levels.size(); ++l) {
    const auto& zs = student.levels[l].cls_logits;
    const auto& zt = teacher.levels[l].cls_logits;
    if (!zs.same_shape(zt)) throw ShapeError("head_kl_map: class logit shapes differ");
    nn::Tensor<T> m(1, zs.height(), zs.width());
    for (int p = 0; p < zs.plane_size(); ++p) {
      const auto ps = softmax_logits(zs, p, temperature);
      const auto pt = softmax_logits(zt, p, temperature);
      double kl = 0;
      for (std::size_t k = 0; k < ps.size(); ++k)
        if (pt[k] > 0) kl += pt[k] * (std::log(pt[k]) - std::log(ps[k]));
      m.data()[p] = static_cast<T>(std::max(0.0, kl) * temperature * temperature);
    }
    out.levels.push_back(std::move(m));
  }
  return out;
}

template <typename T>
HeadOutputs<T> head_kl_backward(const HeadOutputs<T>& student, const HeadOutputs<T>& teacher, double temperature,
                                const LossMap<T>& upstream) {
  HeadOutputs<T> g = student.zeros_like();
  for (std::size_t l = 0; l < student.levels.size(); ++l) {
    const auto& zs = student.levels[l].cls_logits;
    const auto& zt = teacher.levels[l].cls_logits;
    auto& gz = g.levels[l].cls_logits;
    const T* up = upstream.levels[l].data();
    for (int p = 0; p < zs.plane_size(); ++p) {
      const auto ps = softmax_logits(zs, p, temperature);
      const auto pt = softmax_logits(zt, p, temperature);
      for (int k = 0; k < zs.channels(); ++k) gz.plane(k)[p] = static_cast<T>(up[p] * temperature * (ps[k] - pt[k]));
    }
  }
  return g;
}

template <typename T>
double aid_distill_loss(const LossMap<T>& base, const WeightMap& weights) {
  if (base.levels.size() != weights.levels.size()) throw ShapeError("aid_distill_loss: level count mismatch");
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t l = 0; l < base.levels.size(); ++l) {
    const auto& b = base.levels[l];
    const auto& w = weights.levels[l];
    if (static_cast<std::size_t>(b.plane_size()) != w.values.size() || b.channels() != 1)
      throw ShapeError("aid_distill_loss: map shape mismatch at level " + std::to_string(l));
    for (std::size_t i = 0; i < w.values.size(); ++i) sum += w.values[i] * static_cast<double>(b.data()[i]);
    n += w.values.size();
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

template <typename T>
LossMap<T> aid_distill_upstream(const WeightMap& weights, double scale) {
  const double n = static_cast<double>(weights.num_locations());
  LossMap<T> up;
  for (const auto& w : weights.levels) {
    nn::Tensor<T> m(1, w.height, w.width);
    for (std::size_t i = 0; i < w.values.size(); ++i) m.data()[i] = static_cast<T>(scale * w.values[i] / n);
    up.levels.push_back(std::move(m));
  }
  return up;
}

double student_total_loss(const TaskLossBreakdown& task, double aid_distill, double lambda) {
  const double total = task.total + lambda * aid_distill;
  if (!std::isfinite(total)) throw NumericError("student_total_loss: non-finite objective");
  return total;
}

namespace {

template <typename T>
struct DistillTerms {
  double value = 0;
  FPNFeatures<T> grad_features;  // on the student's own FPN features
  HeadOutputs<T> grad_heads;
};

template <typename T>
DistillTerms<T> distill_terms(const DetectorOutput<T>& s, const DetectorOutput<T>& t, ChannelAdapter<T>* adapter,
                              const WeightMap& weights, const DistillConfig& cfg, bool want_grad,
                              double upstream_scale) {
  DistillTerms<T> terms;
  if (s.features.levels.size() != t.features.levels.size())
    throw ArchitectureMismatch("student and teacher have different FPN level counts");
  for (std::size_t l = 0; l < s.features.levels.size(); ++l) {
    const auto& a = s.features.levels[l];
    const auto& b = t.features.levels[l];
    if (a.height() != b.height() || a.width() != b.width())
      throw ArchitectureMismatch("student and teacher feature maps differ in extent at level " + std::to_string(l));
  }

  if (cfg.base_loss == BaseLoss::kHeadKl) {
    const LossMap<T> base = head_kl_map(s.heads, t.heads, cfg.kl_temperature);
    terms.value = aid_distill_loss(base, weights);
    if (want_grad)
      terms.grad_heads =
          head_kl_backward(s.heads, t.heads, cfg.kl_temperature, aid_distill_upstream<T>(weights, upstream_scale));
    return terms;
  }

  const int sc = s.features.levels.front().channels();
  const int tc = t.features.levels.front().channels();
  const bool project = adapter != nullptr && sc != tc;
  if (sc != tc && !project)
    throw ArchitectureMismatch("student/teacher FPN widths differ (" + std::to_string(sc) + " vs " +
                               std::to_string(tc) + ") and no channel adapter is available");
  FPNFeatures<T> projected;
  if (project) projected = adapter->forward(s.features);
  const FPNFeatures<T>& sf = project ? projected : s.features;

  const bool l2 = cfg.base_loss == BaseLoss::kFeatureL2;
  const LossMap<T> base = l2 ? feature_l2_map(sf, t.features) : attention_guided_map(sf, t.features, cfg);
  terms.value = aid_distill_loss(base, weights);
  if (want_grad) {
    const LossMap<T> up = aid_distill_upstream<T>(weights, upstream_scale);
    FPNFeatures<T> g = l2 ? feature_l2_backward(sf, t.features, up) : attention_guided_backward(sf, t.features, cfg, up);
    terms.grad_features = project ? adapter->backward(s.features, g) : std::move(g);
  }
  return terms;
}

template <typename T>
void scale_heads(HeadOutputs<T>& h, double s) {
  for (auto& l : h.levels)
    for (auto* t : {&l.cls_logits, &l.box_reg, &l.objectness})
      for (T& v : t->values()) v = static_cast<T>(v * s);
}

template <typename T>
void add_heads(HeadOutputs<T>& acc, const HeadOutputs<T>& x) {
  for (std::size_t l = 0; l < acc.levels.size(); ++l) {
    nn::add_inplace(acc.levels[l].cls_logits, x.levels[l].cls_logits);
    nn::add_inplace(acc.levels[l].box_reg, x.levels[l].box_reg);
    nn::add_inplace(acc.levels[l].objectness, x.levels[l].objectness);
  }
}

}  // namespace

template <typename T>
ObjectiveResult distill_objective(Detector<T>& student, ChannelAdapter<T>* adapter, const Detector<T>* teacher,
                                  const nn::Tensor<T>& input, const TargetAssignment& targets,
                                  const DistillConfig& cfg, bool accumulate, double grad_scale) {
  ObjectiveResult res;
  typename Detector<T>::Trace trace;
  const DetectorOutput<T> s_out = student.forward(input, accumulate ? &trace : nullptr);
  HeadOutputs<T> grad_heads;
  res.task = task_loss(s_out.heads, targets, accumulate ? &grad_heads : nullptr);

  DistillTerms<T> terms;
  if (teacher) {
    const DetectorOutput<T> t_out = teacher->forward(input);
    const TaskLossBreakdown t_task = task_loss(t_out.heads, targets);
    res.table = teacher_instance_losses(t_task, targets, cfg.aid);
    res.weights = build_weight_map(*res.table, targets, cfg.aid);
    terms = distill_terms(s_out, t_out, adapter, *res.weights, cfg, accumulate, cfg.aid.lambda * grad_scale);
    res.distill = terms.value;
  }
  res.total = student_total_loss(res.task, res.distill, teacher ? cfg.aid.lambda : 0.0);

  if (accumulate) {
    scale_heads(grad_heads, grad_scale);
    if (!terms.grad_heads.levels.empty()) add_heads(grad_heads, terms.grad_heads);
    student.backward(trace, grad_heads, terms.grad_features.levels.empty() ? nullptr : &terms.grad_features);
  }
  return res;
}

template <typename T>
ObjectiveResult self_distill_objective(Detector<T>& new_model, const Detector<T>& old_model,
                                       const nn::Tensor<T>& input, const TargetAssignment& targets,
                                       const DistillConfig& cfg, bool accumulate, double grad_scale) {
  if (!(new_model.spec() == old_model.spec()))
    throw ArchitectureMismatch("self-distillation requires identical architectures for the old and new model");
  return distill_objective<T>(new_model, nullptr, &old_model, input, targets, cfg, accumulate, grad_scale);
}

template <typename T>
double self_distill_loss(const TaskLossBreakdown& new_task, const DetectorOutput<T>& old_outputs,
                         const DetectorOutput<T>& new_outputs, const TargetAssignment& targets,
                         const DistillConfig& cfg) {
  for (std::size_t l = 0; l < std::max(old_outputs.features.levels.size(), new_outputs.features.levels.size()); ++l) {
    if (l >= old_outputs.features.levels.size() || l >= new_outputs.features.levels.size() ||
        !old_outputs.features.levels[l].same_shape(new_outputs.features.levels[l]))
      throw ArchitectureMismatch("self-distillation requires identical architectures for the old and new model");
  }
  const TaskLossBreakdown old_task = task_loss(old_outputs.heads, targets);
  const InstanceLossTable table = teacher_instance_losses(old_task, targets, cfg.aid);
  const WeightMap weights = build_weight_map(table, targets, cfg.aid);
  const DistillTerms<T> terms =
      distill_terms<T>(new_outputs, old_outputs, nullptr, weights, cfg, false, cfg.aid.lambda);
  return student_total_loss(new_task, terms.value, cfg.aid.lambda);
}

#define AID_INSTANTIATE_DISTILL(T)                                                                                 \
  template struct LossMap<T>;                                                                                      \
  template class ChannelAdapter<T>;                                                                                \
  template AttentionMaps<T> attention_maps<T>(const FPNFeatures<T>&, double);                                      \
  template LossMap<T> feature_l2_map<T>(const FPNFeatures<T>&, const FPNFeatures<T>&);                             \
  template FPNFeatures<T> feature_l2_backward<T>(const FPNFeatures<T>&, const FPNFeatures<T>&, const LossMap<T>&); \
  template LossMap<T> attention_guided_map<T>(const FPNFeatures<T>&, const FPNFeatures<T>&, const DistillConfig&); \
  template FPNFeatures<T> attention_guided_backward<T>(const FPNFeatures<T>&, const FPNFeatures<T>&,               \
                                                       const DistillConfig&, const LossMap<T>&);                   \
  template LossMap<T> head_kl_map<T>(const HeadOutputs<T>&, const HeadOutputs<T>&, double);                        \
  template HeadOutputs<T> head_kl_backward<T>(const HeadOutputs<T>&, const HeadOutputs<T>&, double,                \
                                              const LossMap<T>&);                                                  \
  template double aid_distill_loss<T>(const LossMap<T>&, const WeightMap&);                                        \
  template LossMap<T> aid_distill_upstream<T>(const WeightMap&, double);                                           \
  template ObjectiveResult distill_objective<T>(Detector<T>&, ChannelAdapter<T>*, const Detector<T>*,              \
                                                const nn::Tensor<T>&, const TargetAssignment&,                     \
                                                const DistillConfig&, bool, double);                               \
  template ObjectiveResult self_distill_objective<T>(Detector<T>&, const Detector<T>&, const nn::Tensor<T>&,       \
                                                     const TargetAssignment&, const DistillConfig&, bool, double); \
  template double self_distill_loss<T>(const TaskLossBreakdown&, const DetectorOutput<T>&,                         \
                                       const DetectorOutput<T>&, const TargetAssignment&, const DistillConfig&);

AID_INSTANTIATE_DISTILL(float)
AID_INSTANTIATE_DISTILL(double)

#undef AID_INSTANTIATE_DISTILL

}  // namespace aid
