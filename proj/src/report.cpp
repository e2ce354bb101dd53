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

#include "aid/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aid/checkpoint.hpp"
#include "aid/data.hpp"
#include "aid/errors.hpp"

namespace aid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<double> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json read_json_file(const fs::path& p, const std::string& run) {
  std::ifstream in(p);
  if (!in) throw ContractError("run '" + run + "': missing " + p.filename().string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("run '" + run + "': " + p.filename().string() + " is not valid JSON", 0);
  return j;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<EpochRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("missing metrics file '" + path + "'");
  std::vector<EpochRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(path + ": invalid JSON", n);
    try {
      EpochRecord r;
      r.epoch = j.at("epoch").get<int>();
      r.task_loss = j.at("task_loss").get<double>();
      r.distill_loss = j.at("distill_loss").get<double>();
      r.weight_min = opt(j, "weight_min");
      r.weight_mean = opt(j, "weight_mean");
      r.weight_max = opt(j, "weight_max");
      r.val_map50 = opt(j, "val_map50");
      r.seconds = j.value("seconds", 0.0);
      out.push_back(r);
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what(), n);
    }
  }
  return out;
}

RunSummary load_run(const std::string& dir) {
  const fs::path root(dir);
  RunSummary r;
  r.dir = dir;
  r.name = fs::path(dir).lexically_normal().filename().string();
  if (r.name.empty()) r.name = fs::path(dir).lexically_normal().parent_path().filename().string();
  if (!fs::exists(root / "metrics.jsonl")) throw ContractError("run '" + dir + "': missing metrics.jsonl");
  r.epochs = read_metrics((root / "metrics.jsonl").string());
  const json run = read_json_file(root / "run.json", dir);
  r.mode = run.value("mode", "unknown");
  r.seed = run.value("seed", std::uint64_t{0});
  if (fs::exists(root / "eval.json")) r.eval = eval_result_from_json(read_json_file(root / "eval.json", dir));

  if (!fs::exists(root / "model.ckpt")) throw ContractError("run '" + dir + "': missing model.ckpt");
  const Checkpoint ck = load_checkpoint((root / "model.ckpt").string());
  r.image_size = run.value("image_size", 0);
  if (r.image_size < 1 && ck.meta.config.contains("data")) r.image_size = ck.meta.config["data"].value("image_size", 0);
  if (r.image_size < 1) throw ContractError("run '" + dir + "': input size unknown");
  r.stats = model_stats(ck.model, r.image_size, r.image_size);

  std::ifstream w(root / "instance_weights.jsonl");
  std::string line;
  while (w && std::getline(w, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("instances")) throw ParseError("run '" + dir + "': bad instance_weights.jsonl", 0);
    for (const auto& i : j["instances"]) r.instance_weights.push_back(i.at("weight").get<double>());
  }
  return r;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *v);
  return std::string(buf, ptr);
}

std::string comparison_csv(const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  out << "run,mode,seed,map50,ap_small,ap_medium,ap_large,params,gflops,input_size\n";
  for (const auto& r : runs) {
    const EvalResult e = r.eval.value_or(EvalResult{});
    out << r.name << "," << r.mode << "," << r.seed << "," << format_metric(e.map50) << ","
        << format_metric(e.ap_small) << "," << format_metric(e.ap_medium) << "," << format_metric(e.ap_large) << ","
        << r.stats.parameter_count << "," << format_metric(r.stats.gflops()) << "," << r.image_size << "\n";
  }
  return out.str();
}

Rgb8Image weights_histogram(const std::vector<RunSummary>& runs, int bins) {
  constexpr int kPanelW = 420, kPanelH = 130, kMarginL = 50, kMarginT = 24, kPlotH = 80;
  const int n = std::max<int>(1, static_cast<int>(runs.size()));
  Canvas c(kPanelW, n * kPanelH + 10);
  const Color axis{60, 60, 60};
  for (int k = 0; k < static_cast<int>(runs.size()); ++k) {
    const RunSummary& r = runs[k];
    const int top = k * kPanelH + kMarginT, bottom = top + kPlotH;
    const int left = kMarginL, right = kPanelW - 20;
    c.text(left, top - 16, r.name + " (" + r.mode + ")", axis);
    c.line(left, bottom, right, bottom, axis);
    c.line(left, top, left, bottom, axis);
    c.text(left - 4, bottom + 6, "0", axis);
    c.text(right - 10, bottom + 6, "1.0", axis);
    c.text((left + right) / 2 - 20, bottom + 6, "WEIGHT", axis);
    if (r.instance_weights.empty()) {
      c.text(left + 10, top + 30, "NO DISTILLATION WEIGHTS", {150, 150, 150});
      continue;
    }
    std::vector<int> counts(bins, 0);
    for (double w : r.instance_weights) {
      int b = static_cast<int>(std::floor(w * bins));
      counts[std::clamp(b, 0, bins - 1)] += 1;
    }
    const int peak = *std::max_element(counts.begin(), counts.end());
    c.text(4, top, std::to_string(peak), axis);
    const double bw = static_cast<double>(right - left) / bins;
    for (int b = 0; b < bins; ++b) {
      if (counts[b] == 0) continue;
      const int h = static_cast<int>(std::lround(static_cast<double>(counts[b]) / peak * kPlotH));
      c.fill_rect(left + static_cast<int>(b * bw) + 1, bottom - h, left + static_cast<int>((b + 1) * bw) - 1,
                  bottom - 1, palette(k));
    }
  }
  return c.image();
}

Rgb8Image map_curve(const std::vector<RunSummary>& runs) {
  constexpr int kW = 520, kH = 320, kLeft = 50, kRight = 170, kTop = 20, kBottom = 40;
  Canvas c(kW, kH);
  const Color axis{60, 60, 60};
  const int x0 = kLeft, x1 = kW - kRight, y0 = kTop, y1 = kH - kBottom;
  int max_epoch = 1;
  for (const auto& r : runs) max_epoch = std::max(max_epoch, static_cast<int>(r.epochs.size()));
  c.line(x0, y1, x1, y1, axis);
  c.line(x0, y0, x0, y1, axis);
  for (int t = 0; t <= 4; ++t) {
    const int y = y1 - (y1 - y0) * t / 4;
    c.line(x0 - 3, y, x0, y, axis);
    c.text(6, y - 3, fixed(t * 0.25, 2), axis);
  }
  c.text((x0 + x1) / 2 - 15, y1 + 20, "EPOCH", axis);
  c.text(x0 - 3, y1 + 6, "1", axis);
  c.text(x1 - 10, y1 + 6, std::to_string(max_epoch), axis);
  c.text(x0, 4, "VAL MAP50", axis);
  auto px = [&](int e) { return max_epoch == 1 ? x0 : x0 + (x1 - x0) * e / (max_epoch - 1); };
  auto py = [&](double m) { return y1 - static_cast<int>(std::lround(m * (y1 - y0))); };
  for (int k = 0; k < static_cast<int>(runs.size()); ++k) {
    const Color col = palette(k);
    std::optional<std::pair<int, int>> prev;
    for (int e = 0; e < static_cast<int>(runs[k].epochs.size()); ++e) {
      const auto& m = runs[k].epochs[e].val_map50;
      if (!m) {
        prev.reset();
        continue;
      }
      const int x = px(e), y = py(*m);
      c.fill_rect(x - 1, y - 1, x + 1, y + 1, col);
      if (prev) c.line(prev->first, prev->second, x, y, col);
      prev = {{x, y}};
    }
    c.fill_rect(x1 + 10, y0 + 14 * k, x1 + 18, y0 + 14 * k + 7, col);
    c.text(x1 + 22, y0 + 14 * k, runs[k].name, axis);
  }
  return c.image();
}

Rgb8Image render_detections(const Image& image, const std::vector<Detection>& dets, const std::vector<Instance>& gts,
                            const std::string& title, int scale) {
  const int w = image.width * scale, h = image.height * scale;
  Canvas c(w, h + 14, {0, 0, 0});
  c.blit(to_rgb8(image), 0, 14, scale);
  c.text(2, 3, title, {255, 255, 255});
  auto box = [&](const BoundingBox& b, Color col, int t) {
    c.rect(static_cast<int>(b.x1 * scale), 14 + static_cast<int>(b.y1 * scale),
           static_cast<int>(b.x2 * scale) - 1, 14 + static_cast<int>(b.y2 * scale) - 1, col, t);
  };
  for (const Instance& g : gts) box(g.box, {255, 255, 255}, 1);
  for (const Detection& d : dets) {
    const Color col = palette(d.class_id + 1);
    box(d.box, col, 2);
    c.text(static_cast<int>(d.box.x1 * scale) + 3, 14 + static_cast<int>(d.box.y1 * scale) + 3,
           std::to_string(d.class_id) + ":" + fixed(d.score, 2), col);
  }
  return c.image();
}

void write_report(const std::vector<std::string>& run_dirs, const ReportOptions& opts) {
  if (run_dirs.empty()) throw ValidationError("report: no run directories given");
  std::vector<RunSummary> runs;
  for (const auto& d : run_dirs) runs.push_back(load_run(d));

  const fs::path out(opts.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ContractError("cannot create report directory '" + opts.out_dir + "': " + ec.message());
  {
    std::ofstream csv(out / "comparison.csv", std::ios::trunc);
    csv << comparison_csv(runs);
    if (!csv) throw ContractError("failed writing comparison.csv");
  }
  write_png((out / "weights_hist.png").string(), weights_histogram(runs));
  write_png((out / "map_curve.png").string(), map_curve(runs));

  if (!opts.dataset_dir || opts.num_renders <= 0) return;
  const DatasetDir ds = load_dataset(*opts.dataset_dir);
  const DatasetHandle& src = ds.val.samples.empty() ? ds.train : ds.val;
  std::vector<Checkpoint> models;
  for (const auto& r : runs) models.push_back(load_checkpoint((fs::path(r.dir) / "model.ckpt").string()));
  fs::create_directories(out / "renders", ec);
  if (ec) throw ContractError("cannot create renders directory: " + ec.message());
  const int n = std::min<int>(opts.num_renders, static_cast<int>(src.size()));
  for (int i = 0; i < n; ++i) {
    const ImageSample& s = src.samples[i];
    std::vector<Rgb8Image> panels;
    int total_w = 0, max_h = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto dets = detect(models[k].model, s.pixels, DecodeParams{0.3, 0.5, 20});
      panels.push_back(render_detections(s.pixels, dets, s.instances, runs[k].name));
      total_w += panels.back().width + 4;
      max_h = std::max(max_h, panels.back().height);
    }
    Canvas sheet(total_w, max_h, {40, 40, 40});
    int x = 0;
    for (const auto& p : panels) {
      sheet.blit(p, x, 0);
      x += p.width + 4;
    }
    write_png((out / "renders" / (s.image_id + ".png")).string(), sheet.image());
  }
}

}  // namespace aid
