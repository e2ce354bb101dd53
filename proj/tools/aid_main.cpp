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

// Command-line entry point: gen-data, train, eval, report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aid/checkpoint.hpp"
#include "aid/config.hpp"
#include "aid/data.hpp"
#include "aid/errors.hpp"
#include "aid/evaluation.hpp"
#include "aid/report.hpp"
#include "aid/simd/kernels.hpp"
#include "aid/training.hpp"

namespace fs = std::filesystem;
using namespace aid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitContract = 2;

struct GlobalOptions {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::string out;
};

std::optional<std::string> env_seed() {
  const char* s = std::getenv("AID_SEED");
  if (!s) return std::nullopt;
  return std::string(s);
}

ResolvedConfig resolve(const GlobalOptions& g, std::vector<std::string> extra = {}) {
  std::vector<std::string> sets = g.sets;
  sets.insert(sets.end(), extra.begin(), extra.end());
  return resolve_config(g.config, sets, env_seed());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
  if (!out) throw ContractError("cannot write '" + p.string() + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ContractError("cannot create directory '" + dir + "'");
}

std::pair<DatasetHandle, DatasetHandle> load_or_generate(const ExperimentConfig& cfg,
                                                         const std::optional<std::string>& data_dir) {
  if (data_dir) {
    DatasetDir d = load_dataset(*data_dir);
    return {std::move(d.train), std::move(d.val)};
  }
  return split_synthetic(generate_synthetic(cfg.data), cfg.data.num_val);
}

std::string ap_cell(const std::optional<double>& v) {
  if (!v) return "   -  ";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%6.4f", *v);
  return buf;
}

void print_eval_table(const EvalResult& r) {
  std::printf("%-16s %s\n", "class", "AP50");
  for (std::size_t c = 0; c < r.class_names.size(); ++c)
    std::printf("%-16s %s\n", r.class_names[c].c_str(), ap_cell(r.per_class[c]).c_str());
  std::printf("%-16s %s\n", "mAP50", ap_cell(r.map50).c_str());
  std::printf("%-16s %s\n", "AP small", ap_cell(r.ap_small).c_str());
  std::printf("%-16s %s\n", "AP medium", ap_cell(r.ap_medium).c_str());
  std::printf("%-16s %s\n", "AP large", ap_cell(r.ap_large).c_str());
  std::printf("gt=%d det=%d\n", r.num_gt, r.num_det);
}

int cmd_gen_data(const GlobalOptions& g) {
  const ResolvedConfig rc = resolve(g);
  if (g.out.empty()) throw ConfigError("gen-data requires --out");
  const DatasetHandle all = generate_synthetic(rc.config.data);
  const auto [train, val] = split_synthetic(all, rc.config.data.num_val);
  ensure_dir(g.out);
  write_dataset(g.out, train, val);
  write_text(fs::path(g.out) / "config.json", rc.json.dump(2) + "\n");
  std::printf("wrote %zu images (%zu train, %zu val), %zu instances to %s\n", all.size(), train.size(), val.size(),
              all.num_instances(), g.out.c_str());
  return kExitOk;
}

int cmd_train(const GlobalOptions& g, const std::string& mode_name, const std::optional<std::string>& teacher_path,
              const std::optional<std::string>& data_dir) {
  std::vector<std::string> extra;
  if (!mode_name.empty()) extra.push_back("train.mode=\"" + mode_name + "\"");
  const ResolvedConfig rc = resolve(g, extra);
  ExperimentConfig cfg = rc.config;
  if (g.out.empty()) throw ConfigError("train requires --out");
  const TrainMode mode = cfg.train.mode;
  if (mode == TrainMode::kTeacher) cfg.train.detector = cfg.teacher_spec();

  std::optional<FrozenDetector> teacher;
  if (mode_needs_teacher(mode)) {
    if (!teacher_path) throw MissingTeacher("mode " + to_string(mode) + " requires --teacher");
    teacher.emplace(freeze_teacher(*teacher_path));
    // The new model is a fresh copy of the old model's architecture.
    if (mode == TrainMode::kSelfDistill) cfg.train.detector = teacher->spec();
  }
  auto [train_set, val_set] = load_or_generate(cfg, data_dir);

  ensure_dir(g.out);
  nlohmann::json resolved = rc.json;
  resolved["detector"]["width_multiplier"] = cfg.train.detector.width_multiplier;
  write_text(fs::path(g.out) / "config.json", resolved.dump(2) + "\n");

  TrainOutputs outputs;
  outputs.out_dir = g.out;
  outputs.on_epoch = [](const EpochRecord& e) {
    std::printf("epoch %d task %.5f distill %.6f map50 %s (%.1fs)\n", e.epoch, e.task_loss, e.distill_loss,
                e.val_map50 ? std::to_string(*e.val_map50).c_str() : "-", e.seconds);
    std::fflush(stdout);
  };
  const RunRecord rec = train(cfg.train, train_set, val_set, teacher ? &*teacher : nullptr, outputs, resolved);
  if (rec.final_eval) print_eval_table(*rec.final_eval);
  std::printf("checkpoint %s (%.1fs, simd=%s)\n", rec.checkpoint_path.c_str(), rec.seconds,
              std::string(simd::isa_name(simd::active_isa())).c_str());
  return kExitOk;
}

int cmd_eval(const GlobalOptions& g, const std::string& checkpoint, const std::optional<std::string>& data_dir,
             const std::string& split) {
  const ResolvedConfig rc = resolve(g);
  if (split != "train" && split != "val") throw ConfigError("--split must be train or val");
  const Checkpoint ck = load_checkpoint(checkpoint);
  auto [train_set, val_set] = load_or_generate(rc.config, data_dir);
  const DatasetHandle& ds = split == "train" ? train_set : val_set;
  const EvalResult r = evaluate(ck.model, ds.samples, ds.class_names, rc.config.train.eval);
  print_eval_table(r);
  if (!g.out.empty()) {
    const fs::path p(g.out);
    if (p.has_parent_path()) ensure_dir(p.parent_path().string());
    write_text(p, to_json(r).dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-loss-weighted knowledge distillation for small detectors"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::string config_path;

  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", g.sets, "Override section.key=value (repeatable)");
    sub->add_option("--out", g.out, "Output directory or file");
  };

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic dataset");
  add_globals(gen);

  std::string mode;
  std::string teacher, data, checkpoint, split = "val";
  auto* tr = app.add_subcommand("train", "Train in one of the five modes");
  add_globals(tr);
  tr->add_option("--mode", mode, "teacher | no_kd_student | uniform_kd | aid_kd | self_distill");
  tr->add_option("--teacher", teacher, "Teacher (or old-model) checkpoint");
  tr->add_option("--data", data, "Dataset directory (default: generate from the data section)");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_globals(ev);
  ev->add_option("--checkpoint", checkpoint, "Checkpoint path")->required();
  ev->add_option("--data", data, "Dataset directory (default: generate from the data section)");
  ev->add_option("--split", split, "train or val");

  std::vector<std::string> runs;
  int renders = 4;
  auto* rep = app.add_subcommand("report", "Compare run directories");
  add_globals(rep);
  rep->add_option("runs", runs, "Run directories")->required();
  rep->add_option("--data", data, "Dataset directory used for detection renders");
  rep->add_option("--renders", renders, "Number of rendered sample images");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitContract;
  }
  if (!config_path.empty()) g.config = config_path;
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };

  try {
    if (gen->parsed()) return cmd_gen_data(g);
    if (tr->parsed()) return cmd_train(g, mode, opt(teacher), opt(data));
    if (ev->parsed()) return cmd_eval(g, checkpoint, opt(data), split);
    if (rep->parsed()) {
      resolve(g);
      if (g.out.empty()) throw ConfigError("report requires --out");
      ReportOptions ro{g.out, opt(data), renders};
      write_report(runs, ro);
      std::printf("report written to %s\n", g.out.c_str());
      return kExitOk;
    }
  } catch (const ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitContract;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
