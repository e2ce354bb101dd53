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
#include <sys/wait.h>

#include <fstream>
#include <map>
#include <sstream>

#include "aid/config.hpp"
#include "aid/errors.hpp"
#include "test_util.hpp"

using namespace aid;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + AID_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kTiny =
    "--set data.num_images=12 --set data.num_val=4 --set data.image_size=32 --set detector.channel_base=8 "
    "--set train.epochs=1 --set train.batch_size=4 --set train.warmup_steps=1";

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

}  // namespace

TEST(Config, DefaultsValidateAndRoundTrip) {
  const auto r = resolve_config(std::nullopt, {}, std::nullopt);
  EXPECT_EQ(r.config.train.eval.scale_factor, 0.4);
  EXPECT_EQ(to_json(experiment_from_json(r.json)).dump(), r.json.dump());
  for (const char* s : {"data", "detector", "assign", "aid", "distill", "train", "eval"})
    EXPECT_TRUE(r.json.contains(s)) << s;
}

TEST(Config, OverridesAndSeedPrecedence) {
  test::TempDir d("cfg");
  const auto file = d.path() / "c.json";
  std::ofstream(file) << R"({"train": {"seed": 3, "epochs": 7}, "aid": {"alpha": 0.3}})";
  auto r = resolve_config(file.string(), {"train.epochs=9", "distill.base_loss=\"head_kl\""}, std::nullopt);
  EXPECT_EQ(r.config.train.seed, 3u);
  EXPECT_EQ(r.config.train.epochs, 9);
  EXPECT_EQ(r.config.train.distill.aid.alpha, 0.3);
  EXPECT_EQ(r.config.train.distill.base_loss, BaseLoss::kHeadKl);
  r = resolve_config(file.string(), {"train.seed=4"}, std::string("11"));
  EXPECT_EQ(r.config.train.seed, 11u);
  // Unquoted strings fall back to plain text.
  r = resolve_config(std::nullopt, {"train.mode=uniform_kd"}, std::nullopt);
  EXPECT_EQ(r.config.train.mode, TrainMode::kUniformKd);
  // Re-resolving the canonical JSON reproduces it.
  std::ofstream(d.path() / "r.json") << r.json.dump();
  EXPECT_EQ(resolve_config((d.path() / "r.json").string(), {}, std::nullopt).json.dump(), r.json.dump());
}

TEST(Config, Rejections) {
  test::TempDir d("cfgbad");
  std::ofstream(d.path() / "unknown.json") << R"({"train": {"epochz": 3}})";
  std::ofstream(d.path() / "broken.json") << R"({"train": )";
  EXPECT_THROW(resolve_config((d.path() / "unknown.json").string(), {}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config((d.path() / "broken.json").string(), {}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config((d.path() / "absent.json").string(), {}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {"train.nope=1"}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {"train"}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {"train=1"}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {"train.epochs=many"}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {"train.mode=student"}, std::nullopt), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {}, std::string("-1")), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {}, std::string("12a")), ConfigError);
  EXPECT_THROW(resolve_config(std::nullopt, {"aid.alpha=-1"}, std::nullopt), ValidationError);
  EXPECT_THROW(resolve_config(std::nullopt, {"train.epochs=0"}, std::nullopt), ValidationError);
}

TEST(Cli, ExitCodes) {
  test::TempDir d("cli");
  const std::string data = (d.path() / "data").string();
  EXPECT_EQ(run_cli("gen-data " + kTiny + " --out " + data), 0);
  EXPECT_EQ(run_cli("train --mode teacher " + kTiny + " --data " + data + " --out " + (d.path() / "t").string()), 0);
  EXPECT_TRUE(fs::exists(d.path() / "t" / "model.ckpt"));
  EXPECT_TRUE(fs::exists(d.path() / "t" / "config.json"));
  const std::string teacher = (d.path() / "t" / "model.ckpt").string();
  EXPECT_EQ(run_cli("train --mode aid_kd " + kTiny + " --data " + data + " --teacher " + teacher + " --out " +
                    (d.path() / "s").string()),
            0);
  EXPECT_EQ(run_cli("train --mode self_distill " + kTiny + " --data " + data + " --teacher " + teacher + " --out " +
                    (d.path() / "sd").string()),
            0);
  EXPECT_EQ(run_cli("eval " + kTiny + " --data " + data + " --checkpoint " + teacher + " --out " +
                    (d.path() / "e" / "eval.json").string()),
            0);
  EXPECT_TRUE(fs::exists(d.path() / "e" / "eval.json"));
  EXPECT_EQ(run_cli("report " + (d.path() / "t").string() + " " + (d.path() / "s").string() + " --data " + data +
                    " --renders 1 --out " + (d.path() / "rep").string()),
            0);
  EXPECT_TRUE(fs::exists(d.path() / "rep" / "comparison.csv"));

  // Contract violations exit with 2.
  EXPECT_EQ(run_cli("train --mode aid_kd " + kTiny + " --data " + data + " --out " + (d.path() / "x").string()), 2);
  EXPECT_EQ(run_cli("train --mode nonsense " + kTiny + " --out " + (d.path() / "x").string()), 2);
  EXPECT_EQ(run_cli("train --set train.bogus=1 --out " + (d.path() / "x").string()), 2);
  EXPECT_EQ(run_cli("gen-data " + kTiny + " --out " + data + "2", "AID_SEED=abc"), 2);
  EXPECT_EQ(run_cli("eval --checkpoint " + (d.path() / "missing.ckpt").string() + " " + kTiny), 2);
  EXPECT_EQ(run_cli("report " + (d.path() / "nothing").string() + " --out " + (d.path() / "rep2").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli(""), 2);
}

TEST(Cli, GenDataIsIdempotent) {
  test::TempDir d("gen");
  const auto a = d.path() / "a", b = d.path() / "b";
  ASSERT_EQ(run_cli("gen-data " + kTiny + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("gen-data " + kTiny + " --out " + b.string()), 0);
  const auto ta = read_tree(a);
  EXPECT_EQ(ta, read_tree(b));
  ASSERT_EQ(run_cli("gen-data " + kTiny + " --out " + a.string()), 0);
  EXPECT_EQ(ta, read_tree(a));
  EXPECT_EQ(ta.count("split.json"), 1u);
  // AID_SEED only touches the training seed.
  ASSERT_EQ(run_cli("gen-data " + kTiny + " --out " + b.string(), "AID_SEED=5"), 0);
  auto tb = read_tree(b);
  EXPECT_EQ(ta.at("labels.jsonl"), tb.at("labels.jsonl"));
}

TEST(Cli, SeedFromEnvironmentReachesTraining) {
  test::TempDir d("seed");
  const std::string data = (d.path() / "data").string();
  ASSERT_EQ(run_cli("gen-data " + kTiny + " --out " + data), 0);
  ASSERT_EQ(run_cli("train --mode no_kd_student " + kTiny + " --data " + data + " --out " + (d.path() / "a").string(),
                    "AID_SEED=42"),
            0);
  std::ifstream in(d.path() / "a" / "config.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["train"]["seed"], 42);
}
