/* Copyright 2026 The qnet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "cli.h"
#include "qnet/io.h"
#include "qnet/results.h"
#include "temp_dir.h"

namespace qnet {
namespace {

using testing::TempDir;

const std::filesystem::path kRoot = QNET_FIXTURE_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qnet");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> ModelArgs() {
  return {"--model", (kRoot / "lenet5/lenet5.json").string(),
          "--weights", (kRoot / "lenet5/lenet5.cnnw").string(),
          "--mnist-images", (kRoot / "mnist/t10k-images-idx3-ubyte").string(),
          "--mnist-labels", (kRoot / "mnist/t10k-labels-idx1-ubyte").string(),
          "--calib-images", (kRoot / "mnist/calib-images-idx3-ubyte").string(),
          "--calib-labels", (kRoot / "mnist/calib-labels-idx1-ubyte").string(),
          "--calib-samples", "200", "--samples", "100", "--workers", "2"};
}

std::vector<std::string> With(std::vector<std::string> base,
                              std::initializer_list<std::string> extra) {
  base.insert(base.end(), extra);
  return base;
}

std::string Slurp(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

TEST(CliTest, CalibrateWritesFourPowerOfTwoRows) {
  TempDir dir;
  const Outcome r = Invoke(With({"calibrate"}, {}));
  EXPECT_EQ(r.code, cli::kValidationError);

  auto args = ModelArgs();
  args.insert(args.begin(), "calibrate");
  args.insert(args.end(), {"--out", (dir / "p.json").string()});
  const Outcome ok = Invoke(args);
  ASSERT_EQ(ok.code, cli::kOk) << ok.err;
  const StoredProfile stored = read_profile(dir / "p.json");
  EXPECT_EQ(stored.scales.layers.size(), 4u);
  EXPECT_EQ(stored.profile.samples, 200u);
  for (const std::string layer : {"conv1", "conv2", "fc1", "fc2"}) {
    EXPECT_NE(ok.out.find(layer), std::string::npos);
  }

  // Same seed: byte-identical profile, regardless of worker count.
  const std::string first = Slurp(dir / "p.json");
  args.insert(args.end(), {"--workers", "1"});
  ASSERT_EQ(Invoke(args).code, cli::kOk);
  EXPECT_EQ(Slurp(dir / "p.json"), first);
}

TEST(CliTest, UniformPolicyGivesIdenticalScales) {
  TempDir dir;
  auto args = With(ModelArgs(), {"--policy", "uniform", "--out",
                                 (dir / "p.json").string()});
  args.insert(args.begin(), "calibrate");
  ASSERT_EQ(Invoke(args).code, cli::kOk);
  const StoredProfile stored = read_profile(dir / "p.json");
  std::set<int> exponents;
  for (const LayerScales& s : stored.scales.layers) {
    exponents.insert(s.input_exponent);
    exponents.insert(s.weight_exponent);
  }
  EXPECT_EQ(exponents.size(), 1u);
  EXPECT_EQ(stored.scales.policy, ScalePolicy::kUniform);
}

TEST(CliTest, ConfigFileIsOverriddenByFlags) {
  TempDir dir;
  write_file(dir / "run.toml", "policy = \"uniform\"\ncalib-samples = 50\n");
  auto args = ModelArgs();
  args.erase(std::find(args.begin(), args.end(), "--calib-samples"),
             std::find(args.begin(), args.end(), "--calib-samples") + 2);
  args.insert(args.begin(), "calibrate");
  args.insert(args.end(), {"--config", (dir / "run.toml").string(), "--out",
                           (dir / "p.json").string()});
  ASSERT_EQ(Invoke(args).code, cli::kOk);
  StoredProfile stored = read_profile(dir / "p.json");
  EXPECT_EQ(stored.scales.policy, ScalePolicy::kUniform);
  EXPECT_EQ(stored.profile.samples, 50u);

  args.insert(args.end(), {"--policy", "per-layer"});
  ASSERT_EQ(Invoke(args).code, cli::kOk);
  stored = read_profile(dir / "p.json");
  EXPECT_EQ(stored.scales.policy, ScalePolicy::kPerLayer);
  EXPECT_EQ(stored.profile.samples, 50u);
}

TEST(CliTest, SweepCsvHasOnePointPerWidth) {
  TempDir dir;
  auto args = With(ModelArgs(), {"--bits-min", "3", "--bits-max", "8",
                                 "--format", "csv", "--out",
                                 (dir / "s.csv").string()});
  args.insert(args.begin(), "sweep");
  const Outcome r = Invoke(args);
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::istringstream csv(Slurp(dir / "s.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, kCsvHeader);
  std::set<std::string> ids;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ids.insert(line.substr(0, line.find(',')));
    ++rows;
  }
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_EQ(rows, 24u);
}

TEST(CliTest, SweepIsDeterministicAcrossWorkers) {
  TempDir dir;
  auto args = With(ModelArgs(), {"--bits-min", "6", "--bits-max", "8"});
  args.insert(args.begin(), "sweep");
  auto one = With(args, {"--workers", "1", "--out", (dir / "a.json").string()});
  auto three = With(args, {"--workers", "3", "--out", (dir / "b.json").string()});
  ASSERT_EQ(Invoke(one).code, cli::kOk);
  ASSERT_EQ(Invoke(three).code, cli::kOk);
  EXPECT_EQ(Slurp(dir / "a.json"), Slurp(dir / "b.json"));
}

TEST(CliTest, ImpossibleTargetExitsInfeasibleButWritesResults) {
  TempDir dir;
  auto args = With(ModelArgs(), {"--target", "1.01", "--full-samples", "100",
                                 "--out", (dir / "r.json").string(), "--log",
                                 (dir / "log.jsonl").string()});
  args.insert(args.begin(), "search");
  const Outcome r = Invoke(args);
  EXPECT_EQ(r.code, cli::kInfeasibleTarget) << r.err;
  EXPECT_NE(r.out.find("INFEASIBLE"), std::string::npos);
  const ResultsDocument doc = read_results(dir / "r.json");
  ASSERT_EQ(doc.cases.size(), 4u);
  EXPECT_EQ(doc.points.back().label, "case-D");
  EXPECT_TRUE(doc.points.back().full_accuracy.has_value());
}

TEST(CliTest, ReportConvertsStructuredToCsv) {
  TempDir dir;
  auto sweep = With(ModelArgs(), {"--bits-min", "7", "--bits-max", "8", "--out",
                                  (dir / "s.json").string()});
  sweep.insert(sweep.begin(), "sweep");
  ASSERT_EQ(Invoke(sweep).code, cli::kOk);
  const Outcome r = Invoke({"report", "--in", (dir / "s.json").string(), "--format",
                         "csv", "--out", (dir / "s.csv").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(Slurp(dir / "s.csv"), to_csv(read_results(dir / "s.json")));
  EXPECT_EQ(Invoke({"report", "--in", (dir / "s.json").string()}).code, cli::kOk);
}

TEST(CliTest, EnergyCommand) {
  auto args = With(ModelArgs(), {"--bits", "8"});
  args.insert(args.begin(), "energy");
  const Outcome r = Invoke(args);
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("fc2"), std::string::npos);
}

TEST(CliTest, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(Invoke({}).code, cli::kValidationError);
  EXPECT_EQ(Invoke({"bogus"}).code, cli::kValidationError);
  EXPECT_EQ(Invoke({"sweep", "--policy", "global"}).code, cli::kValidationError);
  EXPECT_EQ(Invoke({"sweep", "--bits-min", "0"}).code, cli::kValidationError);
  EXPECT_EQ(Invoke({"sweep"}).code, cli::kValidationError);
  EXPECT_EQ(Invoke({"report", "--in", (dir / "absent.json").string()}).code,
            cli::kIoError);
  EXPECT_EQ(Invoke({"sweep", "--model", (dir / "absent.json").string(),
                 "--weights", (dir / "absent.cnnw").string()})
                .code,
            cli::kIoError);

  write_file(dir / "bad.cnnw", "CNNW\x01");
  auto corrupt = With(ModelArgs(), {"--weights", (dir / "bad.cnnw").string()});
  corrupt.insert(corrupt.begin(), "sweep");
  EXPECT_EQ(Invoke(corrupt).code, cli::kValidationError);

  auto inverted = With(ModelArgs(), {"--bits-min", "9", "--bits-max", "8"});
  inverted.insert(inverted.begin(), "sweep");
  EXPECT_EQ(Invoke(inverted).code, cli::kValidationError);
  EXPECT_EQ(Invoke({"--help"}).code, cli::kOk);
}

}  // namespace
}  // namespace qnet
