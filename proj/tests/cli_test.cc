// Copyright 2026 The dxtext Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"

namespace dxtext::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dxtext_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // Three well-separated words.
    Write("toy.txt", "a 0 0\nb 3 4\nc 0 1\n");
    Write("far.txt", "a 0 0\nb 100 0\nc 0 100\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void Write(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name)) << text;
  }

  std::string ReadFile(const std::string& name) const {
    std::ifstream in(Path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Result Run(std::vector<std::string> args, const std::string& input = "") const {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = RunCli(args, in, out, err);
    return {code, out.str(), err.str()};
  }

  std::vector<std::string> Leftovers() const {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir_)) {
      names.push_back(e.path().filename().string());
    }
    return names;
  }

  fs::path dir_;
};

TEST_F(CliTest, PerturbHighEpsilonKeepsTokens) {
  std::string input;
  for (int line = 0; line < 100; ++line) input += "a b c a\n";
  const Result r = Run({"--embeddings", Path("far.txt"), "--quiet", "perturb",
                        "--mechanism", "baseline", "--epsilon", "1000"},
                       input);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream want(input), got(r.out);
  std::string wl, gl;
  int same = 0, total = 0, lines = 0;
  while (std::getline(want, wl)) {
    ASSERT_TRUE(std::getline(got, gl));
    ++lines;
    std::istringstream ws(wl), gs(gl);
    std::string wt, gt;
    while (ws >> wt) {
      ASSERT_TRUE(static_cast<bool>(gs >> gt));
      same += wt == gt;
      ++total;
    }
  }
  EXPECT_EQ(lines, 100);
  EXPECT_GE(same, 0.99 * total);
}

TEST_F(CliTest, PerturbEmptyInput) {
  const Result r = Run({"--embeddings", Path("toy.txt"), "--quiet", "perturb"}, "");
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "");
}

TEST_F(CliTest, PerturbOutOfVocabulary) {
  const Result r = Run({"--embeddings", Path("toy.txt"), "perturb"}, "a b\nc zzz\n");
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("zzz"), std::string::npos);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
  EXPECT_EQ(r.out, "");

  const Result skip = Run({"--embeddings", Path("far.txt"), "--quiet", "perturb",
                           "--skip-oov", "--epsilon", "1000"},
                          "a zzz\n");
  EXPECT_EQ(skip.code, kExitOk) << skip.err;
  EXPECT_EQ(skip.out, "a zzz\n");
}

TEST_F(CliTest, PerturbIsDeterministicPerSeed) {
  const std::string input = "a b c a b c a b c\n";
  auto run = [&](const std::string& seed) {
    return Run({"--embeddings", Path("toy.txt"), "--quiet", "--seed", seed,
                "perturb", "--epsilon", "0.5"},
               input)
        .out;
  };
  EXPECT_EQ(run("7"), run("7"));
}

TEST_F(CliTest, IoAndConfigErrors) {
  EXPECT_EQ(Run({"--embeddings", Path("missing.txt"), "perturb"}).code, kExitIo);
  Write("bad.txt", "a 0 0\nb 1\n");
  EXPECT_EQ(Run({"--embeddings", Path("bad.txt"), "perturb"}).code, kExitIo);
  EXPECT_EQ(Run({"--embeddings", Path("toy.txt"), "perturb", "--tau", "1"}).code,
            kExitConfig);
  EXPECT_EQ(Run({"--embeddings", Path("toy.txt"), "perturb", "--epsilon", "-1"}).code,
            kExitConfig);
  EXPECT_EQ(Run({"--embeddings", Path("toy.txt"), "nosuch"}).code, kExitConfig);
  EXPECT_EQ(Run({}).code, kExitConfig);
  EXPECT_EQ(Run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, ExitCodeMapping) {
  EXPECT_EQ(ExitCodeFor(absl::InvalidArgumentError("x")), kExitConfig);
  EXPECT_EQ(ExitCodeFor(absl::OutOfRangeError("x")), kExitConfig);
  EXPECT_EQ(ExitCodeFor(absl::NotFoundError("x")), kExitIo);
  EXPECT_EQ(ExitCodeFor(absl::DataLossError("x")), kExitIo);
  EXPECT_EQ(ExitCodeFor(absl::InternalError("x")), kExitInternal);
}

TEST_F(CliTest, MatrixRowsSumToOne) {
  const Result r = Run({"--embeddings", Path("toy.txt"), "--quiet", "matrix",
                        "--mechanism", "baseline", "--epsilon", "2", "--samples",
                        "1000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("# config="), std::string::npos);
  std::map<std::string, double> rows;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string from, to;
    double p;
    ASSERT_TRUE(static_cast<bool>(fields >> from >> to >> p)) << line;
    rows[from] += p;
  }
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& [word, sum] : rows) EXPECT_NEAR(sum, 1.0, 1e-12) << word;
}

TEST_F(CliTest, MatrixFileFeedsVerifyDp) {
  ASSERT_EQ(Run({"--embeddings", Path("toy.txt"), "--quiet", "--out", Path("m.tsv"),
                 "matrix", "--epsilon", "1", "--samples", "20000"})
                .code,
            kExitOk);
  const Result r = Run({"--embeddings", Path("toy.txt"), "--epsilon", "1", "verify-dp",
                        "--matrix", Path("m.tsv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["private_within_slack"], true);
  EXPECT_TRUE(j.contains("config"));

  Write("other.txt", "a 0 0\nb 3 4\nc 0 2\n");
  EXPECT_EQ(Run({"--embeddings", Path("other.txt"), "verify-dp", "--matrix",
                 Path("m.tsv")})
                .code,
            kExitConfig);
}

TEST_F(CliTest, SensitivityBetaZeroIsGlobal) {
  const Result r = Run({"--embeddings", Path("toy.txt"), "--beta", "0", "sensitivity"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(r.out);
  std::string line, global;
  std::vector<std::string> smooth;
  while (std::getline(in, line)) {
    if (line.rfind("#global ", 0) == 0) global = line.substr(8);
    if (line.empty() || line[0] == '#' || line.rfind("word\t", 0) == 0) continue;
    std::istringstream fields(line);
    std::string w, local, s;
    fields >> w >> local >> s;
    smooth.push_back(s);
  }
  ASSERT_EQ(smooth.size(), 3u);
  ASSERT_FALSE(global.empty());
  for (const std::string& s : smooth) EXPECT_EQ(s, global);
  EXPECT_DOUBLE_EQ(std::stod(global), std::sqrt(18.0));
}

TEST_F(CliTest, StatsReportEchoesConfig) {
  const Result r = Run({"--embeddings", Path("toy.txt"), "--epsilon", "2", "stats",
                        "--word", "a", "--trials", "500"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["mechanism"]["epsilon"], 2.0);
  EXPECT_EQ(j["config"]["seed"], 0);
  EXPECT_EQ(Run({"--embeddings", Path("toy.txt"), "stats", "--word", "zzz"}).code,
            kExitConfig);
}

TEST_F(CliTest, AttackRuns) {
  const Result r = Run({"--embeddings", Path("toy.txt"), "--epsilon", "4", "attack",
                        "--trials", "500", "--model-samples", "500"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_TRUE(j.contains("accuracy"));
  EXPECT_GE(j["accuracy"].get<double>(), 0.0);
  EXPECT_LE(j["accuracy"].get<double>(), 1.0);
}

TEST_F(CliTest, PipelineIsByteIdentical) {
  Write("lac.json", R"({
    "n_users": 40, "m_per_user": 3, "seed": 5,
    "mechanism": {"variant": "baseline", "epsilon": 1},
    "amplifiers": [{"kind": "subsample", "q": 0.7}, {"kind": "shuffle"}],
    "corpus": {"kind": "zipf", "s": 1.1}})");
  std::vector<std::string> reports;
  for (const char* workers : {"1", "2", "4", "1"}) {
    const std::string out = std::string("r") + workers + std::to_string(reports.size());
    const Result r = Run({"--embeddings", Path("toy.txt"), "--config", Path("lac.json"),
                          "--workers", workers, "--quiet", "--out", Path(out),
                          "pipeline", "--dump-released", Path(out + ".jsonl")});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    reports.push_back(ReadFile(out) + ReadFile(out + ".jsonl"));
  }
  for (const std::string& rep : reports) EXPECT_EQ(rep, reports[0]);
  const auto j = nlohmann::json::parse(ReadFile("r10"));
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_DOUBLE_EQ(j["amplified_epsilon"]["value"].get<double>(), 0.7);
}

TEST_F(CliTest, PipelineFlagsOverrideConfigAndFileCorpus) {
  Write("corpus.txt", "a b\nc a\n");
  const Result r = Run({"--embeddings", Path("toy.txt"), "--epsilon", "1000",
                        "pipeline", "--n-users", "2", "--m-per-user", "2",
                        "--corpus-file", Path("corpus.txt"), "--amplifier", "shuffle"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["n_users"], 2);
  EXPECT_EQ(j["true_histogram"]["a"], 2);
  EXPECT_EQ(j["utility_l1"], 0.0);
}

TEST_F(CliTest, FailedRunLeavesNoFiles) {
  Write("bad.json", R"({"n_users": 2, "m_per_user": 1,
    "mechanism": {"variant": "baseline", "epsilon": 1},
    "corpus": {"kind": "file", "path": "/nonexistent/corpus.txt"}})");
  const auto before = Leftovers();
  const Result r = Run({"--embeddings", Path("toy.txt"), "--config", Path("bad.json"),
                        "--out", Path("report.json"), "pipeline", "--dump-local",
                        Path("local.jsonl")});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_EQ(Leftovers().size(), before.size());
  EXPECT_FALSE(fs::exists(Path("report.json")));

  Write("oov.txt", "a zzz\n");
  const Result oov = Run({"--embeddings", Path("toy.txt"), "--out", Path("report.json"),
                          "pipeline", "--corpus-file", Path("oov.txt")});
  EXPECT_EQ(oov.code, kExitConfig);
  EXPECT_FALSE(fs::exists(Path("report.json")));
}

TEST_F(CliTest, IngestWritesLoadableCache) {
  ASSERT_EQ(Run({"--embeddings", Path("toy.txt"), "--out", Path("toy.bin"), "ingest"})
                .code,
            kExitOk);
  const Result a = Run({"--embeddings", Path("toy.txt"), "--beta", "1", "sensitivity"});
  const Result b = Run({"--embeddings", Path("toy.bin"), "--beta", "1", "sensitivity"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  // The config echo names the embeddings path, so compare the table only.
  auto table = [](const std::string& s) { return s.substr(s.find("word\t")); };
  EXPECT_EQ(table(a.out), table(b.out));
  EXPECT_EQ(Run({"--embeddings", Path("toy.txt"), "ingest"}).code, kExitConfig);
}

}  // namespace
}  // namespace dxtext::cli
