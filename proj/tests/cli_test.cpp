/*
 * Copyright 2026 The treecert Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace treecert {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("treecert_cli_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string write_model(const std::string& name, const Ensemble& e) {
    return write(name, save_model(e));
  }

  fs::path dir_;
};

Ensemble probability_forest() {
  return Ensemble({Tree::split(0, 0.5f, Tree::leaf({0.9f, 0.1f}), Tree::leaf({0.2f, 0.8f})),
                   Tree::split(0, 2.0f, Tree::leaf({0.5f, 0.5f}), Tree::leaf({0.0f, 1.0f}))},
                  1, 2, PostProcess::kDivideByTreeCount);
}

TEST_F(CliTest, EvalPrintsOutputsAndClass) {
  const auto model = write_model("two_trees.json", testing::two_tree_ensemble());
  const CliRun r = run({"eval", model, "7"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("output: 4"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("class: 0"), std::string::npos) << r.out;

  const CliRun j = run({"eval", model, "3", "--json"});
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["output"][0].get<float>(), 3.0f);
}

TEST_F(CliTest, InputErrorsExitWithTwo) {
  const auto bad = write("bad.json", "{\"nb_inputs\": 1,");
  const CliRun malformed = run({"eval", bad, "0"});
  EXPECT_EQ(malformed.code, cli::kExitError);
  EXPECT_NE(malformed.err.find("error:"), std::string::npos);

  const auto model = write_model("two_trees.json", testing::two_tree_ensemble());
  EXPECT_EQ(run({"eval", model, "1,2"}).code, cli::kExitError);
  EXPECT_EQ(run({"eval", model, "x"}).code, cli::kExitError);
  EXPECT_EQ(run({"eval", (dir_ / "missing.json").string(), "0"}).code, cli::kExitError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitError);
  EXPECT_EQ(run({}).code, cli::kExitError);
}

TEST_F(CliTest, CheckRangePassesApproximatelyOnProbabilities) {
  const auto model = write_model("rf.json", probability_forest());
  const CliRun r = run({"check-range", model});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("verdict: PASS"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("method: approximate"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("classes_visited: 0"), std::string::npos) << r.out;
}

TEST_F(CliTest, CheckRangeReportsViolations) {
  const auto model = write_model("two_trees.json", testing::two_tree_ensemble());
  const CliRun r = run({"check-range", model, "--alpha", "0", "--beta", "3"});
  EXPECT_EQ(r.code, cli::kExitViolated) << r.err;
  EXPECT_NE(r.out.find("verdict: FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("method: exact"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("counterexample region: [5.0000005, inf]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("counterexample output: 4"), std::string::npos) << r.out;

  EXPECT_EQ(run({"check-range", model, "--alpha", "1", "--beta", "0"}).code, cli::kExitError);
  EXPECT_EQ(run({"check-range", model, "--strategy", "sideways"}).code, cli::kExitError);
  EXPECT_EQ(run({"check-range", model, "--beta", "4", "--domain", "0:1,0:1"}).code,
            cli::kExitError);
  // Restricting the domain removes the violating class.
  EXPECT_EQ(run({"check-range", model, "--beta", "3", "--domain", "-10:5"}).code, cli::kExitOk);
}

TEST_F(CliTest, JsonReportCarriesEveryHumanField) {
  const auto model = write_model("two_trees.json", testing::two_tree_ensemble());
  const CliRun human = run({"check-range", model, "--beta", "3", "--strategy", "left"});
  const CliRun machine = run({"check-range", model, "--beta", "3", "--strategy", "left", "--json"});
  ASSERT_EQ(machine.code, cli::kExitViolated);
  const auto doc = nlohmann::json::parse(machine.out);
  EXPECT_EQ(doc["verdict"], "FAIL");
  EXPECT_EQ(doc["method"], "exact");
  EXPECT_TRUE(doc["classes_visited"].is_number_unsigned());
  EXPECT_TRUE(doc["elapsed_seconds"].is_number());
  EXPECT_EQ(doc["counterexample"]["region"], "[5.0000005, inf]");
  EXPECT_EQ(doc["counterexample"]["output"], "4");
  // Each "key: value" line of the human report has a JSON counterpart.
  const std::pair<const char*, const char*> fields[] = {
      {"verdict:", "verdict"},
      {"method:", "method"},
      {"classes_visited:", "classes_visited"},
      {"elapsed:", "elapsed_seconds"},
  };
  for (auto [line, key] : fields) {
    EXPECT_NE(human.out.find(line), std::string::npos) << line;
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  const std::string classes_line =
      "classes_visited: " + std::to_string(doc["classes_visited"].get<std::uint64_t>());
  EXPECT_NE(human.out.find(classes_line), std::string::npos) << human.out;
}

TEST_F(CliTest, CheckRobustnessSummarisesTheTestSet) {
  const auto model = write_model("stump.json", testing::stump_classifier());
  const auto csv = write("test.csv", "x,label\n5,1\n0.5,1\n");
  const CliRun r = run({"check-robustness", model, "--testset", csv, "--epsilon", "1"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("robustness: 50.0% (1/2)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("failures: 1"), std::string::npos) << r.out;

  const CliRun j = run({"check-robustness", model, "--testset", csv, "--epsilon", "1", "--jobs",
                     "2", "--json"});
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["robust"], 1);
  EXPECT_EQ(doc["total"], 2);
  EXPECT_EQ(doc["robustness_percent"].get<double>(), 50.0);
}

TEST_F(CliTest, CheckRobustnessValidatesWindowFlags) {
  const auto model = write_model("stump.json", testing::stump_classifier());
  const auto csv = write("test.csv", "5,1\n");
  EXPECT_EQ(run({"check-robustness", model, "--testset", csv, "--epsilon", "1", "--window",
                 "1,1,1"})
                .code,
            cli::kExitError);
  EXPECT_EQ(run({"check-robustness", model, "--testset", csv, "--epsilon", "1", "--window",
                 "1,1,1", "--image-dims", "1,1"})
                .code,
            cli::kExitOk);
  EXPECT_EQ(run({"check-robustness", model, "--testset", csv}).code, cli::kExitError);
  const auto ragged = write("ragged.csv", "5,1\n5\n");
  const CliRun r = run({"check-robustness", model, "--testset", ragged, "--epsilon", "1"});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("row 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, CountClassesReferenceModels) {
  const auto two = write_model("two_trees.json", testing::two_tree_ensemble());
  const CliRun r = run({"count-classes", two});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("classes: 3"), std::string::npos) << r.out;

  const auto single =
      write_model("single.json", Ensemble({testing::two_leaf_tree()}, 1, 1, PostProcess::kIdentity));
  EXPECT_NE(run({"count-classes", single}).out.find("classes: 2"), std::string::npos);

  const auto twins = write_model(
      "twins.json", Ensemble({testing::two_leaf_tree(), testing::two_leaf_tree()}, 1, 1,
                             PostProcess::kIdentity));
  EXPECT_NE(run({"count-classes", twins}).out.find("classes: 2"), std::string::npos);

  const auto doc = nlohmann::json::parse(run({"count-classes", two, "--json"}).out);
  EXPECT_EQ(doc["classes"], 3);
}

}  // namespace
}  // namespace treecert
