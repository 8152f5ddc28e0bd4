#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

using namespace cexgen::fixtures;

namespace {

CommandResult cli(const std::string& args) {
  return run_command(std::string(CEXGEN_CLI) + " --log-level off " + args + " 2>/dev/null");
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(cli("--help").exit_code, 0);
  EXPECT_EQ(cli("").exit_code, 2);
  EXPECT_EQ(cli("frobnicate").exit_code, 2);
}

TEST(Cli, MutateWritesRecordsAndManifest) {
  const auto dir = scratch_dir("cli-mutate");
  const auto r = cli("--run-dir " + q(dir) + " mutate --in " + q(data_dir() / "mini_corpus.lean") + " --out " +
                     q(dir / "m.jsonl") + " --form impl");
  ASSERT_EQ(r.exit_code, 0);
  const auto manifest = nlohmann::json::parse(read_file(dir / "mutate.manifest.json"));
  EXPECT_EQ(manifest["command"], "mutate");
  EXPECT_FALSE(manifest.contains("timestamp"));
  EXPECT_TRUE(std::filesystem::exists(dir / "m.lean"));
  const auto first_line = read_file(dir / "m.jsonl").substr(0, read_file(dir / "m.jsonl").find('\n'));
  const auto rec = nlohmann::json::parse(first_line);
  EXPECT_EQ(rec["mutated_lean"], "theorem original_version_mut_drop0 : ∃ x : X, H₂ x → C x := by sorry");
}

TEST(Cli, ExtractWritesTheorems) {
  const auto dir = scratch_dir("cli-extract");
  ASSERT_EQ(cli("--run-dir " + q(dir) + " extract --in " + q(data_dir() / "mini_corpus.lean") + " --out " +
                q(dir / "e.jsonl"))
                .exit_code,
            0);
  EXPECT_NE(read_file(dir / "e.jsonl").find("aimeII_2001_p3_g4_extracted_54_g1_extracted_1"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "extract.manifest.json"));
}

TEST(Cli, CheckUsesToyChecker) {
  const auto dir = scratch_dir("cli-check");
  const auto r = cli("--run-dir " + q(dir) + " check --statement 'theorem t : ∃ x : ℤ, x * 3 = 12 :=' --proof 'by use 4'");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.output)["status"], "verified");
  const auto bad = cli("--run-dir " + q(dir) + " --strict check --statement 'theorem t : ∃ x : ℤ, x * 3 = 12 :=' --proof 'by use 5'");
  EXPECT_EQ(nlohmann::json::parse(bad.output)["status"], "failed");
  EXPECT_EQ(bad.exit_code, 1);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch_dir("cli-config");
  write_file(dir / "c.json", R"({"alpha": "0.8", "mystery": 1})");
  EXPECT_EQ(cli("--run-dir " + q(dir) + " --config " + q(dir / "c.json") + " simulate --no-plot").exit_code, 2);
  EXPECT_EQ(cli("--run-dir " + q(dir) + " simulate --alpha 1.5").exit_code, 2);
  EXPECT_EQ(cli("--run-dir " + q(dir) + " iterate --mock " + q(data_dir() / "toy" / "mock.jsonl") + " --dataset " +
                q(data_dir() / "toy" / "problems.jsonl") + " --holdout 100")
                .exit_code,
            2);
}

TEST(Cli, SimulateWritesCurves) {
  const auto dir = scratch_dir("cli-sim");
  ASSERT_EQ(cli("--run-dir " + q(dir) + " simulate --iterations 10").exit_code, 0);
  const auto csv = read_file(dir / "curves.csv");
  EXPECT_EQ(csv.rfind("iteration,pass1,pass4,pass9\n", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "curves.svg"));
  EXPECT_TRUE(std::filesystem::exists(dir / "simulate.manifest.json"));
}

TEST(Cli, CompareWritesSummary) {
  const auto dir = scratch_dir("cli-compare");
  ASSERT_EQ(cli("--run-dir " + q(dir) + " simulate --compare multi:0.8 single:1 --runs 3 --iterations 10 --no-plot")
                .exit_code,
            0);
  const auto j = nlohmann::json::parse(read_file(dir / "comparison.json"));
  EXPECT_EQ(j["runs"], 3);
  EXPECT_TRUE(std::filesystem::exists(dir / "curves_multi.csv"));
}

TEST(Cli, EvaluateWithMock) {
  const auto dir = scratch_dir("cli-eval");
  ASSERT_EQ(cli("--run-dir " + q(dir) + " evaluate --mock " + q(data_dir() / "toy" / "mock.jsonl") + " --problems " +
                q(data_dir() / "toy" / "problems.jsonl"))
                .exit_code,
            0);
  const auto j = nlohmann::json::parse(read_file(dir / "evaluation.json"));
  EXPECT_EQ(j["total"], 100);
  EXPECT_EQ(read_file(dir / "evaluation.csv").rfind("k,solved,mean_pass\n", 0), 0u);
}
