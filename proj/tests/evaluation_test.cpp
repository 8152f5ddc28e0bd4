#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "cexgen/errors.hpp"
#include "cexgen/evaluation.hpp"
#include "cexgen/lean_surface.hpp"
#include "test_support.hpp"

using namespace cexgen;

namespace {

// Fraction of k-subsets of n attempts (the first c successful) holding a success.
Fraction brute_force_pass(int n, int c, int k) {
  std::int64_t hit = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    ++total;
    hit += (mask & ((1u << c) - 1)) != 0;
  }
  return Fraction(hit, total);
}

class FailingClient : public GeneratorClient {
 public:
  std::vector<std::string> complete(const std::string&, Role, const std::string&, int, const GeneratorConfig&,
                                    std::uint64_t) override {
    throw EndpointUnavailable("down");
  }
};

}  // namespace

TEST(PassAtK, MatchesSubsetEnumeration) {
  for (int n = 1; n <= 9; ++n)
    for (int c = 0; c <= n; ++c)
      for (int k = 1; k <= n; ++k) {
        const Fraction expected = brute_force_pass(n, c, k);
        EXPECT_EQ(pass_at_k_exact(n, c, k), expected) << n << " " << c << " " << k;
        EXPECT_NEAR(pass_at_k(n, c, k), expected.to_double(), 1e-12);
      }
}

TEST(PassAtK, RejectsBadArguments) {
  EXPECT_THROW(pass_at_k(3, 1, 4), std::invalid_argument);
  EXPECT_THROW(pass_at_k(3, 4, 1), std::invalid_argument);
  EXPECT_THROW(pass_at_k_exact(3, 0, 0), std::invalid_argument);
}

TEST(PassAtK, LargeExactValues) {
  EXPECT_EQ(pass_at_k_exact(60, 0, 30), Fraction(0));
  EXPECT_EQ(pass_at_k_exact(60, 60, 30), Fraction(1));
  EXPECT_EQ(pass_at_k_exact(10, 1, 1), Fraction(1, 10));
}

TEST(Summaries, CapsKAtAvailableAttempts) {
  std::vector<ProblemAttempts> ps(2);
  ps[0].id = "a";
  ps[0].outcomes = {false, true};
  ps[1].id = "b";
  const auto rep = summarize_attempts(ps, {1, 9}, 3);
  ASSERT_EQ(rep.per_k.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.per_k[0].mean_pass, 0.25);
  EXPECT_DOUBLE_EQ(rep.per_k[1].mean_pass, 0.5);
  EXPECT_EQ(rep.per_k[1].solved, 1u);
  EXPECT_LE(rep.per_k[0].solved, 1u);
  EXPECT_EQ(rep.to_csv(), "k,solved,mean_pass\n1," + std::to_string(rep.per_k[0].solved) + ",0.250000\n9,1,0.500000\n");
}

TEST(Summaries, SeededSubsetIsReproducible) {
  std::vector<ProblemAttempts> ps(20);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].id = "p" + std::to_string(i);
    ps[i].outcomes = {false, false, true, false, false, false, false, false, false};
  }
  const auto a = summarize_attempts(ps, {1}, 11);
  const auto b = summarize_attempts(ps, {1}, 11);
  EXPECT_EQ(a.per_k[0].solved, b.per_k[0].solved);
  EXPECT_NEAR(a.per_k[0].mean_pass, 1.0 / 9, 1e-12);
}

TEST(Benchmark, MockAndToyChecker) {
  MockClient proposer, prover;
  proposer.add("*", Role::Proposer, "\\boxed{0}");
  proposer.add("*", Role::Proposer, "no idea");
  prover.add("*", Role::Prover, "```lean4\n{statement}\n  use {witness}\n  norm_num\n```");
  const std::vector<ExistentialProblem> ps{parse_problem("theorem a : ∃ n : ℕ, ¬ (n ≥ 1) := by sorry"),
                                           parse_problem("theorem b : ∃ n : ℕ, n = 5 := by sorry")};
  ToyBackend toy;
  EvalConfig cfg;
  cfg.seed = 4;
  const auto rep = evaluate_benchmark(ps, proposer, prover, toy, cfg);
  ASSERT_EQ(rep.problems.size(), 2u);
  for (const auto& p : rep.problems) {
    EXPECT_EQ(p.n(), 9);
    EXPECT_EQ(p.lost, 0u);
  }
  EXPECT_GT(rep.problems[0].c(), 0);
  EXPECT_EQ(rep.problems[1].c(), 0);
  EXPECT_EQ(rep.to_json()["total"], 2);
}

TEST(Benchmark, UnavailableGeneratorLosesAttempts) {
  FailingClient down;
  MockClient prover;
  ToyBackend toy;
  const auto rep = evaluate_benchmark({parse_problem("theorem a : ∃ n : ℕ, n = 1 := by sorry")}, down, prover, toy, {});
  EXPECT_EQ(rep.problems[0].n(), 0);
  EXPECT_EQ(rep.problems[0].lost, 9u);
  EXPECT_DOUBLE_EQ(rep.per_k[0].mean_pass, 0.0);
}

TEST(Curves, CsvAndSvg) {
  const std::vector<CurvePoint> pts{{1, 0.1, 0.2, 0.3}, {2, 0.2, 0.4, 0.5}};
  EXPECT_EQ(curves_csv(pts), "iteration,pass1,pass4,pass9\n1,0.100000,0.200000,0.300000\n2,0.200000,0.400000,0.500000\n");
  const auto svg = curves_svg({{"run", pts}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto dir = fixtures::scratch_dir("curves");
  emit_curves(pts, dir / "c");
  EXPECT_TRUE(std::filesystem::exists(dir / "c.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "c.svg"));
  EXPECT_THROW(emit_curves({}, dir / "e"), std::invalid_argument);
}
