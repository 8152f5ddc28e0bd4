#include <gtest/gtest.h>

#include <atomic>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cexgen/errors.hpp"
#include "cexgen/lean_surface.hpp"
#include "cexgen/mutation.hpp"
#include "cexgen/rng.hpp"
#include "cexgen/verification.hpp"
#include "test_support.hpp"

using namespace cexgen;

namespace {

// Euclidean division as Lean defines it on ℤ: the remainder is never negative.
std::int64_t ediv(std::int64_t a, std::int64_t b) {
  if (b == 0) return 0;
  std::int64_t q = a / b, r = a % b;
  if (r < 0) q += b > 0 ? -1 : 1;
  return q;
}
std::int64_t emod(std::int64_t a, std::int64_t b) { return b == 0 ? a : a - b * ediv(a, b); }

struct Case {
  std::string text;
  bool expected;
};

// Random problem `∃ x : ℤ, a * x + b ≤ c ∧ x % m = r ∨ ¬ (x / d = e)` evaluated
// natively at witness w.
Case random_case(Rng& rng) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); };
  const int a = pick(-5, 5), b = pick(-20, 20), c = pick(-20, 20), m = pick(1, 6), r = pick(0, 5),
            d = pick(-4, 4), e = pick(-5, 5), w = pick(-12, 12);
  const bool lhs = static_cast<std::int64_t>(a) * w + b <= c && emod(w, m) == r;
  const bool rhs = !(ediv(w, d) == e);
  auto lit = [](int v) { return v < 0 ? fmt::format("({})", v) : fmt::to_string(v); };
  const std::string text = fmt::format("{} * x + {} ≤ {} ∧ x % {} = {} ∨ ¬ (x / {} = {})", lit(a), lit(b), lit(c), m,
                                       r, lit(d), e);
  return {fmt::format("theorem rnd : ∃ x : ℤ, {} := by sorry|{}", text, w), lhs || rhs};
}

ProofJob job(const std::string& id, const std::string& statement, const std::string& proof, double timeout = 5) {
  return ProofJob{id, statement, proof, ResourceLimits{timeout, 1ull << 30}};
}

std::string fake(const std::string& args = "") { return std::string(CEXGEN_FAKE_CHECKER) + " " + args; }

class CountingBackend : public Backend {
 public:
  VerificationResult check(const ProofJob& j) override {
    ++calls;
    return VerificationResult{j.id, VerifyStatus::Verified, {}, 0.0, false};
  }
  std::string name() const override { return "counting"; }
  std::atomic<int> calls{0};
};

}  // namespace

TEST(ToyChecker, AgreesWithNativeEvaluation) {
  Rng rng(42);
  for (int i = 0; i < 400; ++i) {
    const auto c = random_case(rng);
    const auto bar = c.text.rfind('|');
    const auto problem = parse_problem(c.text.substr(0, bar));
    const auto r = toy_check(problem, parse_witness(c.text.substr(bar + 1)));
    EXPECT_EQ(r.verified(), c.expected) << c.text;
  }
}

TEST(ToyChecker, NaturalNumberSemantics) {
  const auto p = parse_problem("theorem t : ∃ n : ℕ, n - 5 = 0 ∧ 2 ≤ n := by sorry");
  EXPECT_TRUE(toy_check(p, parse_witness("3")).verified());
  EXPECT_FALSE(toy_check(p, parse_witness("1")).verified());
  EXPECT_FALSE(toy_check(p, parse_witness("-1")).verified());
}

TEST(ToyChecker, BoundedQuantifiersAndFunctions) {
  const auto p = parse_problem("theorem t : ∃ k : ℤ, ∀ n ≤ 3, n * n ≤ k := by sorry");
  EXPECT_TRUE(toy_check(p, parse_witness("9")).verified());
  EXPECT_FALSE(toy_check(p, parse_witness("8")).verified());
  const auto fn = parse_problem("theorem t : ∃ (x : ℕ → ℤ), x 1 = 0 := by sorry");
  EXPECT_THROW(toy_check(fn, parse_witness("0")), OutsideFragment);
}

TEST(ToyChecker, OverflowIsOutsideFragment) {
  const auto p = parse_problem("theorem t : ∃ x : ℤ, x * x * x * x > 0 := by sorry");
  EXPECT_THROW(toy_check(p, parse_witness("4000000000")), OutsideFragment);
}

TEST(ToyChecker, WitnessParsing) {
  EXPECT_EQ(parse_witness("⟨2, -3⟩").positional, (std::vector<std::string>{"2", "-3"}));
  EXPECT_EQ(parse_witness("n=0, m=-1").named.at("m"), "-1");
  EXPECT_THROW(parse_witness("  "), OutsideFragment);
  EXPECT_EQ(witness_from_proof("by\n  use 3, 4\n  norm_num", 2), "3, 4");
  EXPECT_EQ(witness_from_proof("by exact ⟨5, by norm_num⟩", 1), "5");
}

TEST(ToyChecker, BackendReadsStatementAndProof) {
  ToyBackend b;
  const std::string st = "theorem t : ∃ x : ℤ, x + 2 = 5 :=";
  EXPECT_TRUE(b.check(job("a", st, "by\n  use 3\n  norm_num")).verified());
  EXPECT_FALSE(b.check(job("b", st, "by\n  use 4\n  norm_num")).verified());
  EXPECT_FALSE(check_proof(job("c", st, "by\n  use 3\n  sorry"), b).verified());
}

TEST(CheckProof, SorryIsNeverVerified) {
  SubprocessBackend b(fake());
  const auto r = check_proof(job("j", "theorem t : True :=", "by sorry"), b);
  EXPECT_FALSE(r.verified());
  EXPECT_TRUE(r.contains_sorry);
  EXPECT_TRUE(proof_contains_sorry("by\n  admit"));
  EXPECT_FALSE(proof_contains_sorry("by\n  -- sorry\n  simp"));
}

TEST(Subprocess, VerifiesAndFails) {
  SubprocessBackend b(fake());
  EXPECT_EQ(check_proof(job("1", "theorem t : True :=", "trivial"), b).status, VerifyStatus::Verified);
  const auto r = check_proof(job("2", "theorem t : True :=", "fails"), b);
  EXPECT_EQ(r.status, VerifyStatus::Failed);
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics.back().text, "tactic failed");
}

TEST(Subprocess, TimeoutKillsAndRespawns) {
  SubprocessBackend slow(fake("--delay-ms 2000"));
  const auto r = check_proof(job("t", "theorem t : True :=", "trivial", 0.2), slow);
  EXPECT_EQ(r.status, VerifyStatus::Timeout);
  EXPECT_TRUE(r.infrastructure_failure());
}

TEST(Subprocess, GarbageIsProtocolError) {
  SubprocessBackend b(fake("--garbage"));
  EXPECT_EQ(check_proof(job("g", "theorem t : True :=", "trivial"), b).status, VerifyStatus::ProtocolError);
}

TEST(Subprocess, DeadWorkerIsProtocolError) {
  SubprocessBackend b(fake("--die"));
  EXPECT_EQ(check_proof(job("d", "theorem t : True :=", "trivial"), b).status, VerifyStatus::ProtocolError);
  EXPECT_EQ(check_proof(job("e", "theorem t : True :=", "trivial"), b).status, VerifyStatus::ProtocolError);
}

TEST(Subprocess, ParallelWorkers) {
  SubprocessBackend b(fake("--delay-ms 50"), ProcessOptions{4, 0.25});
  std::vector<ProofJob> jobs;
  for (int i = 0; i < 8; ++i) jobs.push_back(job(fmt::format("{:02}", i), "theorem t : True :=", "trivial"));
  const auto rs = run_batch(jobs, b, BatchOptions{4, std::nullopt, {}});
  ASSERT_EQ(rs.size(), 8u);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(rs[i].id, jobs[i].id);
    EXPECT_TRUE(rs[i].verified());
  }
}

TEST(CheckerOracle, UnusedDiagnosticsBecomeIndices) {
  SubprocessBackend b(fake("--unused h₁"));
  CheckerOracle o(b);
  const auto t = parse_theorem("theorem t (a : ℕ) (h₀ : 0 < a) (h₁ : a < 9) : a ≠ 0 := by omega");
  EXPECT_EQ(o.unused(t), (std::set<std::size_t>{1}));
  EXPECT_THROW(o.unused(parse_theorem("theorem t (a : ℕ) (h₀ : 0 < a) : a ≠ 0 := by sorry")), OracleUnavailable);
}

TEST(CheckerOracle, FailingProofIsUnavailable) {
  SubprocessBackend b(fake());
  CheckerOracle o(b);
  EXPECT_THROW(o.unused(parse_theorem("theorem t (a : ℕ) (h₀ : 0 < a) : a ≠ 0 := by fails")), OracleUnavailable);
}

TEST(RunBatch, CheckpointIsReused) {
  const auto dir = fixtures::scratch_dir("batch");
  std::vector<ProofJob> jobs;
  for (int i = 0; i < 5; ++i) jobs.push_back(job(fmt::format("j{}", i), "theorem t : True :=", "trivial"));
  CountingBackend first;
  const auto a = run_batch(jobs, first, BatchOptions{2, dir / "ck.jsonl", {}});
  EXPECT_EQ(first.calls, 5);
  CountingBackend second;
  const auto b = run_batch(jobs, second, BatchOptions{2, dir / "ck.jsonl", {}});
  EXPECT_EQ(second.calls, 0);
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_json(a[i]).dump(), to_json(b[i]).dump());
}

TEST(RunBatch, InterruptLeavesCheckpoint) {
  const auto dir = fixtures::scratch_dir("interrupt");
  std::vector<ProofJob> jobs;
  for (int i = 0; i < 6; ++i) jobs.push_back(job(fmt::format("j{}", i), "theorem t : True :=", "trivial"));
  CountingBackend b;
  int seen = 0;
  BatchOptions opts{1, dir / "ck.jsonl", [&](const VerificationResult&) {
                      if (++seen == 2) throw BatchInterrupted("stop");
                    }};
  EXPECT_THROW(run_batch(jobs, b, opts), BatchInterrupted);
  CountingBackend again;
  run_batch(jobs, again, BatchOptions{1, dir / "ck.jsonl", {}});
  EXPECT_EQ(again.calls, 4);
}

TEST(RunBatch, DuplicateIdsRejected) {
  CountingBackend b;
  EXPECT_THROW(run_batch({job("x", "s", "p"), job("x", "s", "p")}, b, {}), ConfigError);
}

TEST(VerificationResult, JsonRoundTrip) {
  VerificationResult r{"id", VerifyStatus::ResourceExhausted, {{"error", "out of memory"}}, 1.5, false};
  const auto back = result_from_json(to_json(r));
  EXPECT_EQ(back.status, r.status);
  EXPECT_EQ(back.diagnostics, r.diagnostics);
  EXPECT_EQ(parse_verify_status("protocol-error"), VerifyStatus::ProtocolError);
}
