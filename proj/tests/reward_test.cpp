#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "cexgen/errors.hpp"
#include "cexgen/fraction.hpp"
#include "cexgen/reward.hpp"

using namespace cexgen;

TEST(Fraction, ParsesDecimalsExactly) {
  EXPECT_EQ(Fraction::parse("0.8"), Fraction(4, 5));
  EXPECT_EQ(Fraction::parse("4/5"), Fraction(4, 5));
  EXPECT_EQ(Fraction::parse("-0.25"), Fraction(-1, 4));
  EXPECT_EQ(Fraction::parse("1"), Fraction(1));
  EXPECT_EQ(Fraction(6, -8), Fraction(-3, 4));
  EXPECT_EQ(Fraction(4, 5).str(), "4/5");
  EXPECT_THROW(Fraction::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Fraction(1, 0), std::domain_error);
}

TEST(Fraction, ArithmeticAndOrdering) {
  EXPECT_EQ(Fraction(1) - Fraction(4, 5), Fraction(1, 5));
  EXPECT_EQ(Fraction(2, 3) * Fraction(3, 4), Fraction(1, 2));
  EXPECT_EQ(Fraction(1, 2) / Fraction(1, 4), Fraction(2));
  EXPECT_LT(Fraction(1, 5), Fraction(4, 5));
  EXPECT_THROW(Fraction(INT64_MAX) + Fraction(1), std::overflow_error);
}

TEST(Reward, TableForEveryOutcome) {
  for (const char* a : {"0", "0.5", "0.8", "1"}) {
    const auto cfg = make_reward_config(Fraction::parse(a));
    const Fraction al = cfg.alpha, one(1);
    EXPECT_EQ(compute_reward(false, false, cfg).r, Fraction(0)) << a;
    EXPECT_EQ(compute_reward(false, true, cfg).r, one - al) << a;
    EXPECT_EQ(compute_reward(true, false, cfg).r, al) << a;
    EXPECT_EQ(compute_reward(true, true, cfg).r, one) << a;
    const auto rec = compute_reward(true, true, cfg, "p");
    EXPECT_EQ(rec.r_M, al);
    EXPECT_EQ(rec.r_H, one - al);
    EXPECT_EQ(rec.problem_id, "p");
  }
}

TEST(Reward, AlphaOutOfRange) {
  EXPECT_THROW(make_reward_config(Fraction(-1, 10)), ConfigError);
  EXPECT_THROW(make_reward_config(Fraction(11, 10)), ConfigError);
}

namespace {

Candidate candidate(const std::string& id) {
  return Candidate{id, "theorem m : ∃ x : ℤ, x = 1 :=", "theorem d : ∃ x : ℤ, x ≠ 1 :=", "1", "x = 1 works",
                   "by\n  use 1", "by\n  use 1"};
}

}  // namespace

TEST(Reward, CounterexampleDatasetKeepsZeroWeights) {
  const auto cfg = make_reward_config(Fraction(4, 5));
  const std::vector<Candidate> cs{candidate("a"), candidate("b")};
  const std::vector<RewardRecord> rs{compute_reward(true, false, cfg, "a"), compute_reward(false, false, cfg, "b")};
  const auto ex = build_counterexample_sft(cs, rs, cfg);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].weight, Fraction(4, 5));
  EXPECT_FALSE(ex[0].zero_weight);
  EXPECT_EQ(ex[1].weight, Fraction(0));
  EXPECT_TRUE(ex[1].zero_weight);
  EXPECT_EQ(ex[0].kind, ExampleKind::Counterexample);
}

TEST(Reward, ProofDatasetHasOneRowPerVerifiedProof) {
  const auto cfg = make_reward_config(Fraction(4, 5));
  const std::vector<Candidate> cs{candidate("a"), candidate("b"), candidate("c")};
  const std::vector<RewardRecord> rs{compute_reward(true, true, cfg, "a"), compute_reward(false, true, cfg, "b"),
                                     compute_reward(false, false, cfg, "c")};
  const auto ex = build_proof_sft(cs, rs, cfg);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].weight, Fraction(4, 5));
  EXPECT_EQ(ex[1].weight, Fraction(1, 5));
  EXPECT_EQ(ex[2].weight, Fraction(1, 5));
  for (const auto& e : ex) EXPECT_EQ(e.kind, ExampleKind::Proof);
}

TEST(Reward, SingleRewardZeroesHypothesisProofs) {
  const auto cfg = make_reward_config(Fraction(1));
  const std::vector<Candidate> cs{candidate("a")};
  const std::vector<RewardRecord> rs{compute_reward(true, true, cfg, "a")};
  const auto ex = build_proof_sft(cs, rs, cfg);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].weight, Fraction(1));
  EXPECT_TRUE(ex[1].zero_weight);
}

TEST(Reward, MismatchedInputsRejected) {
  const auto cfg = make_reward_config(Fraction(4, 5));
  EXPECT_THROW(build_counterexample_sft({candidate("a")}, {}, cfg), Error);
}

TEST(Reward, ExampleJson) {
  const auto cfg = make_reward_config(Fraction(4, 5));
  const auto ex = build_counterexample_sft({candidate("a")}, {compute_reward(true, true, cfg, "a")}, cfg);
  const auto j = to_json(ex[0]);
  EXPECT_EQ(j["weight"], 1.0);
  EXPECT_EQ(j["kind"], "counterexample-sft");
  EXPECT_EQ(j["alpha"], 0.8);
  EXPECT_EQ(j["provenance"]["weight_exact"], "1");
}
