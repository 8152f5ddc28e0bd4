#include <gtest/gtest.h>

#include "cexgen/errors.hpp"
#include "cexgen/simulator.hpp"

using namespace cexgen;

namespace {

SimConfig small(Fraction alpha, std::uint64_t seed = 3) {
  SimConfig c;
  c.n_train = 400;
  c.n_eval = 100;
  c.iterations = 20;
  c.batch = 100;
  c.alpha = alpha;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Simulator, Deterministic) {
  const auto a = simulate(small(Fraction(4, 5)));
  const auto b = simulate(small(Fraction(4, 5)));
  ASSERT_EQ(a.iterations.size(), 20u);
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    EXPECT_EQ(a.iterations[i].skill, b.iterations[i].skill);
    EXPECT_EQ(a.iterations[i].eval.pass1, b.iterations[i].eval.pass1);
  }
}

TEST(Simulator, ZeroLearningRateGivesFlatCurves) {
  auto c = small(Fraction(4, 5));
  c.eta = 0;
  const auto run = simulate(c);
  for (const auto& it : run.iterations) {
    EXPECT_EQ(it.skill, 0.0);
    EXPECT_EQ(it.eval.pass1, run.iterations.front().eval.pass1);
    EXPECT_EQ(it.eval.pass9, run.iterations.front().eval.pass9);
  }
}

TEST(Simulator, CurvesAreMonotoneUnderPositiveRewards) {
  const auto run = simulate(small(Fraction(4, 5)));
  for (std::size_t i = 1; i < run.iterations.size(); ++i) {
    EXPECT_GE(run.iterations[i].skill, run.iterations[i - 1].skill);
    EXPECT_GE(run.iterations[i].eval.pass1, run.iterations[i - 1].eval.pass1);
    EXPECT_GE(run.iterations[i].eval.pass9, run.iterations[i].eval.pass4);
    EXPECT_GE(run.iterations[i].eval.pass4, run.iterations[i].eval.pass1);
  }
}

TEST(Simulator, SettingsShareDraws) {
  auto zero = small(Fraction(0));
  zero.eta = 0;
  auto one = small(Fraction(1));
  one.eta = 0;
  // With no learning, evaluation depends only on shared problem and eval draws.
  EXPECT_EQ(simulate(zero).final_pass1(), simulate(one).final_pass1());
}

TEST(Simulator, IterationsToNinetyPercent) {
  SimRun run;
  for (std::size_t i = 1; i <= 5; ++i) {
    SimIteration it;
    it.eval.iteration = i;
    it.eval.pass1 = 0.2 * static_cast<double>(i);
    run.iterations.push_back(it);
  }
  EXPECT_EQ(run.iterations_to_90(), 5u);
  run.iterations[3].eval.pass1 = 0.95;
  EXPECT_EQ(run.iterations_to_90(), 4u);
}

TEST(Simulator, CompareIsThreadIndependent) {
  const auto a = compare_settings(small(Fraction(4, 5)), small(Fraction(1)), 4, 1);
  const auto b = compare_settings(small(Fraction(4, 5)), small(Fraction(1)), 4, 3);
  EXPECT_EQ(a.to_json("m", "s"), b.to_json("m", "s"));
  EXPECT_EQ(a.strict_wins_a + a.ties <= a.runs, true);
  EXPECT_NE(a.curves_csv("m", "s").find("run,setting,iteration,pass1,pass4,pass9\n0,m,1,"), std::string::npos);
}

TEST(Simulator, ConfigValidation) {
  EXPECT_THROW(sim_config_from_json({{"alpha", "2"}}), ConfigError);
  EXPECT_THROW(sim_config_from_json({{"eta", -1}}), ConfigError);
  EXPECT_THROW(sim_config_from_json({{"attempts", 4}}), ConfigError);
  EXPECT_THROW(sim_config_from_json({{"schedule", "linear"}}), ConfigError);
  const auto c = sim_config_from_json({{"alpha", 0.5}, {"d_M", {{"mean", 1}}}});
  EXPECT_EQ(c.alpha, Fraction(1, 2));
  EXPECT_EQ(c.d_M.mean, 1.0);
  EXPECT_EQ(c.d_M.sd, 2.5);
  EXPECT_EQ(sim_config_from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_THROW(compare_settings(c, c, 0), ConfigError);
}
