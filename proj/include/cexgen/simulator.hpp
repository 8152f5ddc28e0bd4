#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cexgen/evaluation.hpp"
#include "cexgen/fraction.hpp"

namespace cexgen {

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};

enum class Schedule { Constant, Cosine };

// A one-parameter learner: P(success at difficulty d) = 1 / (1 + e^{-(s - d)}).
struct SimConfig {
  std::size_t n_train = 2000;
  std::size_t n_eval = 300;
  std::size_t iterations = 56;
  std::size_t batch = 200;
  int attempts = 9;
  Fraction alpha{4, 5};
  double eta = 0.5;
  double initial_skill = 0.0;
  Schedule schedule = Schedule::Cosine;
  Normal d_M{3.0, 2.5};
  Normal d_H{0.0, 1.0};
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Missing keys keep their defaults; throws ConfigError on bad values.
SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig base = {});

struct SimIteration {
  CurvePoint eval;
  double skill = 0.0;        // after the update
  double reward_mass = 0.0;  // batch mean
};

struct SimRun {
  std::vector<SimIteration> iterations;

  std::vector<CurvePoint> curve() const;
  double final_pass1() const;
  // First iteration whose pass@1 reaches 90% of the final value.
  std::size_t iterations_to_90() const;
};

// Deterministic in the config. Problem difficulties and every random draw
// depend only on the seed, so two configs differing in α share them.
SimRun simulate(const SimConfig& cfg);

struct Comparison {
  std::size_t runs = 0;
  double final_a = 0.0;
  double final_b = 0.0;
  double t90_a = 0.0;
  double t90_b = 0.0;
  std::size_t strict_wins_a = 0;  // final pass@1 of A strictly above B
  std::size_t ties = 0;
  double win_rate_a = 0.0;        // ties count half
  std::vector<SimRun> runs_a;
  std::vector<SimRun> runs_b;

  nlohmann::json to_json(const std::string& label_a, const std::string& label_b) const;
  // run,setting,iteration,pass1,pass4,pass9
  std::string curves_csv(const std::string& label_a, const std::string& label_b) const;
};

// Paired runs; run r uses seed a.seed + r for both settings (B's own seed
// is ignored). Runs are spread over `threads` workers.
Comparison compare_settings(const SimConfig& a, const SimConfig& b, std::size_t runs, std::size_t threads = 1);

}  // namespace cexgen
