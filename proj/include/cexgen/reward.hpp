#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cexgen/fraction.hpp"

namespace cexgen {

struct RewardConfig {
  Fraction alpha{4, 5};
};

// Throws ConfigError unless 0 ≤ α ≤ 1.
RewardConfig make_reward_config(Fraction alpha);

struct RewardRecord {
  std::string problem_id;
  bool v_M = false;
  bool v_H = false;
  Fraction r_M;
  Fraction r_H;
  Fraction r;
};

// r_M = α·[v_M], r_H = (1−α)·[v_H], r = r_M + r_H.
RewardRecord compute_reward(bool v_M, bool v_H, const RewardConfig& cfg, std::string problem_id = {});

// One proposed counterexample and the two proofs written for it.
struct Candidate {
  std::string problem_id;
  std::string mutated_statement;
  std::string dropped_statement;
  std::string witness;
  std::string reasoning;  // full proposer response
  std::string proof_M;
  std::string proof_H;
};

enum class ExampleKind { Counterexample, Proof };

struct WeightedExample {
  ExampleKind kind = ExampleKind::Counterexample;
  std::string problem;
  std::string witness;
  std::string completion;
  Fraction weight;
  Fraction alpha;
  bool zero_weight = false;
  nlohmann::json provenance = nlohmann::json::object();
};

// One example per candidate, weight r. `rewards[i]` belongs to `candidates[i]`.
std::vector<WeightedExample> build_counterexample_sft(const std::vector<Candidate>& candidates,
                                                      const std::vector<RewardRecord>& rewards,
                                                      const RewardConfig& cfg);

// Verified ℳ-proofs with weight α, verified ℋ-proofs with weight 1−α.
std::vector<WeightedExample> build_proof_sft(const std::vector<Candidate>& candidates,
                                             const std::vector<RewardRecord>& rewards,
                                             const RewardConfig& cfg);

nlohmann::json to_json(const WeightedExample& e);

}  // namespace cexgen
