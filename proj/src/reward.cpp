#include "cexgen/reward.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "cexgen/errors.hpp"

namespace cexgen {

RewardConfig make_reward_config(Fraction alpha) {
  if (alpha < Fraction(0) || alpha > Fraction(1))
    throw ConfigError(fmt::format("alpha must lie in [0, 1], got {}", alpha.str()));
  return RewardConfig{alpha};
}

RewardRecord compute_reward(bool v_M, bool v_H, const RewardConfig& cfg, std::string problem_id) {
  RewardRecord r;
  r.problem_id = std::move(problem_id);
  r.v_M = v_M;
  r.v_H = v_H;
  r.r_M = v_M ? cfg.alpha : Fraction(0);
  r.r_H = v_H ? Fraction(1) - cfg.alpha : Fraction(0);
  r.r = r.r_M + r.r_H;
  return r;
}

namespace {

nlohmann::json length_stats(const std::string& proof) {
  const auto lines = std::count(proof.begin(), proof.end(), '\n') + (proof.empty() ? 0 : 1);
  return {{"proof_chars", proof.size()}, {"proof_lines", lines}};
}

void check_sizes(const std::vector<Candidate>& c, const std::vector<RewardRecord>& r) {
  if (c.size() != r.size())
    throw Error(fmt::format("{} candidates but {} rewards", c.size(), r.size()));
}

}  // namespace

std::vector<WeightedExample> build_counterexample_sft(const std::vector<Candidate>& candidates,
                                                      const std::vector<RewardRecord>& rewards,
                                                      const RewardConfig& cfg) {
  check_sizes(candidates, rewards);
  std::vector<WeightedExample> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& r = rewards[i];
    WeightedExample e;
    e.kind = ExampleKind::Counterexample;
    e.problem = c.mutated_statement;
    e.witness = c.witness;
    e.completion = c.reasoning;
    e.weight = r.r;
    e.alpha = cfg.alpha;
    e.zero_weight = r.r == Fraction(0);
    e.provenance = {{"problem_id", c.problem_id}, {"v_M", r.v_M}, {"v_H", r.v_H}};
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<WeightedExample> build_proof_sft(const std::vector<Candidate>& candidates,
                                             const std::vector<RewardRecord>& rewards,
                                             const RewardConfig& cfg) {
  check_sizes(candidates, rewards);
  std::vector<WeightedExample> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& r = rewards[i];
    auto add = [&](const std::string& statement, const std::string& proof, Fraction w, const char* target) {
      WeightedExample e;
      e.kind = ExampleKind::Proof;
      e.problem = statement;
      e.witness = c.witness;
      e.completion = proof;
      e.weight = w;
      e.alpha = cfg.alpha;
      e.zero_weight = w == Fraction(0);
      e.provenance = {{"problem_id", c.problem_id}, {"target", target}};
      e.provenance.update(length_stats(proof));
      out.push_back(std::move(e));
    };
    if (r.v_M) add(c.mutated_statement, c.proof_M, r.r_M, "mutated");
    if (r.v_H) add(c.dropped_statement, c.proof_H, r.r_H, "dropped");
  }
  return out;
}

nlohmann::json to_json(const WeightedExample& e) {
  nlohmann::json prov = e.provenance;
  prov["zero_weight"] = e.zero_weight;
  prov["weight_exact"] = e.weight.str();
  return {{"kind", e.kind == ExampleKind::Counterexample ? "counterexample-sft" : "proof-sft"},
          {"problem", e.problem},
          {"witness", e.witness},
          {"completion", e.completion},
          {"weight", e.weight.to_double()},
          {"alpha", e.alpha.to_double()},
          {"provenance", prov}};
}

}  // namespace cexgen
