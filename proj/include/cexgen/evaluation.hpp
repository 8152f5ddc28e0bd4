#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cexgen/fraction.hpp"
#include "cexgen/gateway.hpp"
#include "cexgen/statement.hpp"
#include "cexgen/verification.hpp"

namespace cexgen {

// 1 − C(n−c, k) / C(n, k). Throws std::invalid_argument unless
// 1 ≤ k ≤ n and 0 ≤ c ≤ n.
double pass_at_k(int n, int c, int k);
Fraction pass_at_k_exact(int n, int c, int k);

struct EvalConfig {
  std::vector<int> ks{1, 4, 9};
  int n_propose = 3;
  int n_prove = 3;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  ResourceLimits limits;
  GeneratorConfig proposer;
  GeneratorConfig prover;
};

struct ProblemAttempts {
  std::string id;
  std::vector<bool> outcomes;  // one per completed attempt; n = size()
  std::size_t lost = 0;        // attempts dropped by infrastructure or generator failures
  std::vector<std::string> errors;

  int n() const { return static_cast<int>(outcomes.size()); }
  int c() const;
};

struct KSummary {
  int k = 0;
  std::size_t solved = 0;     // a seeded k-subset of attempts contains a success
  double mean_pass = 0.0;     // mean estimator over problems
};

struct EvalReport {
  std::vector<ProblemAttempts> problems;
  std::vector<KSummary> per_k;

  nlohmann::json to_json() const;
  std::string to_table() const;  // aligned text
  std::string to_csv() const;    // k,solved,mean_pass
};

// Summaries from known attempt outcomes. When a problem has fewer than k
// attempts left, all of them are used.
EvalReport summarize_attempts(std::vector<ProblemAttempts> problems, const std::vector<int>& ks,
                              std::uint64_t seed);

// n_propose × n_prove attempts per problem; an attempt succeeds when its
// proof of the mutated statement verifies.
EvalReport evaluate_benchmark(const std::vector<ExistentialProblem>& problems, GeneratorClient& proposer,
                              GeneratorClient& prover, Backend& verifier, const EvalConfig& cfg);

struct CurvePoint {
  std::size_t iteration = 0;
  double pass1 = 0.0;
  double pass4 = 0.0;
  double pass9 = 0.0;
};

// CSV `iteration,pass1,pass4,pass9`.
std::string curves_csv(const std::vector<CurvePoint>& points);

// Line plot of one or more labelled curve sets sharing the iteration axis.
std::string curves_svg(const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& series);

// Writes `<stem>.csv` and, when `plot` is set, `<stem>.svg`. Throws
// std::invalid_argument on an empty curve.
void emit_curves(const std::vector<CurvePoint>& points, const std::filesystem::path& stem, bool plot = true);

}  // namespace cexgen
