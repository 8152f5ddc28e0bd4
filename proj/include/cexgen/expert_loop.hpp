#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cexgen/fraction.hpp"
#include "cexgen/gateway.hpp"
#include "cexgen/statement.hpp"
#include "cexgen/verification.hpp"

namespace cexgen {

// A mutated problem and its dropped-hypothesis companion.
struct ProblemPair {
  std::string id;  // mutated problem name
  ExistentialProblem mutated;
  ExistentialProblem dropped;
};

// Reads the JSONL written by `cexgen mutate` (mutated_lean, dropped_lean).
std::vector<ProblemPair> load_problem_pairs(const std::filesystem::path& file);

// Declaration text up to and including `:=`, as sent to checkers.
std::string job_statement(const ExistentialProblem& p);

inline GeneratorConfig role_config(Role r) {
  GeneratorConfig g;
  g.role = r;
  return g;
}

struct RunConfig {
  std::vector<std::filesystem::path> datasets;
  std::size_t holdout = 3000;
  std::size_t iterations = 56;
  std::size_t batch_size = 10000;
  bool single_pass = true;
  Fraction alpha{4, 5};
  int n_propose = 1;
  int n_prove = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> hook;
  bool fail_fast = false;
  std::size_t parallelism = 1;
  ResourceLimits limits;
  GeneratorConfig proposer = role_config(Role::Proposer);
  GeneratorConfig prover = role_config(Role::Prover);

  nlohmann::json to_json() const;
};

// Inverse of RunConfig::to_json; absent keys keep the values in `base`.
// Unknown keys are ignored so a config file can carry other sections.
// Throws ConfigError on ill-typed or out-of-range values.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

// Seeded split into (train, validation); validation keeps input order,
// train is shuffled. Throws HoldoutTooLarge unless holdout < |problems|.
std::pair<std::vector<ProblemPair>, std::vector<ProblemPair>> split_dataset(std::vector<ProblemPair> problems,
                                                                           std::size_t holdout,
                                                                           std::uint64_t seed);

struct IterationCounts {
  std::size_t problems = 0;
  std::size_t proposed = 0;  // candidates with an extracted witness
  std::size_t v_M = 0;
  std::size_t v_H = 0;
  std::size_t both = 0;
  std::size_t neither = 0;
  std::size_t errors = 0;
};

struct IterationReport {
  std::size_t iteration = 0;
  IterationCounts counts;
  Fraction reward_mass;
  std::size_t ce_examples = 0;
  std::size_t proof_examples = 0;
  std::size_t verified_proofs = 0;
  std::filesystem::path ce_path;     // relative to the run directory
  std::filesystem::path proof_path;  // relative to the run directory
  std::vector<nlohmann::json> error_records;
  double wall_time_s = 0.0;

  // Deterministic fields only; wall time is kept apart.
  nlohmann::json to_json() const;
};

struct LoopServices {
  GeneratorClient& proposer;
  GeneratorClient& prover;
  Backend& verifier;
};

// Runs one expert-iteration round over a batch and writes iter_<k>/ under
// run_dir.
IterationReport run_iteration(std::size_t k, const std::vector<ProblemPair>& batch, LoopServices services,
                              const RunConfig& cfg, const std::filesystem::path& run_dir);

// Full run with resume: completed iterations (report and hook record
// present) are not repeated. Returns the manifest also written to
// run_dir/manifest.json.
nlohmann::json run_training(const RunConfig& cfg, LoopServices services, const std::filesystem::path& run_dir);

// Writes `text` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cexgen
