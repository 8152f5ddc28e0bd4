#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cexgen/statement.hpp"
#include "cexgen/verification.hpp"

namespace cexgen {

// Decides which hypotheses of a theorem its proof does not need.
class UsageOracle {
 public:
  virtual ~UsageOracle() = default;
  // Indices of redundant hypotheses.
  virtual std::set<std::size_t> unused(const TheoremStatement& t) = 0;
  virtual std::string name() const = 0;
};

// Conservative text check: a hypothesis is redundant only if the proof never
// names it. Proofs that may consume the context implicitly (`linarith`,
// `assumption`, `simp_all`, `‹_›`, ...) keep every hypothesis, as do
// theorems without a proof and anonymous arrow hypotheses.
class StructuralOracle : public UsageOracle {
 public:
  std::set<std::size_t> unused(const TheoremStatement& t) override;
  std::string name() const override { return "structural"; }
};

// Asks the external checker for unused-variable diagnostics on the proof.
class CheckerOracle : public UsageOracle {
 public:
  explicit CheckerOracle(Backend& backend, ResourceLimits limits = {})
      : backend_(backend), limits_(limits) {}
  // Throws OracleUnavailable when t has no proof or the proof does not check.
  std::set<std::size_t> unused(const TheoremStatement& t) override;
  std::string name() const override { return "checker"; }

 private:
  Backend& backend_;
  ResourceLimits limits_;
};

// Names reported in "unused variable `h`" diagnostics.
std::set<std::string> unused_variable_names(const std::vector<Diagnostic>& diagnostics);

TheoremStatement prune_redundant(const TheoremStatement& t, UsageOracle& usage);

std::vector<std::size_t> droppable_hypotheses(const TheoremStatement& t);

struct MutationRecord {
  std::string seed;
  std::size_t drop_index = 0;
  ExistentialProblem mutated;
  ExistentialProblem dropped;
  BodyForm form = BodyForm::Conjunction;
  std::vector<std::string> seed_notes;
};

struct ProblemNames {
  std::string mutated;
  std::string dropped;
};

// `seed_mut_drop3` / `seed_drop3`; a seed `base[_g<i>]_extracted_<k>` gives
// `base_mut_<k>_drop3` / `base_<k>_drop3`.
ProblemNames problem_names(const std::string& seed, std::size_t j);

// Throws NotDroppable (or IndexOutOfRange) when j is not droppable.
MutationRecord mutate(const TheoremStatement& t, std::size_t j, BodyForm form,
                      const std::optional<ProblemNames>& names = std::nullopt);

std::vector<MutationRecord> mutate_all(const TheoremStatement& t, BodyForm form);

nlohmann::json to_json(const MutationRecord& r);

struct SeedFailure {
  std::string seed;
  std::string reason;
};

struct CorpusMutation {
  std::vector<MutationRecord> records;
  std::vector<SeedFailure> failures;  // per seed, or per dropped index
  std::vector<std::string> notes;     // oracle fallbacks
  std::size_t seeds = 0;

  double ratio() const { return seeds == 0 ? 0.0 : static_cast<double>(records.size()) / seeds; }
};

// Prunes each seed with `oracle` (structural when null) and mutates every
// droppable hypothesis. A seed the oracle cannot analyse is pruned
// structurally instead, with a note.
CorpusMutation mutate_corpus(const std::vector<TheoremStatement>& seeds, BodyForm form, UsageOracle* oracle = nullptr);

}  // namespace cexgen
