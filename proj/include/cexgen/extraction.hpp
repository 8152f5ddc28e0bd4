#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cexgen/statement.hpp"

namespace cexgen {

// Proof state around one top-level tactic, as reported by a checker session.
struct ProofState {
  std::string before_goal;
  std::string after_goal;  // empty when the tactic closes the goal
  std::vector<std::pair<std::string, std::string>> context;  // name, type
};

// Keyed by (seed theorem name, step index).
using StateTable = std::map<std::pair<std::string, std::size_t>, ProofState>;

// JSONL `{proof_id, step_index, before_goal, after_goal, context:[{name,type}]}`.
StateTable load_states(const std::filesystem::path& file);

enum class StepStyle { Declarative, Procedural };

struct ProofStep {
  StepStyle style = StepStyle::Procedural;
  std::size_t index = 0;
  std::string text;     // tactic text, continuation lines included
  std::string tactic;   // first word: have, suffices, rw, ...
  // declarative only
  std::string name;     // `this` for anonymous haves
  TermPtr goal;
  // Haves established by earlier top-level steps, latest binding per name.
  std::vector<std::pair<std::string, TermPtr>> context;
  // True once an earlier tactic changed the local context in a way the
  // statement alone cannot reproduce (intro, obtain, `at h`, ...).
  bool context_changed = false;
  // Names bound by earlier procedural tactics.
  std::vector<std::string> introduced;
  std::optional<ProofState> state;
};

// Top-level steps of a tactic proof. Returns no steps for proofs that are
// not in tactic mode or do not tokenize.
std::vector<ProofStep> split_proof(const ProofScript& proof);

// `«seed»_g«k»_extracted_«id»`, proof `by sorry`. Throws StatesMissing for a
// procedural step without states and ScopeError when the step's context
// cannot be rebuilt from the seed.
TheoremStatement step_to_theorem(const TheoremStatement& seed, const ProofStep& step, std::size_t id);

struct ExtractionSkip {
  std::string seed;
  std::size_t step_index = 0;
  std::string reason;
};

struct ExtractionReport {
  std::vector<TheoremStatement> theorems;
  std::vector<ExtractionSkip> skipped;
  std::size_t seeds = 0;
  std::size_t duplicates = 0;
};

// Extracts from every theorem of `seeds` in order; procedural steps use
// `states` when present. Deduplicates by statement shape.
ExtractionReport extract_theorems(const std::vector<TheoremStatement>& seeds, const StateTable& states);

// Parses the files and extracts from all parsed theorems.
ExtractionReport extract_corpus(const std::vector<std::filesystem::path>& files,
                                const std::optional<std::filesystem::path>& states_file);

nlohmann::json to_json(const ExtractionSkip& s);

}  // namespace cexgen
