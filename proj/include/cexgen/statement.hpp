#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cexgen/term.hpp"

namespace cexgen {

enum class BinderMode { Explicit, Implicit, InstanceImplicit };

struct Binder {
  std::string name;
  TermPtr type;
  BinderMode mode = BinderMode::Explicit;
  // Anonymous instance binders get `inst<i>` and are printed without it.
  bool synthesized_name = false;

  friend bool operator==(const Binder& a, const Binder& b) {
    return a.name == b.name && terms_equal(a.type, b.type) && a.mode == b.mode &&
           a.synthesized_name == b.synthesized_name;
  }
};

// Where a hypothesis was written in the source declaration.
enum class HypothesisOrigin {
  Header,      // `(h : P)` before the colon
  NamedArrow,  // `(h : P) → ...` in the statement
  Arrow,       // anonymous antecedent `P → ...`, named `a<i>`
};

struct Hypothesis {
  std::string name;
  TermPtr proposition;
  std::size_t index = 0;
  HypothesisOrigin origin = HypothesisOrigin::Header;

  friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
    return a.name == b.name && terms_equal(a.proposition, b.proposition) && a.index == b.index &&
           a.origin == b.origin;
  }
};

// Canonical tactic/term proof text (common indentation removed).
struct ProofScript {
  std::string text;
  friend bool operator==(const ProofScript&, const ProofScript&) = default;
};

struct Provenance {
  enum class Source { Library, Extracted, Synthetic };
  Source source = Source::Library;
  std::string step_id;             // extracted: "<seed>#<step index>"
  std::vector<std::string> notes;  // e.g. pruned hypotheses

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TheoremStatement {
  std::string name;
  std::vector<Binder> binders;
  std::vector<Hypothesis> hypotheses;
  TermPtr conclusion;
  std::optional<ProofScript> proof;
  Provenance provenance;

  // Structural equality: binders, hypotheses, conclusion, name and proof.
  // Provenance is bookkeeping and does not participate.
  friend bool operator==(const TheoremStatement& a, const TheoremStatement& b) {
    return a.name == b.name && a.binders == b.binders && a.hypotheses == b.hypotheses &&
           terms_equal(a.conclusion, b.conclusion) && a.proof == b.proof;
  }

  // Names of binders and hypotheses.
  std::set<std::string> local_names() const;
};

enum class ProblemKind { Mutated, DroppedHypothesis };
enum class BodyForm { Conjunction, Implication };

const char* to_string(ProblemKind k);
const char* to_string(BodyForm f);
BodyForm parse_body_form(const std::string& s);

struct ProblemProvenance {
  std::string seed;
  std::size_t dropped_index = 0;
  BodyForm form = BodyForm::Conjunction;
  friend bool operator==(const ProblemProvenance&, const ProblemProvenance&) = default;
};

struct ExistentialProblem {
  std::string name;
  std::vector<Binder> binders;  // all explicit
  TermPtr body;
  ProblemKind kind = ProblemKind::Mutated;
  ProblemProvenance provenance;

  friend bool operator==(const ExistentialProblem& a, const ExistentialProblem& b) {
    return a.name == b.name && a.binders == b.binders && terms_equal(a.body, b.body);
  }
};

struct Dependents {
  std::set<std::size_t> hypotheses;  // indices > j naming hypothesis j
  bool conclusion = false;
  bool binders = false;  // a binder type names hypothesis j

  bool empty() const { return hypotheses.empty() && !conclusion && !binders; }
};

// Throws IndexOutOfRange when j is not a hypothesis index.
Dependents hypothesis_dependents(const TheoremStatement& t, std::size_t j);

// Checks unique names and contiguous indices; throws DuplicateName.
void validate(const TheoremStatement& t);

}  // namespace cexgen
