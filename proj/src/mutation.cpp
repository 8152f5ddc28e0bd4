#include "cexgen/mutation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <nlohmann/json.hpp>
#include <regex>

#include "cexgen/lean_surface.hpp"
#include "cexgen/lexer.hpp"

namespace cexgen {

namespace {

// Tactics and syntax that can use a hypothesis without naming it. `*`
// covers `simp [*]` and `norm_num at *`.
constexpr std::array<std::string_view, 26> kContextConsumers = {
    "linarith", "nlinarith",     "polyrith",  "omega",         "assumption", "simp_all",
    "aesop",    "tauto",         "itauto",    "decide",        "trivial",    "contradiction",
    "grind",    "simpa",         "cc",        "solve_by_elim", "exact?",     "apply?",
    "gcongr",   "bound",         "interval_cases", "subst_vars", "assumption_mod_cast",
    "exact_mod_cast", "‹", "*"};

bool consumes_context(const Token& tok) {
  return std::find(kContextConsumers.begin(), kContextConsumers.end(), tok.text) !=
         kContextConsumers.end();
}

TermPtr lift_forall(const Hypothesis& h, TermPtr body) {
  return Term::binder(Quantifier::Forall, h.name, h.proposition, "", nullptr, std::move(body));
}

}  // namespace

std::set<std::size_t> StructuralOracle::unused(const TheoremStatement& t) {
  std::set<std::size_t> out;
  if (!t.proof || proof_contains_sorry(t.proof->text)) return out;
  std::vector<Token> toks;
  try {
    toks = tokenize(strip_comments(t.proof->text));
  } catch (const SyntaxError&) {
    return out;
  }
  std::set<std::string> roots;
  for (const auto& tok : toks) {
    if (consumes_context(tok)) return {};
    if (tok.kind == TokenKind::Ident) roots.insert(root_name(tok.text));
  }
  for (const auto& h : t.hypotheses)
    if (h.origin != HypothesisOrigin::Arrow && !roots.count(h.name)) out.insert(h.index);
  return out;
}

std::set<std::string> unused_variable_names(const std::vector<Diagnostic>& diagnostics) {
  static const std::regex re("unused variable `([^`]+)`");
  std::set<std::string> names;
  for (const auto& d : diagnostics) {
    for (auto it = std::sregex_iterator(d.text.begin(), d.text.end(), re); it != std::sregex_iterator();
         ++it)
      names.insert((*it)[1].str());
  }
  return names;
}

std::set<std::size_t> CheckerOracle::unused(const TheoremStatement& t) {
  if (!t.proof) throw OracleUnavailable(fmt::format("{} has no proof to analyse", t.name));
  ProofJob job{"prune:" + t.name, print_statement(t), t.proof->text, limits_};
  const auto result = check_proof(job, backend_);
  if (!result.verified())
    throw OracleUnavailable(
        fmt::format("checker did not accept the proof of {} ({})", t.name, to_string(result.status)));
  const auto names = unused_variable_names(result.diagnostics);
  std::set<std::size_t> out;
  for (const auto& h : t.hypotheses)
    if (names.count(h.name)) out.insert(h.index);
  return out;
}

TheoremStatement prune_redundant(const TheoremStatement& t, UsageOracle& usage) {
  const auto drop = usage.unused(t);
  if (drop.empty()) return t;
  TheoremStatement out = t;
  out.hypotheses.clear();
  for (const auto& h : t.hypotheses) {
    if (drop.count(h.index)) {
      out.provenance.notes.push_back(
          fmt::format("pruned {} : {} ({} oracle)", h.name, print_term(h.proposition), usage.name()));
      continue;
    }
    Hypothesis kept = h;
    kept.index = out.hypotheses.size();
    out.hypotheses.push_back(std::move(kept));
  }
  return out;
}

std::vector<std::size_t> droppable_hypotheses(const TheoremStatement& t) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < t.hypotheses.size(); ++j)
    if (hypothesis_dependents(t, j).empty()) out.push_back(j);
  return out;
}

ProblemNames problem_names(const std::string& seed, std::size_t j) {
  static const std::regex extracted("^(.*?)(_g[0-9]+)?_extracted_([0-9]+)$");
  std::smatch m;
  if (std::regex_match(seed, m, extracted)) {
    const std::string base = m[1].str();
    const std::string k = m[3].str();
    return {fmt::format("{}_mut_{}_drop{}", base, k, j), fmt::format("{}_{}_drop{}", base, k, j)};
  }
  return {fmt::format("{}_mut_drop{}", seed, j), fmt::format("{}_drop{}", seed, j)};
}

MutationRecord mutate(const TheoremStatement& t, std::size_t j, BodyForm form,
                      const std::optional<ProblemNames>& names) {
  if (!hypothesis_dependents(t, j).empty())
    throw NotDroppable(fmt::format("hypothesis {} of {} has dependents", j, t.name));

  MutationRecord rec;
  rec.seed = t.name;
  rec.drop_index = j;
  rec.form = form;
  rec.seed_notes = t.provenance.notes;
  const ProblemNames pn = names ? *names : problem_names(t.name, j);

  std::vector<Binder> binders;
  for (const auto& b : t.binders) binders.push_back(Binder{b.name, b.type, BinderMode::Explicit, false});

  // Remaining hypotheses that are referenced as terms must stay bound.
  std::vector<const Hypothesis*> remaining;
  for (const auto& h : t.hypotheses)
    if (h.index != j) remaining.push_back(&h);
  auto referenced = [&](const Hypothesis& h) {
    if (mentions(t.conclusion, h.name)) return true;
    for (const auto* o : remaining)
      if (o->index > h.index && mentions(o->proposition, h.name)) return true;
    return false;
  };

  TermPtr body;
  if (form == BodyForm::Conjunction) {
    std::vector<Binder> mutated_binders = binders;
    std::vector<TermPtr> parts;
    for (const auto* h : remaining) {
      if (referenced(*h))
        mutated_binders.push_back(Binder{h->name, h->proposition, BinderMode::Explicit, false});
      else
        parts.push_back(h->proposition);
    }
    parts.push_back(t.conclusion);
    body = fold_right("∧", parts);
    rec.mutated.binders = std::move(mutated_binders);
  } else {
    body = t.conclusion;
    for (auto it = remaining.rbegin(); it != remaining.rend(); ++it) {
      const Hypothesis& h = **it;
      body = referenced(h) ? lift_forall(h, body) : Term::infix("→", h.proposition, body);
    }
    rec.mutated.binders = binders;
  }
  rec.mutated.name = pn.mutated;
  rec.mutated.body = body;
  rec.mutated.kind = ProblemKind::Mutated;
  rec.mutated.provenance = {t.name, j, form};

  rec.dropped.name = pn.dropped;
  rec.dropped.binders = binders;
  for (const auto* h : remaining)
    if (h->index < j && mentions(t.hypotheses[j].proposition, h->name))
      rec.dropped.binders.push_back(Binder{h->name, h->proposition, BinderMode::Explicit, false});
  rec.dropped.body = negate(t.hypotheses[j].proposition);
  rec.dropped.kind = ProblemKind::DroppedHypothesis;
  rec.dropped.provenance = {t.name, j, form};

  const auto locals = t.local_names();
  for (const ExistentialProblem* p : {&rec.mutated, &rec.dropped}) {
    std::set<std::string> bound;
    for (const auto& b : p->binders) bound.insert(b.name);
    for (const auto& v : free_variables(p->body)) {
      const std::string r = root_name(v);
      if (locals.count(r) && !bound.count(r))
        throw ScopeError(fmt::format("{} leaves {} unbound", p->name, r));
    }
  }
  return rec;
}

std::vector<MutationRecord> mutate_all(const TheoremStatement& t, BodyForm form) {
  std::vector<MutationRecord> out;
  for (std::size_t j : droppable_hypotheses(t)) out.push_back(mutate(t, j, form));
  return out;
}

nlohmann::json to_json(const MutationRecord& r) {
  return nlohmann::json{
      {"seed", r.seed},
      {"drop_index", r.drop_index},
      {"form", to_string(r.form)},
      {"mutated_name", r.mutated.name},
      {"mutated_lean", print_theorem(r.mutated)},
      {"dropped_name", r.dropped.name},
      {"dropped_lean", print_theorem(r.dropped)},
      {"provenance", {{"seed", r.seed}, {"drop_index", r.drop_index}, {"notes", r.seed_notes}}},
  };
}

CorpusMutation mutate_corpus(const std::vector<TheoremStatement>& seeds, BodyForm form, UsageOracle* oracle) {
  StructuralOracle structural;
  CorpusMutation out;
  for (const auto& seed : seeds) {
    ++out.seeds;
    try {
      TheoremStatement pruned;
      if (oracle) {
        try {
          pruned = prune_redundant(seed, *oracle);
        } catch (const OracleUnavailable& e) {
          out.notes.push_back(fmt::format("{}: {}; structural oracle used", seed.name, e.what()));
          pruned = prune_redundant(seed, structural);
        }
      } else {
        pruned = prune_redundant(seed, structural);
      }
      for (std::size_t j : droppable_hypotheses(pruned)) {
        try {
          out.records.push_back(mutate(pruned, j, form));
        } catch (const Error& e) {
          out.failures.push_back({seed.name, fmt::format("drop {}: {}", j, e.what())});
        }
      }
    } catch (const Error& e) {
      out.failures.push_back({seed.name, e.what()});
    }
  }
  return out;
}

}  // namespace cexgen
