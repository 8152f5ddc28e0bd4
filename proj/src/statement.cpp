#include "cexgen/statement.hpp"

#include <fmt/format.h>

#include "cexgen/errors.hpp"

namespace cexgen {

std::set<std::string> TheoremStatement::local_names() const {
  std::set<std::string> names;
  for (const auto& b : binders) names.insert(b.name);
  for (const auto& h : hypotheses) names.insert(h.name);
  return names;
}

const char* to_string(ProblemKind k) {
  return k == ProblemKind::Mutated ? "mutated" : "dropped-hypothesis";
}

const char* to_string(BodyForm f) { return f == BodyForm::Conjunction ? "conjunction" : "implication"; }

BodyForm parse_body_form(const std::string& s) {
  if (s == "conj" || s == "conjunction") return BodyForm::Conjunction;
  if (s == "impl" || s == "implication") return BodyForm::Implication;
  throw ConfigError(fmt::format("unknown body form '{}' (expected conj|impl)", s));
}

Dependents hypothesis_dependents(const TheoremStatement& t, std::size_t j) {
  if (j >= t.hypotheses.size())
    throw IndexOutOfRange(fmt::format("hypothesis index {} out of range for {} ({} hypotheses)", j,
                                      t.name, t.hypotheses.size()));
  const auto& name = t.hypotheses[j].name;
  Dependents d;
  for (std::size_t i = j + 1; i < t.hypotheses.size(); ++i)
    if (mentions(t.hypotheses[i].proposition, name)) d.hypotheses.insert(i);
  d.conclusion = mentions(t.conclusion, name);
  for (const auto& b : t.binders)
    if (b.type && mentions(b.type, name)) d.binders = true;
  return d;
}

void validate(const TheoremStatement& t) {
  std::set<std::string> seen;
  for (const auto& b : t.binders)
    if (!seen.insert(b.name).second)
      throw DuplicateName(fmt::format("duplicate name '{}' in theorem {}", b.name, t.name));
  for (std::size_t i = 0; i < t.hypotheses.size(); ++i) {
    const auto& h = t.hypotheses[i];
    if (!seen.insert(h.name).second)
      throw DuplicateName(fmt::format("duplicate name '{}' in theorem {}", h.name, t.name));
    if (h.index != i) throw Error(fmt::format("hypothesis {} has index {}, expected {}", h.name, h.index, i));
  }
}

}  // namespace cexgen
