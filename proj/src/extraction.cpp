#include "cexgen/extraction.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cexgen/lean_surface.hpp"
#include "cexgen/lexer.hpp"
#include "syntax_detail.hpp"

namespace cexgen {

using json = nlohmann::json;

namespace {

// Tactics that bind new names or rewrite hypotheses.
const std::set<std::string> kContextChanging = {
    "intro",   "intros",     "rintro",   "obtain",     "rcases",        "cases",   "cases'",
    "induction", "induction'", "by_contra", "by_contra!", "by_cases",    "contrapose",
    "contrapose!", "set",     "generalize", "choose",    "lift",          "replace", "specialize",
    "subst",   "clear",      "revert",   "split_ifs",  "interval_cases", "fin_cases", "match",
    "ext",     "funext",     "rename_i", "next",       "case"};

std::string trim_copy(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::size_t indent_of(const std::string& line) {
  const auto p = line.find_first_not_of(" \t");
  return p == std::string::npos ? line.size() : p;
}

// Splits at `;` outside brackets; `<;>` is not a separator.
std::vector<std::string> split_semicolons(const std::string& chunk) {
  std::vector<std::string> out;
  std::vector<Token> toks;
  try {
    toks = tokenize(chunk);
  } catch (const SyntaxError&) {
    return {chunk};
  }
  int depth = 0;
  std::size_t start = 0;
  for (const auto& t : toks) {
    if (detail::is_open_bracket(t.text)) ++depth;
    else if (detail::is_close_bracket(t.text)) --depth;
    else if (depth == 0 && t.is(";")) {
      out.push_back(trim_copy(std::string_view(chunk).substr(start, t.begin - start)));
      start = t.end;
    }
  }
  out.push_back(trim_copy(std::string_view(chunk).substr(start)));
  out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
  return out;
}

struct Declarative {
  std::string name;
  TermPtr goal;
};

// `have h : G := ...`, `have : G`, `suffices h : G by ...`.
std::optional<Declarative> parse_declarative(const std::vector<Token>& toks) {
  if (toks.empty() || !(toks[0].is("have") || toks[0].is("suffices"))) return std::nullopt;
  const auto match = detail::match_brackets(toks);
  std::size_t i = 1;
  Declarative d{"this", nullptr};
  if (i < toks.size() && toks[i].kind == TokenKind::Ident) d.name = toks[i++].text;
  if (i >= toks.size() || !toks[i].is(":")) return std::nullopt;
  const std::size_t first = i + 1;
  std::size_t last = detail::find_top_level(toks, match, first, toks.size(), ":=");
  if (toks[0].is("suffices")) {
    last = std::min({last, detail::find_top_level(toks, match, first, toks.size(), "by"),
                     detail::find_top_level(toks, match, first, toks.size(), "from")});
  }
  if (first >= last) return std::nullopt;
  d.goal = parse_term_tokens(toks, first, last);
  return d;
}

// Names bound by an `intro`-like tactic (identifiers after the keyword,
// excluding `_`).
std::vector<std::string> bound_names(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    if (toks[i].is(":=") || toks[i].is("using") || toks[i].is("at")) break;
    if (toks[i].kind == TokenKind::Ident && toks[i].text != "_") out.push_back(toks[i].text);
  }
  return out;
}

TermPtr parse_goal(const std::string& text) {
  std::string s = trim_copy(text);
  if (s.rfind("⊢", 0) == 0) s = trim_copy(std::string_view(s).substr(std::string("⊢").size()));
  if (s.empty()) throw ExtractionFailed("empty goal in proof state");
  return parse_term(s);
}

// Header hypotheses first, then anonymous arrow hypotheses named the way
// the parser would name them.
void normalize_hypotheses(TheoremStatement& t) {
  std::stable_partition(t.hypotheses.begin(), t.hypotheses.end(),
                        [](const Hypothesis& h) { return h.origin == HypothesisOrigin::Header; });
  std::set<std::string> used;
  for (const auto& b : t.binders) used.insert(b.name);
  for (const auto& h : t.hypotheses)
    if (h.origin == HypothesisOrigin::Header) used.insert(h.name);
  std::size_t counter = 0;
  for (std::size_t i = 0; i < t.hypotheses.size(); ++i) {
    auto& h = t.hypotheses[i];
    h.index = i;
    if (h.origin != HypothesisOrigin::Arrow) continue;
    std::string name;
    do name = fmt::format("a{}", counter++);
    while (used.count(name));
    h.name = name;
    used.insert(name);
  }
}

void add_header_hypothesis(TheoremStatement& t, const std::string& name, TermPtr prop) {
  if (!is_hypothesis_binder(name, prop))
    throw ScopeError(fmt::format("hypothesis {} would read back as a variable", name));
  auto it = std::find_if(t.hypotheses.begin(), t.hypotheses.end(),
                         [&](const Hypothesis& h) { return h.name == name; });
  if (it != t.hypotheses.end()) t.hypotheses.erase(it);
  t.hypotheses.push_back(Hypothesis{name, std::move(prop), 0, HypothesisOrigin::Header});
}

std::string shape_key(const TheoremStatement& t) {
  TheoremStatement copy = t;
  copy.name = "_";
  copy.proof.reset();
  return print_statement(copy);
}

}  // namespace

StateTable load_states(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot open states file {}", file.string()));
  StateTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_copy(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      ProofState st;
      st.before_goal = j.at("before_goal").get<std::string>();
      st.after_goal = j.value("after_goal", "");
      for (const auto& c : j.value("context", json::array()))
        st.context.emplace_back(c.at("name").get<std::string>(), c.at("type").get<std::string>());
      table[{j.at("proof_id").get<std::string>(), j.at("step_index").get<std::size_t>()}] = std::move(st);
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}:{}: {}", file.string(), line_no, e.what()));
    }
  }
  return table;
}

std::vector<ProofStep> split_proof(const ProofScript& proof) {
  std::string text;
  try {
    text = strip_comments(proof.text);
  } catch (const SyntaxError&) {
    return {};
  }
  text = trim_copy(text);
  if (text.rfind("by", 0) != 0 || (text.size() > 2 && !std::isspace(static_cast<unsigned char>(text[2]))))
    return {};
  text = text.substr(2);

  // Top-level chunks: the first non-blank line and every line at the
  // minimal indentation start a chunk; deeper lines continue it.
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l))
      if (!trim_copy(l).empty()) lines.push_back(l);
  }
  if (lines.empty()) return {};
  // A first line sharing the `by` line has no meaningful indentation.
  const bool first_inline = text.find_first_not_of(" \t") != text.find('\n') &&
                            text.find_first_not_of(" \t\n") < text.find('\n');
  std::size_t base = std::string::npos;
  for (std::size_t i = first_inline ? 1 : 0; i < lines.size(); ++i) base = std::min(base, indent_of(lines[i]));
  std::vector<std::string> chunks;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 || indent_of(lines[i]) <= base) {
      chunks.push_back(trim_copy(lines[i]));
    } else {
      chunks.back() += "\n" + lines[i];
    }
  }

  std::vector<ProofStep> steps;
  std::vector<std::pair<std::string, TermPtr>> haves;
  bool changed = false;
  std::vector<std::string> introduced;
  try {
    for (const auto& chunk : chunks) {
      for (const auto& piece : split_semicolons(chunk)) {
        ProofStep s;
        s.index = steps.size();
        s.text = piece;
        s.context = haves;
        s.context_changed = changed;
        s.introduced = introduced;
        const auto toks = tokenize(piece);
        s.tactic = toks.empty() ? "" : toks[0].text;
        if (auto d = parse_declarative(toks)) {
          s.style = StepStyle::Declarative;
          s.name = d->name;
          s.goal = d->goal;
          if (s.tactic == "have") {
            std::erase_if(haves, [&](const auto& p) { return p.first == d->name; });
            haves.emplace_back(d->name, d->goal);
          }
        } else {
          s.style = StepStyle::Procedural;
          const bool at_clause =
              std::any_of(toks.begin(), toks.end(), [](const Token& t) { return t.is("at"); });
          if (kContextChanging.count(s.tactic) || at_clause) changed = true;
          if (kContextChanging.count(s.tactic) || s.tactic == "have" || s.tactic == "let") {
            for (auto& n : bound_names(toks)) introduced.push_back(n);
          }
        }
        steps.push_back(std::move(s));
      }
    }
  } catch (const SyntaxError&) {
    return {};
  }
  return steps;
}

TheoremStatement step_to_theorem(const TheoremStatement& seed, const ProofStep& step, std::size_t id) {
  TheoremStatement t;
  t.name = fmt::format("{}_g{}_extracted_{}", seed.name, step.index, id);
  t.provenance.source = Provenance::Source::Extracted;
  t.provenance.step_id = fmt::format("{}#{}", seed.name, step.index);

  if (step.state) {
    const ProofState& st = *step.state;
    for (const auto& [name, type_text] : st.context) {
      const auto type = parse_term(type_text);
      if (is_hypothesis_binder(name, type))
        add_header_hypothesis(t, name, type);
      else
        t.binders.push_back(Binder{name, type, BinderMode::Explicit, false});
    }
    if (step.style == StepStyle::Declarative) {
      t.conclusion = step.goal;
    } else {
      t.conclusion = parse_goal(st.before_goal);
      if (!trim_copy(st.after_goal).empty()) {
        std::string name = "h_after";
        while (std::any_of(t.binders.begin(), t.binders.end(), [&](const Binder& b) { return b.name == name; }) ||
               std::any_of(t.hypotheses.begin(), t.hypotheses.end(),
                           [&](const Hypothesis& h) { return h.name == name; }))
          name += "'";
        add_header_hypothesis(t, name, parse_goal(st.after_goal));
      }
      t.provenance.notes.push_back("built from a proof-state pair (best effort)");
    }
  } else {
    if (step.style == StepStyle::Procedural)
      throw StatesMissing(fmt::format("no proof states for step {} of {}", step.index, seed.name));
    if (step.context_changed)
      throw ScopeError(fmt::format("step {} of {} follows a tactic that changed the local context",
                                   step.index, seed.name));
    t.binders = seed.binders;
    for (const auto& h : seed.hypotheses) {
      Hypothesis copy = h;
      if (copy.origin == HypothesisOrigin::NamedArrow) copy.origin = HypothesisOrigin::Header;
      t.hypotheses.push_back(std::move(copy));
    }
    for (const auto& [name, prop] : step.context) add_header_hypothesis(t, name, prop);
    t.conclusion = step.goal;
  }

  normalize_hypotheses(t);
  std::set<std::string> bound;
  for (const auto& n : t.local_names()) bound.insert(n);
  for (const auto& v : free_variables(t.conclusion)) {
    const std::string r = root_name(v);
    if (!bound.count(r) && std::find(step.introduced.begin(), step.introduced.end(), r) != step.introduced.end())
      throw ScopeError(fmt::format("goal of step {} in {} mentions {}, introduced by an earlier tactic",
                                   step.index, seed.name, r));
  }
  validate(t);
  return t;
}

ExtractionReport extract_theorems(const std::vector<TheoremStatement>& seeds, const StateTable& states) {
  ExtractionReport report;
  std::set<std::string> seen;
  for (const auto& seed : seeds) {
    ++report.seeds;
    if (!seed.proof) continue;
    std::size_t id = 0;
    for (auto step : split_proof(*seed.proof)) {
      if (auto it = states.find({seed.name, step.index}); it != states.end()) step.state = it->second;
      try {
        auto t = step_to_theorem(seed, step, id);
        if (!seen.insert(shape_key(t)).second) {
          ++report.duplicates;
          continue;
        }
        ++id;
        report.theorems.push_back(std::move(t));
      } catch (const Error& e) {
        if (step.style == StepStyle::Procedural && !step.state) continue;  // expected without states
        report.skipped.push_back({seed.name, step.index, e.what()});
      }
    }
  }
  return report;
}

ExtractionReport extract_corpus(const std::vector<std::filesystem::path>& files,
                                const std::optional<std::filesystem::path>& states_file) {
  StateTable states;
  if (states_file) states = load_states(*states_file);
  std::vector<TheoremStatement> seeds;
  for (const auto& f : files) {
    auto unit = parse_corpus(f);
    for (auto& t : unit.theorems) seeds.push_back(std::move(t));
  }
  return extract_theorems(seeds, states);
}

json to_json(const ExtractionSkip& s) {
  return json{{"seed", s.seed}, {"step_index", s.step_index}, {"reason", s.reason}};
}

}  // namespace cexgen
