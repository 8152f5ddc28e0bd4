#include "cexgen/lean_surface.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "syntax_detail.hpp"

namespace cexgen {

namespace {

constexpr std::array<std::string_view, 5> kUnsupportedKeywords = {"match", "let", "do",
                                                                  "where", "calc"};

constexpr std::array<std::string_view, 4> kModifiers = {"private", "protected", "nonrec",
                                                        "noncomputable"};

bool is_modifier(const Token& t) {
  return std::find(kModifiers.begin(), kModifiers.end(), t.text) != kModifiers.end();
}

Span span_of(const std::vector<Token>& toks, std::size_t i) {
  if (toks.empty()) return {};
  if (i >= toks.size()) return {toks.back().end, toks.back().end};
  return {toks[i].begin, toks[i].end};
}

struct DeclParser {
  std::string stripped;
  std::vector<Token> toks;
  std::vector<long> match;

  explicit DeclParser(std::string_view text) : stripped(strip_comments(text)) {
    toks = tokenize(stripped);
    match = detail::match_brackets(toks);
  }

  // Skips `@[...]` attribute blocks and modifiers; returns the next index.
  std::size_t skip_prefix(std::size_t i) const {
    for (;;) {
      if (i + 1 < toks.size() && toks[i].is("@") && toks[i + 1].is("[")) {
        i = static_cast<std::size_t>(match[i + 1]) + 1;
      } else if (i < toks.size() && is_modifier(toks[i])) {
        ++i;
      } else {
        return i;
      }
    }
  }

  void check_supported(std::size_t first, std::size_t last) const {
    for (std::size_t i = first; i < last; ++i) {
      const auto& t = toks[i];
      if (t.kind == TokenKind::Keyword &&
          std::find(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(), t.text) !=
              kUnsupportedKeywords.end())
        throw SyntaxUnsupported(fmt::format("unsupported construct '{}' in statement", t.text),
                                span_of(toks, i));
    }
  }

  std::size_t expect_name(std::size_t i, std::string& name) const {
    if (i >= toks.size() || toks[i].kind != TokenKind::Ident)
      throw SyntaxMalformed("expected declaration name", span_of(toks, i));
    name = toks[i].text;
    return i + 1;
  }

  std::optional<ProofScript> proof_after(std::size_t assign) const {
    if (assign >= toks.size()) return std::nullopt;
    return canonical_proof(std::string_view(stripped).substr(toks[assign].end));
  }
};

std::string dedent_join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string indent_proof(const std::string& text) {
  std::string out;
  for (char c : text) {
    out += c;
    if (c == '\n') out += "  ";
  }
  return out;
}

std::string binder_group_text(const std::vector<Binder>& bs, std::size_t i, std::size_t j) {
  const auto& b = bs[i];
  const std::string ty = print_term(b.type);
  if (b.mode == BinderMode::InstanceImplicit) {
    if (b.synthesized_name) return "[" + ty + "]";
    return "[" + b.name + " : " + ty + "]";
  }
  std::string names;
  for (std::size_t k = i; k < j; ++k) names += (k > i ? " " : "") + bs[k].name;
  if (b.mode == BinderMode::Implicit) return "{" + names + " : " + ty + "}";
  return "(" + names + " : " + ty + ")";
}

std::vector<std::string> header_groups(const std::vector<Binder>& bs) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < bs.size();) {
    std::size_t j = i + 1;
    if (bs[i].mode != BinderMode::InstanceImplicit)
      while (j < bs.size() && bs[j].mode == bs[i].mode && terms_equal(bs[j].type, bs[i].type)) ++j;
    out.push_back(binder_group_text(bs, i, j));
    i = j;
  }
  return out;
}

// Statement after the colon: arrow hypotheses and the conclusion.
std::string signature_text(const TheoremStatement& t) {
  std::string conclusion = print_term(t.conclusion);
  {
    // a conclusion that would be split into hypotheses on re-parse keeps parentheses
    const auto toks = tokenize(conclusion);
    const auto match = detail::match_brackets(toks);
    if (detail::split_arrows(toks, match, 0, toks.size()).size() > 1)
      conclusion = "(" + conclusion + ")";
  }
  std::string out;
  for (const auto& h : t.hypotheses) {
    if (h.origin == HypothesisOrigin::Header) continue;
    if (h.origin == HypothesisOrigin::NamedArrow) {
      out += "(" + h.name + " : " + print_term(h.proposition) + ") → ";
    } else {
      // antecedent position: lhs of `→`, not rightmost
      const auto wrapped = Term::infix("→", h.proposition, Term::atom("_"));
      std::string s = print_term(wrapped);
      out += s.substr(0, s.size() - std::string(" → _").size()) + " → ";
    }
  }
  return out + conclusion;
}

std::string existential_binders(const std::vector<Binder>& bs) {
  if (bs.size() == 1 && bs[0].type && bs[0].type->kind() == TermKind::Atom)
    return bs[0].name + " : " + print_term(bs[0].type);
  std::string out;
  for (std::size_t i = 0; i < bs.size();) {
    if (!out.empty()) out += ' ';
    if (!bs[i].type) {
      out += bs[i++].name;
      continue;
    }
    std::string names = bs[i].name;
    std::size_t j = i + 1;
    while (j < bs.size() && bs[j].type && terms_equal(bs[j].type, bs[i].type)) names += " " + bs[j++].name;
    out += "(" + names + " : " + print_term(bs[i].type) + ")";
    i = j;
  }
  return out;
}

}  // namespace

bool is_hypothesis_binder(const std::string& name, const TermPtr& type) {
  static constexpr std::array<std::string_view, 17> kPropOps = {
      "=", "≠", "<", ">", "≤", "≥", "∣", "∈", "∉", "⊆", "⊂", "⊇", "⊃", "¬", "∧", "∨", "↔"};
  static constexpr std::array<std::string_view, 9> kTypeAtoms = {"ℕ",    "ℤ",    "ℝ",   "ℚ",   "ℂ",
                                                                 "Prop", "Type", "Nat", "Int"};
  if (type->kind() == TermKind::Notation &&
      std::find(kPropOps.begin(), kPropOps.end(), type->text()) != kPropOps.end())
    return true;
  if (type->kind() == TermKind::Binder && type->quantifier() != Quantifier::Lambda) return true;
  if (type->kind() == TermKind::Atom && (type->text() == "True" || type->text() == "False"))
    return true;
  if (type->kind() == TermKind::Atom &&
      std::find(kTypeAtoms.begin(), kTypeAtoms.end(), type->text()) != kTypeAtoms.end())
    return false;
  return name == "this" || (!name.empty() && name[0] == 'h');
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

std::optional<ProofScript> canonical_proof(std::string_view text) {
  std::string s = trim(strip_comments(text));
  bool is_by = false;
  if (s.rfind("by", 0) == 0 && (s.size() == 2 || std::isspace(static_cast<unsigned char>(s[2])))) {
    is_by = true;
    s = s.substr(2);
  }
  std::vector<std::string> raw_lines;
  {
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) raw_lines.push_back(rtrim(line));
  }
  std::vector<std::string> lines;
  if (!raw_lines.empty()) {
    std::string first = trim(raw_lines[0]);
    if (!first.empty()) lines.push_back(first);
    std::size_t indent = std::string::npos;
    for (std::size_t i = 1; i < raw_lines.size(); ++i) {
      const auto& l = raw_lines[i];
      if (l.empty()) continue;
      indent = std::min(indent, l.find_first_not_of(" \t"));
    }
    for (std::size_t i = 1; i < raw_lines.size(); ++i)
      if (!raw_lines[i].empty()) lines.push_back(raw_lines[i].substr(indent));
  }
  if (lines.size() == 1 && lines[0] == "sorry") return std::nullopt;
  if (lines.empty()) {
    if (is_by) return ProofScript{"by"};
    return std::nullopt;
  }
  if (!is_by) return ProofScript{dedent_join(lines)};
  if (lines.size() == 1) return ProofScript{"by " + lines[0]};
  return ProofScript{"by\n" + dedent_join(lines)};
}

TheoremStatement parse_theorem(std::string_view text) {
  DeclParser d(text);
  const auto& toks = d.toks;
  std::size_t i = d.skip_prefix(0);
  if (i >= toks.size() || !(toks[i].is("theorem") || toks[i].is("lemma")))
    throw SyntaxUnsupported("not a theorem declaration", span_of(toks, i));

  TheoremStatement t;
  i = d.expect_name(i + 1, t.name);

  const std::size_t assign = detail::find_top_level(toks, d.match, i, toks.size(), ":=");
  const std::size_t colon = detail::find_top_level(toks, d.match, i, assign, ":");
  if (colon == assign) throw SyntaxMalformed("expected ':' before the statement", span_of(toks, i));
  d.check_supported(i, assign);
  // An equation bar starts a line and its alternative has a `=>` before the
  // next bar. Other bars are absolute values.
  for (std::size_t bar = detail::find_top_level(toks, d.match, colon, assign, "|"); bar != assign;) {
    const std::size_t next = detail::find_top_level(toks, d.match, bar + 1, assign, "|");
    const bool line_start = bar > 0 && d.stripped.find('\n', toks[bar - 1].end) < toks[bar].begin;
    if (line_start && detail::find_top_level(toks, d.match, bar + 1, next, "=>") != next)
      throw SyntaxUnsupported("pattern-matching equations", span_of(toks, bar));
    bar = next;
  }
  if (colon + 1 >= assign) throw SyntaxMalformed("empty statement", span_of(toks, colon));

  std::size_t inst_counter = 0;
  auto add_hypothesis = [&](std::string name, TermPtr prop, HypothesisOrigin origin) {
    Hypothesis h;
    h.name = std::move(name);
    h.proposition = std::move(prop);
    h.index = t.hypotheses.size();
    h.origin = origin;
    t.hypotheses.push_back(std::move(h));
  };

  // header binders
  while (i < colon) {
    const Token& open = toks[i];
    if (!(open.is("(") || open.is("{") || open.is("[")))
      throw SyntaxUnsupported(fmt::format("unsupported binder syntax '{}'", open.text), span_of(toks, i));
    const std::size_t close = static_cast<std::size_t>(d.match[i]);
    const std::size_t inner_colon = detail::find_top_level(toks, d.match, i + 1, close, ":");
    if (open.is("[")) {
      Binder b;
      b.mode = BinderMode::InstanceImplicit;
      if (inner_colon != close && inner_colon == i + 2 && toks[i + 1].kind == TokenKind::Ident) {
        b.name = toks[i + 1].text;
        b.type = parse_term_tokens(toks, inner_colon + 1, close);
      } else {
        b.name = fmt::format("inst{}", inst_counter++);
        b.synthesized_name = true;
        if (i + 1 >= close) throw SyntaxMalformed("empty instance binder", span_of(toks, i));
        b.type = parse_term_tokens(toks, i + 1, close);
      }
      t.binders.push_back(std::move(b));
    } else {
      if (inner_colon == close || inner_colon == i + 1)
        throw SyntaxUnsupported("binder without a type", span_of(toks, i));
      if (inner_colon + 1 >= close) throw SyntaxMalformed("binder with empty type", span_of(toks, i));
      for (std::size_t k = i + 1; k < inner_colon; ++k)
        if (toks[k].kind != TokenKind::Ident)
          throw SyntaxUnsupported("unsupported binder name", span_of(toks, k));
      const auto type = parse_term_tokens(toks, inner_colon + 1, close);
      for (std::size_t k = i + 1; k < inner_colon; ++k) {
        const std::string& name = toks[k].text;
        if (open.is("(") && is_hypothesis_binder(name, type)) {
          add_hypothesis(name, type, HypothesisOrigin::Header);
        } else {
          t.binders.push_back(
              Binder{name, type, open.is("{") ? BinderMode::Implicit : BinderMode::Explicit, false});
        }
      }
    }
    i = close + 1;
  }

  // statement skeleton
  const auto pieces = detail::split_arrows(toks, d.match, colon + 1, assign);
  std::size_t anon_counter = 0;
  auto used = [&](const std::string& n) {
    for (const auto& b : t.binders)
      if (b.name == n) return true;
    for (const auto& h : t.hypotheses)
      if (h.name == n) return true;
    return false;
  };
  for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
    const auto [a, b] = pieces[p];
    if (a >= b) throw SyntaxMalformed("empty antecedent", span_of(toks, a));
    if (toks[a].is("(") && static_cast<std::size_t>(d.match[a]) == b - 1) {
      const std::size_t ic = detail::find_top_level(toks, d.match, a + 1, b - 1, ":");
      if (ic == a + 2 && toks[a + 1].kind == TokenKind::Ident && ic + 1 < b - 1) {
        const std::string& name = toks[a + 1].text;
        const auto type = parse_term_tokens(toks, ic + 1, b - 1);
        if (is_hypothesis_binder(name, type))
          add_hypothesis(name, type, HypothesisOrigin::NamedArrow);
        else
          t.binders.push_back(Binder{name, type, BinderMode::Explicit, false});
        continue;
      }
    }
    std::string name;
    do name = fmt::format("a{}", anon_counter++);
    while (used(name));
    add_hypothesis(name, parse_term_tokens(toks, a, b), HypothesisOrigin::Arrow);
  }
  const auto [ca, cb] = pieces.back();
  if (ca >= cb) throw SyntaxMalformed("empty conclusion", span_of(toks, ca));
  t.conclusion = parse_term_tokens(toks, ca, cb);
  t.proof = d.proof_after(assign);
  validate(t);
  return t;
}

ExistentialProblem parse_problem(std::string_view text, ProblemKind kind) {
  DeclParser d(text);
  const auto& toks = d.toks;
  std::size_t i = d.skip_prefix(0);
  if (i >= toks.size() || !(toks[i].is("theorem") || toks[i].is("lemma")))
    throw SyntaxUnsupported("not a theorem declaration", span_of(toks, i));
  ExistentialProblem p;
  p.kind = kind;
  i = d.expect_name(i + 1, p.name);
  if (i >= toks.size() || !toks[i].is(":"))
    throw SyntaxMalformed("expected ':' after the problem name", span_of(toks, i));
  const std::size_t assign = detail::find_top_level(toks, d.match, i, toks.size(), ":=");
  d.check_supported(i, assign);
  std::size_t body_start = i + 1;
  if (body_start < assign && toks[body_start].is("∃")) {
    const std::size_t comma = detail::find_top_level(toks, d.match, body_start + 1, assign, ",");
    if (comma == assign) throw SyntaxMalformed("expected ',' after existential binders", span_of(toks, body_start));
    std::size_t k = body_start + 1;
    bool ok = true;
    std::vector<Binder> bs;
    while (k < comma && ok) {
      if (toks[k].is("(")) {
        const std::size_t close = static_cast<std::size_t>(d.match[k]);
        const std::size_t c = detail::find_top_level(toks, d.match, k + 1, close, ":");
        if (c == close || c == k + 1 || c + 1 >= close) {
          ok = false;
          break;
        }
        const auto ty = parse_term_tokens(toks, c + 1, close);
        for (std::size_t n = k + 1; n < c; ++n) {
          if (toks[n].kind != TokenKind::Ident) ok = false;
          bs.push_back(Binder{toks[n].text, ty, BinderMode::Explicit, false});
        }
        k = close + 1;
      } else if (toks[k].kind == TokenKind::Ident) {
        std::vector<std::string> names;
        while (k < comma && toks[k].kind == TokenKind::Ident) names.push_back(toks[k++].text);
        TermPtr ty;
        if (k < comma && toks[k].is(":")) {
          if (k + 1 >= comma) throw SyntaxMalformed("empty binder type", span_of(toks, k));
          ty = parse_term_tokens(toks, k + 1, comma);
          k = comma;
        } else if (k < comma && !toks[k].is("(")) {
          ok = false;  // binder predicate or other form: keep as part of the body
        }
        for (auto& n : names) bs.push_back(Binder{n, ty, BinderMode::Explicit, false});
      } else {
        ok = false;
      }
    }
    if (ok) {
      p.binders = std::move(bs);
      body_start = comma + 1;
    }
  }
  if (body_start >= assign) throw SyntaxMalformed("empty problem body", span_of(toks, body_start));
  p.body = parse_term_tokens(toks, body_start, assign);
  return p;
}

std::string print_statement(const TheoremStatement& t) {
  std::vector<std::string> groups = header_groups(t.binders);
  for (const auto& h : t.hypotheses)
    if (h.origin == HypothesisOrigin::Header)
      groups.push_back("(" + h.name + " : " + print_term(h.proposition) + ")");
  const std::string sig = signature_text(t);
  if (groups.empty()) return "theorem " + t.name + " : " + sig + " :=";
  std::string out = "theorem " + t.name;
  for (const auto& g : groups) out += "\n  " + g;
  out += " :\n  " + sig + " :=";
  return out;
}

std::string print_theorem(const TheoremStatement& t) {
  const std::string proof = t.proof ? t.proof->text : "by sorry";
  return print_statement(t) + " " + indent_proof(proof);
}

std::string print_signature(const ExistentialProblem& p) {
  std::string body = print_term(p.body);
  if (p.binders.empty()) return body;
  return "∃ " + existential_binders(p.binders) + ", " + body;
}

std::string print_statement(const ExistentialProblem& p) {
  return "theorem " + p.name + " : " + print_signature(p) + " := by";
}

std::string print_theorem(const ExistentialProblem& p) { return print_statement(p) + " sorry"; }

// ---------------------------------------------------------------------------
// corpus

namespace {

constexpr std::array<std::string_view, 16> kDeclKeywords = {
    "theorem", "lemma",    "example", "def",   "abbrev",   "instance", "structure", "class",
    "inductive", "axiom",  "opaque",  "macro", "syntax",   "notation", "elab",      "irreducible_def"};

constexpr std::array<std::string_view, 12> kCommands = {
    "import", "open",      "namespace", "section", "end",   "variable",
    "universe", "set_option", "attribute", "mutual", "export", "noncomputable section"};

bool one_of(std::string_view w, auto const& list) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

std::string first_word(std::string_view line) {
  std::size_t j = 0;
  while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
  return std::string(line.substr(0, j));
}

}  // namespace

SourceUnit parse_source(std::string text) {
  SourceUnit unit;
  unit.raw = std::move(text);
  const std::string& raw = unit.raw;

  std::string stripped;
  try {
    stripped = strip_comments(raw);
  } catch (const SyntaxError& e) {
    if (normalize_whitespace(raw).empty()) return unit;
    unit.skipped.push_back({Span{0, raw.size()}, 1, e.what()});
    return unit;
  }

  struct Start {
    std::size_t offset;
    std::size_t line;
    bool decl;
  };
  std::vector<Start> starts;
  bool pending_prefix = false;
  std::size_t line_no = 0;
  for (std::size_t off = 0; off < stripped.size();) {
    std::size_t eol = stripped.find('\n', off);
    if (eol == std::string::npos) eol = stripped.size();
    ++line_no;
    const std::string_view line(stripped.data() + off, eol - off);
    if (!line.empty() && !std::isspace(static_cast<unsigned char>(line[0]))) {
      const std::string w = first_word(line);
      const bool is_prefix = w.rfind("@[", 0) == 0 || one_of(w, kModifiers);
      const bool is_decl = one_of(w, kDeclKeywords);
      bool has_decl_kw = is_decl;
      if (is_prefix) {
        // `@[simp] theorem foo ...` on one line, or attributes alone
        std::istringstream words{std::string(line)};
        std::string ww;
        while (words >> ww) has_decl_kw = has_decl_kw || one_of(ww, kDeclKeywords);
      }
      if (is_prefix || is_decl) {
        if (!(pending_prefix && is_decl)) starts.push_back({off, line_no, true});
        pending_prefix = is_prefix && !has_decl_kw;
      } else if (one_of(w, kCommands) || w[0] == '#') {
        starts.push_back({off, line_no, false});
        pending_prefix = false;
      }
    }
    off = eol + 1;
  }

  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (!starts[k].decl) continue;
    const std::size_t begin = starts[k].offset;
    std::size_t end = k + 1 < starts.size() ? starts[k + 1].offset : raw.size();
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    const Span span{begin, end};
    const std::string_view decl(raw.data() + begin, end - begin);
    try {
      unit.theorems.push_back(parse_theorem(decl));
      unit.theorem_spans.push_back(span);
    } catch (const Error& e) {
      unit.skipped.push_back({span, starts[k].line, e.what()});
    }
  }
  return unit;
}

SourceUnit parse_corpus(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(fmt::format("read error on {}", file.string()));
  return parse_source(ss.str());
}

}  // namespace cexgen
