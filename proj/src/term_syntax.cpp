// Pratt parser and minimal-parenthesis printer for statement terms, using
// Lean 4 operator precedences.

#include <array>
#include <optional>
#include <string>

#include "cexgen/errors.hpp"
#include "cexgen/lean_surface.hpp"
#include "syntax_detail.hpp"

namespace cexgen {

namespace {

constexpr int kMax = 1024;
constexpr int kArg = 1025;
constexpr int kLead = 1023;

enum class Assoc { Left, Right, None };

struct InfixOp {
  std::string_view op;
  int prec;
  Assoc assoc;
  int lhs() const { return assoc == Assoc::Left ? prec : prec + 1; }
  int rhs() const { return assoc == Assoc::Right ? prec : prec + 1; }
};

constexpr std::array kInfix = {
    InfixOp{"→", 25, Assoc::Right},  InfixOp{"↔", 20, Assoc::None},  InfixOp{"∨", 30, Assoc::Right},
    InfixOp{"||", 30, Assoc::Right}, InfixOp{"∧", 35, Assoc::Right}, InfixOp{"&&", 35, Assoc::Right},
    InfixOp{"×", 35, Assoc::Right},  InfixOp{"=", 50, Assoc::None},  InfixOp{"≠", 50, Assoc::None},
    InfixOp{"<", 50, Assoc::None},   InfixOp{">", 50, Assoc::None},  InfixOp{"≤", 50, Assoc::None},
    InfixOp{"≥", 50, Assoc::None},   InfixOp{"∣", 50, Assoc::None},  InfixOp{"∈", 50, Assoc::None},
    InfixOp{"∉", 50, Assoc::None},   InfixOp{"⊆", 50, Assoc::None},  InfixOp{"⊂", 50, Assoc::None},
    InfixOp{"⊇", 50, Assoc::None},   InfixOp{"⊃", 50, Assoc::None},  InfixOp{"==", 50, Assoc::None},
    InfixOp{"+", 65, Assoc::Left},   InfixOp{"-", 65, Assoc::Left},  InfixOp{"∪", 65, Assoc::Left},
    InfixOp{"*", 70, Assoc::Left},   InfixOp{"/", 70, Assoc::Left},  InfixOp{"%", 70, Assoc::Left},
    InfixOp{"∩", 70, Assoc::Left},   InfixOp{"\\", 70, Assoc::Left}, InfixOp{"•", 73, Assoc::Right},
    InfixOp{"^", 75, Assoc::Right},  InfixOp{"∘", 90, Assoc::Left},
};

struct PrefixOp {
  std::string_view op;
  int result;
  int arg;
};

constexpr std::array kPrefix = {
    PrefixOp{"¬", kMax, 40},
    PrefixOp{"-", 75, 75},
    PrefixOp{"↑", kMax, kMax},
    PrefixOp{"√", 100, 100},
};

constexpr std::array<std::string_view, 11> kBinderPreds = {"≥", ">", "≤", "<", "≠", "∈",
                                                          "∉", "⊆", "⊂", "⊇", "⊃"};

const InfixOp* find_infix(std::string_view op) {
  for (const auto& o : kInfix)
    if (o.op == op) return &o;
  return nullptr;
}

const PrefixOp* find_prefix(std::string_view op) {
  for (const auto& o : kPrefix)
    if (o.op == op) return &o;
  return nullptr;
}

bool is_binder_pred(std::string_view op) {
  for (auto p : kBinderPreds)
    if (p == op) return true;
  return false;
}

struct Fail {};

class Parser {
 public:
  Parser(const std::vector<Token>& toks, const std::vector<long>& match, std::size_t first,
         std::size_t last)
      : toks_(toks), match_(match), pos_(first), end_(last) {}

  TermPtr parse_all() {
    if (pos_ >= end_) throw Fail{};
    auto t = parse_expr(0).first;
    if (pos_ != end_) throw Fail{};
    return t;
  }

 private:
  const Token* peek() const { return pos_ < end_ ? &toks_[pos_] : nullptr; }

  bool is_arg_start(const Token& t) const {
    if (t.kind == TokenKind::Ident || t.kind == TokenKind::Number || t.kind == TokenKind::String)
      return true;
    return t.kind == TokenKind::Symbol && detail::is_open_bracket(t.text);
  }

  std::pair<TermPtr, int> parse_expr(int min_prec) {
    auto [lhs, lhs_prec] = parse_leading();
    for (;;) {
      const Token* t = peek();
      if (!t) break;
      if (lhs_prec >= kMax && min_prec <= kMax && is_arg_start(*t)) {
        std::vector<TermPtr> children;
        if (lhs->kind() == TermKind::App)
          children = lhs->children();
        else
          children.push_back(lhs);
        while (peek() && is_arg_start(*peek())) children.push_back(parse_arg());
        lhs = Term::app(std::move(children));
        lhs_prec = kMax;
        continue;
      }
      if (t->kind != TokenKind::Symbol) break;
      const InfixOp* op = find_infix(t->text);
      if (!op || op->prec < min_prec || lhs_prec < op->lhs()) break;
      ++pos_;
      auto rhs = parse_expr(op->rhs()).first;
      lhs = Term::infix(std::string(op->op), lhs, rhs);
      lhs_prec = op->prec;
    }
    return {lhs, lhs_prec};
  }

  TermPtr parse_arg() {
    const Token& t = toks_[pos_];
    if (t.kind == TokenKind::Symbol) {
      if (t.text == "(") return parse_paren();
      return parse_bracket_raw();
    }
    ++pos_;
    return Term::atom(t.text);
  }

  std::pair<TermPtr, int> parse_leading() {
    const Token* t = peek();
    if (!t) throw Fail{};
    switch (t->kind) {
      case TokenKind::Ident:
      case TokenKind::Number:
      case TokenKind::String:
        ++pos_;
        return {Term::atom(t->text), kMax};
      case TokenKind::Keyword:
        if (t->text == "fun" || t->text == "λ") return {parse_binder(Quantifier::Lambda), kLead};
        throw Fail{};
      case TokenKind::Symbol:
        break;
    }
    if (t->text == "(") return {parse_paren(), kMax};
    if (detail::is_open_bracket(t->text)) return {parse_bracket_raw(), kMax};
    if (t->text == "∀") return {parse_binder(Quantifier::Forall), kLead};
    if (t->text == "∃") return {parse_binder(Quantifier::Exists), kLead};
    if (const PrefixOp* op = find_prefix(t->text)) {
      ++pos_;
      auto arg = parse_expr(op->arg).first;
      return {Term::prefix(std::string(op->op), arg), op->result};
    }
    throw Fail{};
  }

  std::size_t close_of(std::size_t open) const {
    const long c = match_[open];
    if (c < 0 || static_cast<std::size_t>(c) >= end_) throw Fail{};
    return static_cast<std::size_t>(c);
  }

  TermPtr parse_paren() {
    const std::size_t open = pos_;
    const std::size_t close = close_of(open);
    pos_ = close + 1;
    const std::size_t a = open + 1;
    if (a == close) return Term::atom("()");
    if (auto t = try_strict(a, close)) return t;
    const std::size_t colon = detail::find_top_level(toks_, match_, a, close, ":");
    if (colon != close) {
      auto e = try_strict(a, colon);
      auto ty = try_strict(colon + 1, close);
      if (e && ty) return Term::infix(":", e, ty);
    }
    return Term::raw(join_tokens(toks_, a, close));
  }

  TermPtr parse_bracket_raw() {
    const std::size_t open = pos_;
    const std::size_t close = close_of(open);
    pos_ = close + 1;
    return Term::raw(join_tokens(toks_, open, close + 1));
  }

  TermPtr try_strict(std::size_t a, std::size_t b) const {
    try {
      Parser sub(toks_, match_, a, b);
      return sub.parse_all();
    } catch (const Fail&) {
      return nullptr;
    }
  }

  TermPtr piece(std::size_t a, std::size_t b) const {
    if (a >= b) throw Fail{};
    if (auto t = try_strict(a, b)) return t;
    return Term::raw(join_tokens(toks_, a, b));
  }

  struct Spec {
    std::string name;
    TermPtr type;
    std::string pred_op;
    TermPtr pred_rhs;
  };

  static bool is_name(const Token& t) { return t.kind == TokenKind::Ident; }

  TermPtr parse_binder(Quantifier q) {
    ++pos_;
    std::size_t sep = end_;
    if (q == Quantifier::Lambda) {
      sep = detail::find_top_level(toks_, match_, pos_, end_, "=>");
      if (sep == end_) sep = detail::find_top_level(toks_, match_, pos_, end_, "↦");
    } else {
      sep = detail::find_top_level(toks_, match_, pos_, end_, ",");
    }
    if (sep == end_) throw Fail{};

    std::vector<Spec> specs;
    std::size_t i = pos_;
    while (i < sep) {
      const Token& t = toks_[i];
      if (is_name(t)) {
        std::vector<std::string> names;
        while (i < sep && is_name(toks_[i])) names.push_back(toks_[i++].text);
        if (i == sep) {
          for (auto& n : names) specs.push_back({n, nullptr, {}, nullptr});
          break;
        }
        const Token& nx = toks_[i];
        if (nx.is(":")) {
          auto ty = piece(i + 1, sep);
          for (auto& n : names) specs.push_back({n, ty, {}, nullptr});
          i = sep;
          break;
        }
        if (nx.kind == TokenKind::Symbol && is_binder_pred(nx.text) && names.size() == 1 &&
            q != Quantifier::Lambda) {
          specs.push_back({names[0], nullptr, nx.text, piece(i + 1, sep)});
          i = sep;
          break;
        }
        if (!nx.is("(")) throw Fail{};
        for (auto& n : names) specs.push_back({n, nullptr, {}, nullptr});
        continue;
      }
      if (t.is("(")) {
        const std::size_t close = close_of(i);
        const std::size_t colon = detail::find_top_level(toks_, match_, i + 1, close, ":");
        if (colon == close || colon == i + 1) throw Fail{};
        for (std::size_t k = i + 1; k < colon; ++k)
          if (!is_name(toks_[k])) throw Fail{};
        auto ty = piece(colon + 1, close);
        for (std::size_t k = i + 1; k < colon; ++k) specs.push_back({toks_[k].text, ty, {}, nullptr});
        i = close + 1;
        continue;
      }
      throw Fail{};
    }
    if (specs.empty()) throw Fail{};

    pos_ = sep + 1;
    if (pos_ >= end_) throw Fail{};
    TermPtr body = parse_expr(0).first;
    for (auto it = specs.rbegin(); it != specs.rend(); ++it)
      body = Term::binder(q, it->name, it->type, it->pred_op, it->pred_rhs, body);
    return body;
  }

  const std::vector<Token>& toks_;
  const std::vector<long>& match_;
  std::size_t pos_;
  std::size_t end_;
};

// ---------------------------------------------------------------------------
// printing

bool self_delimited(const std::string& text) {
  const auto toks = tokenize(text);
  if (toks.size() < 2 || !detail::is_open_bracket(toks.front().text) || toks.front().text == "(")
    return false;
  try {
    const auto match = detail::match_brackets(toks);
    return match[0] == static_cast<long>(toks.size() - 1);
  } catch (const SyntaxError&) {
    return false;
  }
}

std::string print(const TermPtr& t, int min_prec, bool rightmost, bool root);

std::string print_binder_group(const TermPtr& t) {
  const Quantifier q = t->quantifier();
  std::vector<const Term*> group{t.get()};
  if (t->pred_op().empty()) {
    const Term* cur = t.get();
    while (cur->body()->kind() == TermKind::Binder && cur->body()->quantifier() == q &&
           cur->body()->pred_op().empty()) {
      cur = cur->body().get();
      group.push_back(cur);
    }
  }
  const Term* last = group.back();
  std::string head = q == Quantifier::Forall ? "∀ " : q == Quantifier::Exists ? "∃ " : "fun ";
  const std::string sep = q == Quantifier::Lambda ? " =>" : ",";

  std::string specs;
  if (group.size() == 1 && !t->pred_op().empty()) {
    specs = t->text() + " " + t->pred_op() + " " + print(t->pred_rhs(), 0, false, false);
  } else if (group.size() == 1 && t->binder_type() && q != Quantifier::Lambda) {
    specs = t->text() + " : " + print(t->binder_type(), 0, false, false);
  } else {
    for (std::size_t i = 0; i < group.size();) {
      if (!specs.empty()) specs += ' ';
      const Term* b = group[i];
      if (!b->binder_type()) {
        specs += b->text();
        ++i;
        continue;
      }
      std::string names = b->text();
      std::size_t j = i + 1;
      while (j < group.size() && group[j]->binder_type() &&
             terms_equal(group[j]->binder_type(), b->binder_type()))
        names += " " + group[j++]->text();
      specs += "(" + names + " : " + print(b->binder_type(), 0, false, false) + ")";
      i = j;
    }
  }
  return head + specs + sep + " " + print(last->body(), 0, true, false);
}

std::string print(const TermPtr& t, int min_prec, bool rightmost, bool root) {
  switch (t->kind()) {
    case TermKind::Atom:
      return t->text();
    case TermKind::Raw:
      if (root || self_delimited(t->text())) return t->text();
      return "(" + t->text() + ")";
    case TermKind::App: {
      std::string s = print(t->children()[0], kMax, false, false);
      for (std::size_t i = 1; i < t->children().size(); ++i)
        s += " " + print(t->children()[i], kArg, false, false);
      return min_prec > kMax ? "(" + s + ")" : s;
    }
    case TermKind::Binder: {
      const bool paren = min_prec > kLead || !rightmost;
      auto s = print_binder_group(t);
      return paren ? "(" + s + ")" : s;
    }
    case TermKind::Notation:
      break;
  }
  if (t->is_op(":") && t->is_infix())
    return "(" + print(t->children()[0], 0, false, false) + " : " +
           print(t->children()[1], 0, true, false) + ")";
  if (t->is_prefix()) {
    const PrefixOp* op = find_prefix(t->text());
    const int result = op ? op->result : kMax;
    const int arg = op ? op->arg : kMax;
    const bool paren = result < min_prec;
    std::string operand = print(t->children()[0], arg, paren || rightmost, false);
    std::string s = t->text();
    if (t->text() == "¬" || (t->text() == "-" && !operand.empty() && operand[0] == '-')) s += ' ';
    s += operand;
    return paren ? "(" + s + ")" : s;
  }
  const InfixOp* op = find_infix(t->text());
  const int prec = op ? op->prec : 0;
  const bool paren = prec < min_prec;
  std::string s = print(t->children()[0], op ? op->lhs() : kArg, false, false) + " " + t->text() +
                  " " + print(t->children()[1], op ? op->rhs() : kArg, paren || rightmost, false);
  return paren ? "(" + s + ")" : s;
}

}  // namespace

namespace detail {

bool is_open_bracket(std::string_view s) {
  return s == "(" || s == "[" || s == "{" || s == "⟨" || s == "⦃" || s == "⌊" || s == "⌈";
}

bool is_close_bracket(std::string_view s) {
  return s == ")" || s == "]" || s == "}" || s == "⟩" || s == "⦄" || s == "⌋" || s == "⌉";
}

namespace {
std::string_view closer_for(std::string_view open) {
  if (open == "(") return ")";
  if (open == "[") return "]";
  if (open == "{") return "}";
  if (open == "⟨") return "⟩";
  if (open == "⦃") return "⦄";
  if (open == "⌊") return "⌋";
  return "⌉";
}
}  // namespace

std::vector<long> match_brackets(const std::vector<Token>& tokens) {
  std::vector<long> match(tokens.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind != TokenKind::Symbol) continue;
    if (is_open_bracket(t.text)) {
      stack.push_back(i);
    } else if (is_close_bracket(t.text)) {
      if (stack.empty() || closer_for(tokens[stack.back()].text) != t.text)
        throw SyntaxMalformed("unbalanced '" + t.text + "'", {t.begin, t.end});
      match[stack.back()] = static_cast<long>(i);
      match[i] = static_cast<long>(stack.back());
      stack.pop_back();
    }
  }
  if (!stack.empty()) {
    const auto& t = tokens[stack.back()];
    throw SyntaxMalformed("unclosed '" + t.text + "'", {t.begin, t.end});
  }
  return match;
}

std::size_t find_top_level(const std::vector<Token>& tokens, const std::vector<long>& match,
                           std::size_t first, std::size_t last, std::string_view text) {
  for (std::size_t i = first; i < last; ++i) {
    if (tokens[i].kind == TokenKind::Symbol && is_open_bracket(tokens[i].text) && match[i] >= 0) {
      i = static_cast<std::size_t>(match[i]);
      continue;
    }
    if (tokens[i].kind != TokenKind::String && tokens[i].text == text) return i;
  }
  return last;
}

std::vector<std::pair<std::size_t, std::size_t>> split_arrows(const std::vector<Token>& tokens,
                                                               const std::vector<long>& match,
                                                               std::size_t first, std::size_t last) {
  static constexpr std::array<std::string_view, 14> kCapture = {
      "∀", "∃", "Π", "∑", "∏", "⋃", "⋂", "↔", "<|", "|>", "$", ",", "|", "∃!"};
  std::vector<std::pair<std::size_t, std::size_t>> pieces;
  std::size_t start = first;
  for (std::size_t i = first; i < last; ++i) {
    const auto& t = tokens[i];
    if (t.kind == TokenKind::Keyword) break;
    if (t.kind != TokenKind::Symbol) continue;
    if (is_open_bracket(t.text) && match[i] >= 0) {
      i = static_cast<std::size_t>(match[i]);
      continue;
    }
    bool capture = false;
    for (auto c : kCapture) capture = capture || t.text == c;
    if (capture) break;
    if (t.text == "→") {
      pieces.emplace_back(start, i);
      start = i + 1;
    }
  }
  pieces.emplace_back(start, last);
  return pieces;
}

}  // namespace detail

TermPtr parse_term_tokens(const std::vector<Token>& tokens, std::size_t first, std::size_t last) {
  const auto match = detail::match_brackets(tokens);
  if (first >= last) throw SyntaxMalformed("empty term", {});
  try {
    Parser p(tokens, match, first, last);
    return p.parse_all();
  } catch (const Fail&) {
    return Term::raw(join_tokens(tokens, first, last));
  }
}

TermPtr parse_term(std::string_view text) {
  const auto tokens = tokenize(strip_comments(text));
  return parse_term_tokens(tokens, 0, tokens.size());
}

std::string print_term(const TermPtr& t) { return print(t, 0, true, true); }

}  // namespace cexgen
