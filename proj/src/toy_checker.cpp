#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>

#include "cexgen/lean_surface.hpp"
#include "cexgen/verification.hpp"

namespace cexgen {

namespace {

enum class NumType { Nat, Int };

enum class Tri { False, True, Unknown };

Tri tri(bool b) { return b ? Tri::True : Tri::False; }
Tri tri_not(Tri a) { return a == Tri::Unknown ? a : tri(a == Tri::False); }
Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}
Tri tri_or(Tri a, Tri b) { return tri_not(tri_and(tri_not(a), tri_not(b))); }

[[noreturn]] void outside(const std::string& what) { throw OutsideFragment(what); }

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) outside("integer overflow");
  return r;
}
std::int64_t sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) outside("integer overflow");
  return r;
}
std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) outside("integer overflow");
  return r;
}

// Euclidean division and remainder, with x / 0 = 0 and x % 0 = x.
std::int64_t ediv(std::int64_t a, std::int64_t b) {
  if (b == 0) return 0;
  std::int64_t q = a / b;
  if (a % b < 0) q = b > 0 ? q - 1 : q + 1;
  return q;
}
std::int64_t emod(std::int64_t a, std::int64_t b) {
  if (b == 0) return a;
  return sub(a, mul(b, ediv(a, b)));
}

std::optional<NumType> type_from_term(const TermPtr& t) {
  if (!t || t->kind() != TermKind::Atom) return std::nullopt;
  if (t->text() == "ℕ" || t->text() == "Nat") return NumType::Nat;
  if (t->text() == "ℤ" || t->text() == "Int") return NumType::Int;
  return std::nullopt;
}

NumType join(NumType a, NumType b) { return a == NumType::Int || b == NumType::Int ? NumType::Int : NumType::Nat; }

bool is_number(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_arith(const TermPtr& t) {
  if (t->kind() != TermKind::Notation) return false;
  static const std::set<std::string> ops = {"+", "-", "*", "/", "%", "^"};
  return ops.count(t->text()) > 0;
}

struct Var {
  std::int64_t value;
  NumType type;
};

class Evaluator {
 public:
  explicit Evaluator(long bound) : bound_(bound) {}

  std::vector<std::pair<std::string, Var>> scope;

  Tri prop(const TermPtr& t) {
    switch (t->kind()) {
      case TermKind::Atom:
        if (t->text() == "True") return Tri::True;
        if (t->text() == "False") return Tri::False;
        outside(fmt::format("unknown proposition '{}'", t->text()));
      case TermKind::Raw:
        outside("opaque term");
      case TermKind::Binder:
        return quantifier(t);
      case TermKind::App:
        return predicate(t);
      case TermKind::Notation:
        break;
    }
    const auto& c = t->children();
    const std::string& op = t->text();
    if (t->is_prefix()) {
      if (op == "¬") return tri_not(prop(c[0]));
      outside(fmt::format("prefix '{}' in proposition", op));
    }
    if (op == "∧") return tri_and(prop(c[0]), prop(c[1]));
    if (op == "∨") return tri_or(prop(c[0]), prop(c[1]));
    if (op == "→") return tri_or(tri_not(prop(c[0])), prop(c[1]));
    if (op == "↔") {
      const Tri a = prop(c[0]), b = prop(c[1]);
      if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
      return tri(a == b);
    }
    const NumType ty = join(leaf_type(c[0]), leaf_type(c[1]));
    const std::int64_t a = num(c[0], ty), b = num(c[1], ty);
    if (op == "=") return tri(a == b);
    if (op == "≠") return tri(a != b);
    if (op == "<") return tri(a < b);
    if (op == ">") return tri(a > b);
    if (op == "≤") return tri(a <= b);
    if (op == "≥") return tri(a >= b);
    if (op == "∣") return tri(a == 0 ? b == 0 : emod(b, a) == 0);
    outside(fmt::format("operator '{}' in proposition", op));
  }

  std::int64_t num(const TermPtr& t, NumType ctx) {
    switch (t->kind()) {
      case TermKind::Atom: {
        const std::string& s = t->text();
        if (is_number(s)) {
          std::int64_t v = 0;
          for (char ch : s) v = add(mul(v, 10), ch - '0');
          return v;
        }
        const Var* v = lookup(s);
        if (!v) outside(fmt::format("unknown identifier '{}'", s));
        if (v->type == NumType::Int && ctx == NumType::Nat) outside("ℤ value in ℕ context");
        return v->value;
      }
      case TermKind::App: {
        const auto& c = t->children();
        const auto& f = c[0];
        if (f->kind() == TermKind::Atom && c.size() == 3 && (f->text() == "min" || f->text() == "max")) {
          const std::int64_t a = num(c[1], ctx), b = num(c[2], ctx);
          return f->text() == "min" ? std::min(a, b) : std::max(a, b);
        }
        outside(fmt::format("application '{}'", print_term(t)));
      }
      case TermKind::Binder:
        outside("binder in arithmetic");
      case TermKind::Raw:
        outside("opaque term");
      case TermKind::Notation:
        break;
    }
    const auto& c = t->children();
    const std::string& op = t->text();
    if (op == ":") {
      const auto ty = type_from_term(c[1]);
      if (!ty) outside("ascription to a non-integer type");
      const std::int64_t v = num(c[0], *ty);
      if (*ty == NumType::Int && ctx == NumType::Nat) outside("ℤ value in ℕ context");
      return v;
    }
    if (t->is_prefix()) {
      if (op == "↑") {
        const NumType inner = leaf_type(c[0]);
        if (inner == NumType::Int && ctx == NumType::Nat) outside("ℤ value in ℕ context");
        return num(c[0], inner);
      }
      if (op == "-") {
        if (ctx == NumType::Nat) outside("negation in ℕ");
        return sub(0, num(c[0], ctx));
      }
      outside(fmt::format("prefix '{}' in arithmetic", op));
    }
    if (op == "^") {
      const std::int64_t base = num(c[0], ctx);
      if (leaf_type(c[1]) != NumType::Nat) outside("non-natural exponent");
      const std::int64_t e = num(c[1], NumType::Nat);
      if (base == 0) return e == 0 ? 1 : 0;
      if (base == 1) return 1;
      if (base == -1) return e % 2 == 0 ? 1 : -1;
      std::int64_t r = 1;
      for (std::int64_t i = 0; i < e; ++i) r = mul(r, base);  // overflows within 63 steps
      return r;
    }
    const std::int64_t a = num(c[0], ctx), b = num(c[1], ctx);
    if (op == "+") return add(a, b);
    if (op == "*") return mul(a, b);
    if (op == "-") return ctx == NumType::Nat ? std::max<std::int64_t>(0, sub(a, b)) : sub(a, b);
    if (op == "/") return ediv(a, b);
    if (op == "%") return emod(a, b);
    outside(fmt::format("operator '{}' in arithmetic", op));
  }

 private:
  long bound_;

  const Var* lookup(const std::string& name) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  // Type of an arithmetic tree: ℤ when some leaf is ℤ. Literals and
  // coercions adapt to the surrounding type.
  NumType leaf_type(const TermPtr& t) const {
    if (t->kind() == TermKind::Atom) {
      if (const Var* v = lookup(t->text())) return v->type;
      return NumType::Nat;
    }
    if (t->is_op(":")) return type_from_term(t->children()[1]).value_or(NumType::Nat);
    if (t->is_op("↑")) return NumType::Nat;
    if (t->is_prefix() && t->is_op("-")) return leaf_type(t->children()[0]);
    if (t->is_op("^")) return leaf_type(t->children()[0]);
    if (is_arith(t)) return join(leaf_type(t->children()[0]), leaf_type(t->children()[1]));
    if (t->kind() == TermKind::App) {
      NumType r = NumType::Nat;
      for (std::size_t i = 1; i < t->children().size(); ++i) r = join(r, leaf_type(t->children()[i]));
      return r;
    }
    return NumType::Nat;
  }

  Tri predicate(const TermPtr& t) {
    const auto& c = t->children();
    if (c[0]->kind() != TermKind::Atom || c.size() != 2) outside(fmt::format("predicate '{}'", print_term(t)));
    const std::string& f = c[0]->text();
    const NumType ty = leaf_type(c[1]);
    const std::int64_t v = num(c[1], ty);
    if (f == "Even") return tri(emod(v, 2) == 0);
    if (f == "Odd") return tri(emod(v, 2) == 1);
    if (f == "Nat.Prime" || f == "Prime" || f == "Int.Prime") {
      if (v < 2) return Tri::False;
      for (std::int64_t d = 2; d <= v / d; ++d)
        if (v % d == 0) return Tri::False;
      return Tri::True;
    }
    outside(fmt::format("predicate '{}'", f));
  }

  Tri quantifier(const TermPtr& t) {
    if (t->quantifier() == Quantifier::Lambda) outside("lambda in proposition");
    NumType ty = NumType::Nat;
    if (t->binder_type()) {
      const auto bt = type_from_term(t->binder_type());
      if (!bt) outside(fmt::format("quantifier over '{}'", print_term(t->binder_type())));
      ty = *bt;
    }
    std::optional<std::int64_t> lo, hi;
    if (ty == NumType::Nat) lo = 0;
    if (!t->pred_op().empty()) {
      const std::int64_t v = num(t->pred_rhs(), ty);
      const std::string& p = t->pred_op();
      if (p == "≥") lo = std::max(lo.value_or(v), v);
      else if (p == ">") lo = std::max(lo.value_or(v + 1), add(v, 1));
      else if (p == "≤") hi = v;
      else if (p == "<") hi = sub(v, 1);
      else outside(fmt::format("binder predicate '{}'", p));
    }
    const bool forall = t->quantifier() == Quantifier::Forall;

    std::vector<std::int64_t> values;
    bool exhaustive = false;
    if (lo && hi) {
      if (*hi < *lo) {
        exhaustive = true;
      } else if (*hi - *lo < bound_) {
        exhaustive = true;
        for (std::int64_t v = *lo; v <= *hi; ++v) values.push_back(v);
      }
    }
    if (!exhaustive) {
      if (lo) {
        for (long i = 0; i < bound_; ++i) values.push_back(*lo + i);
      } else if (hi) {
        for (long i = 0; i < bound_; ++i) values.push_back(*hi - i);
      } else {
        values.push_back(0);
        for (long i = 1; static_cast<long>(values.size()) < bound_; ++i) {
          values.push_back(i);
          values.push_back(-i);
        }
      }
    }

    Tri acc = exhaustive ? tri(forall) : Tri::Unknown;
    for (std::int64_t v : values) {
      scope.emplace_back(t->text(), Var{v, ty});
      const Tri r = prop(t->body());
      scope.pop_back();
      if (forall && r == Tri::False) return Tri::False;
      if (!forall && r == Tri::True) return Tri::True;
      if (r == Tri::Unknown) acc = Tri::Unknown;
    }
    return acc;
  }
};

std::vector<std::string> split_top_commas(std::string_view s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (ch == '(' || ch == '[' || ch == '{') ++depth;
    else if (ch == ')' || ch == ']' || ch == '}') --depth;
    else if (s.compare(i, 3, "⟨") == 0) ++depth;
    else if (s.compare(i, 3, "⟩") == 0) --depth;
    else if (ch == ',' && depth == 0) {
      parts.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.emplace_back(s.substr(start));
  for (auto& p : parts) p = normalize_whitespace(p);
  return parts;
}

std::string strip_outer(std::string s) {
  s = normalize_whitespace(s);
  for (;;) {
    if (s.size() >= 6 && s.rfind("⟨", 0) == 0 && s.compare(s.size() - 3, 3, "⟩") == 0)
      s = normalize_whitespace(s.substr(3, s.size() - 6));
    else if (s.size() >= 2 && s.front() == '(' && s.back() == ')' &&
             split_top_commas(s.substr(1, s.size() - 2)).size() > 1)
      s = normalize_whitespace(s.substr(1, s.size() - 2));
    else
      return s;
  }
}

}  // namespace

Witness parse_witness(const std::string& text) {
  Witness w;
  const std::string s = strip_outer(text);
  if (s.empty()) throw OutsideFragment("empty witness");
  for (const auto& part : split_top_commas(s)) {
    if (part.empty()) throw OutsideFragment("empty witness component");
    std::size_t eq = part.find(":=");
    std::size_t len = 2;
    if (eq == std::string::npos) {
      eq = part.find('=');
      len = 1;
    }
    if (eq != std::string::npos) {
      const std::string name = normalize_whitespace(part.substr(0, eq));
      const std::string value = normalize_whitespace(part.substr(eq + len));
      if (!name.empty() && name.find(' ') == std::string::npos && !value.empty()) {
        w.named[name] = value;
        continue;
      }
    }
    w.positional.push_back(part);
  }
  return w;
}

VerificationResult toy_check(const ExistentialProblem& problem, const Witness& witness,
                             const ToyOptions& opts) {
  VerificationResult r;
  r.id = problem.name;
  Evaluator ev(opts.bound);
  if (witness.positional.size() + witness.named.size() != problem.binders.size())
    throw OutsideFragment(fmt::format("witness has {} components for {} binders",
                                      witness.positional.size() + witness.named.size(),
                                      problem.binders.size()));
  std::size_t next_positional = 0;
  for (const auto& b : problem.binders) {
    const auto ty = type_from_term(b.type);
    if (!ty) throw OutsideFragment(fmt::format("binder {} has non-integer type", b.name));
    std::string text;
    if (auto it = witness.named.find(b.name); it != witness.named.end()) {
      text = it->second;
    } else if (next_positional < witness.positional.size()) {
      text = witness.positional[next_positional++];
    } else {
      throw OutsideFragment(fmt::format("no witness for {}", b.name));
    }
    const auto value_term = parse_term(text);
    const std::int64_t v = ev.num(value_term, NumType::Int);
    if (*ty == NumType::Nat && v < 0) {
      r.status = VerifyStatus::Failed;
      r.diagnostics.push_back({"error", fmt::format("witness {} = {} is not a natural number", b.name, v)});
      return r;
    }
    ev.scope.emplace_back(b.name, Var{v, *ty});
  }
  const Tri value = ev.prop(problem.body);
  if (value == Tri::True) {
    r.status = VerifyStatus::Verified;
  } else {
    r.status = VerifyStatus::Failed;
    r.diagnostics.push_back(
        {"error", value == Tri::False ? "witness does not satisfy the statement" : "bound exceeded"});
  }
  return r;
}

}  // namespace cexgen
