#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cexgen {

class Term;
using TermPtr = std::shared_ptr<const Term>;

enum class TermKind { Atom, App, Binder, Notation, Raw };

enum class Quantifier { Forall, Exists, Lambda };

// Immutable statement term. Nodes are shared freely between statements.
//
//   Atom      identifier or literal (`x`, `523`, `True`)
//   App       children = {function, arg0, arg1, ...}
//   Binder    one bound name; optional type, optional binder predicate
//             (`∀ n ≥ 5, ...`), and a body
//   Notation  prefix (1 child) or infix (2 children) operator; op ":" is a
//             type ascription `(e : T)`
//   Raw       verbatim text outside the structured grammar, with the
//             identifiers found in it by the lexer
class Term {
 public:
  static TermPtr atom(std::string text);
  static TermPtr app(std::vector<TermPtr> children);
  static TermPtr binder(Quantifier q, std::string name, TermPtr type, std::string pred_op,
                        TermPtr pred_rhs, TermPtr body);
  static TermPtr prefix(std::string op, TermPtr operand);
  static TermPtr infix(std::string op, TermPtr lhs, TermPtr rhs);
  static TermPtr raw(std::string text);

  TermKind kind() const { return kind_; }
  // Atom text, notation operator, binder name or raw text.
  const std::string& text() const { return text_; }
  const std::vector<TermPtr>& children() const { return children_; }

  Quantifier quantifier() const { return quantifier_; }
  const TermPtr& binder_type() const { return children_[0]; }
  const std::string& pred_op() const { return pred_op_; }
  const TermPtr& pred_rhs() const { return children_[1]; }
  const TermPtr& body() const { return children_[2]; }

  bool is_prefix() const { return kind_ == TermKind::Notation && children_.size() == 1; }
  bool is_infix() const { return kind_ == TermKind::Notation && children_.size() == 2; }
  bool is_op(std::string_view op) const { return kind_ == TermKind::Notation && text_ == op; }

  // Identifiers lexically detected inside a Raw node.
  const std::vector<std::string>& raw_identifiers() const { return raw_identifiers_; }

  friend bool operator==(const Term& a, const Term& b);

 private:
  Term() = default;

  TermKind kind_ = TermKind::Atom;
  std::string text_;
  std::vector<TermPtr> children_;
  Quantifier quantifier_ = Quantifier::Forall;
  std::string pred_op_;
  std::vector<std::string> raw_identifiers_;
};

bool terms_equal(const TermPtr& a, const TermPtr& b);

// Identifiers occurring free in `t`. Dotted names are reported whole
// (`Nat.succ`, `h.1`); use root_name to get the local part.
std::set<std::string> free_variables(const TermPtr& t);

// `h₁.le` -> `h₁`, `Nat.succ` -> `Nat`.
std::string root_name(std::string_view ident);

// True when some free identifier of `t` has root `name`.
bool mentions(const TermPtr& t, std::string_view name);

// Logical negation with `=`/`≠` complement and `¬¬` elimination only.
TermPtr negate(const TermPtr& t);

// Right-nested `a₀ op (a₁ op (... op aₙ))`; a single element is returned as is.
TermPtr fold_right(const std::string& op, const std::vector<TermPtr>& items);

}  // namespace cexgen
