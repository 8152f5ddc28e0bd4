#include "cexgen/term.hpp"

#include <utility>

#include "cexgen/lexer.hpp"

namespace cexgen {

TermPtr Term::atom(std::string text) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Atom;
  t->text_ = std::move(text);
  return t;
}

TermPtr Term::app(std::vector<TermPtr> children) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::App;
  t->children_ = std::move(children);
  return t;
}

TermPtr Term::binder(Quantifier q, std::string name, TermPtr type, std::string pred_op,
                     TermPtr pred_rhs, TermPtr body) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Binder;
  t->quantifier_ = q;
  t->text_ = std::move(name);
  t->pred_op_ = std::move(pred_op);
  t->children_ = {std::move(type), std::move(pred_rhs), std::move(body)};
  return t;
}

TermPtr Term::prefix(std::string op, TermPtr operand) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Notation;
  t->text_ = std::move(op);
  t->children_ = {std::move(operand)};
  return t;
}

TermPtr Term::infix(std::string op, TermPtr lhs, TermPtr rhs) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Notation;
  t->text_ = std::move(op);
  t->children_ = {std::move(lhs), std::move(rhs)};
  return t;
}

TermPtr Term::raw(std::string text) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Raw;
  t->raw_identifiers_ = lex_identifiers(text);
  t->text_ = std::move(text);
  return t;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind_ != b.kind_ || a.text_ != b.text_ || a.children_.size() != b.children_.size())
    return false;
  if (a.kind_ == TermKind::Binder && (a.quantifier_ != b.quantifier_ || a.pred_op_ != b.pred_op_))
    return false;
  for (std::size_t i = 0; i < a.children_.size(); ++i)
    if (!terms_equal(a.children_[i], b.children_[i])) return false;
  return true;
}

bool terms_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

namespace {

bool is_identifier_text(const std::string& s) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  return is_ident_start(decode_utf8(s, pos));
}

void collect_free(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!t) return;
  switch (t->kind()) {
    case TermKind::Atom:
      if (is_identifier_text(t->text()) && !bound.count(root_name(t->text())))
        out.insert(t->text());
      return;
    case TermKind::Raw:
      for (const auto& id : t->raw_identifiers())
        if (!bound.count(root_name(id))) out.insert(id);
      return;
    case TermKind::Binder: {
      // type and predicate are outside the binder's scope
      collect_free(t->binder_type(), bound, out);
      collect_free(t->pred_rhs(), bound, out);
      const bool fresh = bound.insert(t->text()).second;
      collect_free(t->body(), bound, out);
      if (fresh) bound.erase(t->text());
      return;
    }
    case TermKind::App:
    case TermKind::Notation:
      for (const auto& c : t->children()) collect_free(c, bound, out);
      return;
  }
}

}  // namespace

std::set<std::string> free_variables(const TermPtr& t) {
  std::set<std::string> bound, out;
  collect_free(t, bound, out);
  return out;
}

std::string root_name(std::string_view ident) {
  const auto dot = ident.find('.');
  return std::string(ident.substr(0, dot));
}

bool mentions(const TermPtr& t, std::string_view name) {
  for (const auto& v : free_variables(t))
    if (root_name(v) == name) return true;
  return false;
}

TermPtr negate(const TermPtr& t) {
  if (t->is_op("≠") && t->is_infix()) return Term::infix("=", t->children()[0], t->children()[1]);
  if (t->is_op("=") && t->is_infix()) return Term::infix("≠", t->children()[0], t->children()[1]);
  if (t->is_op("¬") && t->is_prefix()) return t->children()[0];
  return Term::prefix("¬", t);
}

TermPtr fold_right(const std::string& op, const std::vector<TermPtr>& items) {
  if (items.empty()) return nullptr;
  TermPtr acc = items.back();
  for (std::size_t i = items.size() - 1; i-- > 0;) acc = Term::infix(op, items[i], acc);
  return acc;
}

}  // namespace cexgen
