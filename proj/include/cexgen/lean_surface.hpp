#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cexgen/errors.hpp"
#include "cexgen/lexer.hpp"
#include "cexgen/statement.hpp"

namespace cexgen {

// Parses a term. Input outside the structured grammar yields a Raw node
// (never throws on unsupported syntax, only on unbalanced delimiters).
TermPtr parse_term(std::string_view text);
TermPtr parse_term_tokens(const std::vector<Token>& tokens, std::size_t first, std::size_t last);

// Prints a term with minimal parentheses.
std::string print_term(const TermPtr& t);

// Whether a `(name : type)` group introduces a hypothesis rather than a
// variable: the type is a relation, connective, quantified or True/False
// proposition, or the name looks like a hypothesis name (`h...`, `this`)
// and the type is not a number type.
bool is_hypothesis_binder(const std::string& name, const TermPtr& type);

// `theorem <name> <binders> : <statement> := <proof>`; `lemma` accepted.
// Throws SyntaxUnsupported, SyntaxMalformed or DuplicateName.
TheoremStatement parse_theorem(std::string_view text);

// `theorem <name> : ∃ <binders>, <body> := by sorry`.
ExistentialProblem parse_problem(std::string_view text, ProblemKind kind = ProblemKind::Mutated);

std::string print_theorem(const TheoremStatement& t);
std::string print_theorem(const ExistentialProblem& p);

// Declaration text up to and including `:=` but without the proof; the
// statement part of print_theorem ends with ` := by`.
std::string print_statement(const TheoremStatement& t);
std::string print_statement(const ExistentialProblem& p);

// Everything after `theorem <name>` up to (excluding) `:=`.
std::string print_signature(const ExistentialProblem& p);

// Collapses every whitespace run to one space and trims.
std::string normalize_whitespace(std::string_view text);

// Canonical proof text: comment-free, common indentation removed, trailing
// blanks dropped. `by sorry` / `sorry` map to an empty optional.
std::optional<ProofScript> canonical_proof(std::string_view text);

struct SkipRecord {
  Span span;
  std::size_t line = 0;  // 1-based line of the declaration start
  std::string reason;
};

struct SourceUnit {
  std::string raw;
  std::vector<TheoremStatement> theorems;
  std::vector<Span> theorem_spans;
  std::vector<SkipRecord> skipped;
};

SourceUnit parse_source(std::string text);
// Throws Error on IO failure.
SourceUnit parse_corpus(const std::filesystem::path& file);

}  // namespace cexgen
