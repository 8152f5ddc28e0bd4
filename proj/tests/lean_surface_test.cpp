#include <gtest/gtest.h>

#include "cexgen/errors.hpp"
#include "cexgen/lean_surface.hpp"
#include "test_support.hpp"

using namespace cexgen;
using cexgen::fixtures::data_dir;
using cexgen::fixtures::golden_dir;
using cexgen::fixtures::read_file;

namespace {

std::string roundtrip_term(const std::string& s) { return print_term(parse_term(s)); }

const TheoremStatement& find(const SourceUnit& u, const std::string& name) {
  for (const auto& t : u.theorems)
    if (t.name == name) return t;
  throw std::runtime_error("missing theorem " + name);
}

}  // namespace

TEST(LeanSurface, PrecedenceAndMinimalParentheses) {
  EXPECT_EQ(roundtrip_term("a + (b * c)"), "a + b * c");
  EXPECT_EQ(roundtrip_term("(a + b) * c"), "(a + b) * c");
  EXPECT_EQ(roundtrip_term("a - (b - c)"), "a - (b - c)");
  EXPECT_EQ(roundtrip_term("(a - b) - c"), "a - b - c");
  EXPECT_EQ(roundtrip_term("x ^ 2 ^ 3"), "x ^ 2 ^ 3");
  EXPECT_EQ(roundtrip_term("(x ^ 2) ^ 3"), "(x ^ 2) ^ 3");
  EXPECT_EQ(roundtrip_term("f (g x) y"), "f (g x) y");
  EXPECT_EQ(roundtrip_term("-(a + b)"), "-(a + b)");
}

TEST(LeanSurface, ConnectivesAssociateRight) {
  EXPECT_EQ(roundtrip_term("p → (q → r)"), "p → q → r");
  EXPECT_EQ(roundtrip_term("(p → q) → r"), "(p → q) → r");
  EXPECT_EQ(roundtrip_term("(∀ n, p n) ∧ q"), "(∀ n, p n) ∧ q");
}

TEST(LeanSurface, AsciiSpellingsNormalize) {
  EXPECT_EQ(roundtrip_term("a <= b -> b != c"), "a ≤ b → b ≠ c");
}

TEST(LeanSurface, BinderPredicates) {
  const auto t = parse_term("∀ n ≥ 5, x n = 0");
  ASSERT_EQ(t->kind(), TermKind::Binder);
  EXPECT_EQ(t->pred_op(), "≥");
  EXPECT_EQ(print_term(t), "∀ n ≥ 5, x n = 0");
}

TEST(LeanSurface, AbsoluteValueBarsAreNotEquations) {
  const auto t = parse_theorem("theorem t (x : ℝ) (h₀ : |x - 1| < 1) : |x| < 2 := by sorry");
  ASSERT_EQ(t.hypotheses.size(), 1u);
  EXPECT_EQ(print_term(t.hypotheses[0].proposition), "|x - 1| < 1");
}

TEST(LeanSurface, HypothesisClassification) {
  EXPECT_TRUE(is_hypothesis_binder("h₀", parse_term("0 < x")));
  EXPECT_TRUE(is_hypothesis_binder("hp", parse_term("Nat.Prime p")));
  EXPECT_TRUE(is_hypothesis_binder("foo", parse_term("a ∣ b")));
  EXPECT_FALSE(is_hypothesis_binder("x", parse_term("ℕ → ℤ")));
  EXPECT_FALSE(is_hypothesis_binder("h", parse_term("ℝ")));
  EXPECT_FALSE(is_hypothesis_binder("s", parse_term("Set ℕ")));
}

TEST(LeanSurface, ParsesHeaderAndArrowHypotheses) {
  const auto t = parse_theorem("theorem original_version (x : X) : H₁ x → H₂ x → C x := by sorry");
  ASSERT_EQ(t.binders.size(), 1u);
  ASSERT_EQ(t.hypotheses.size(), 2u);
  EXPECT_EQ(t.hypotheses[0].origin, HypothesisOrigin::Arrow);
  EXPECT_EQ(print_term(t.conclusion), "C x");
  EXPECT_FALSE(t.proof.has_value());
}

TEST(LeanSurface, NamedArrowHypotheses) {
  const auto t = parse_theorem("theorem t (n : ℕ) : (h : 0 < n) → n ≠ 0 := by omega");
  ASSERT_EQ(t.hypotheses.size(), 1u);
  EXPECT_EQ(t.hypotheses[0].name, "h");
  EXPECT_EQ(t.hypotheses[0].origin, HypothesisOrigin::NamedArrow);
}

TEST(LeanSurface, ImplicitAndInstanceBinders) {
  const auto t = parse_theorem("theorem t {α : Type} [Fintype α] (s : Finset α) (h : s.card = 2) : 0 < s.card := by omega");
  ASSERT_EQ(t.binders.size(), 3u);
  EXPECT_EQ(t.binders[0].mode, BinderMode::Implicit);
  EXPECT_EQ(t.binders[1].mode, BinderMode::InstanceImplicit);
  EXPECT_TRUE(t.binders[1].synthesized_name);
  EXPECT_EQ(parse_theorem(print_theorem(t)), t);
}

TEST(LeanSurface, RejectsPatternMatchingEquations) {
  EXPECT_THROW(parse_theorem("theorem t : ℕ → ℕ\n  | 0 => 1\n  | n + 1 => n := by sorry"), SyntaxUnsupported);
}

TEST(LeanSurface, RejectsMalformedInput) {
  EXPECT_THROW(parse_theorem("theorem t (x : ℕ : x = x := rfl"), SyntaxError);
}

TEST(LeanSurface, CanonicalProofDropsSorry) {
  EXPECT_FALSE(canonical_proof("by sorry").has_value());
  EXPECT_FALSE(canonical_proof("  sorry ").has_value());
  const auto p = canonical_proof("by\n    rw [h]\n    -- close it\n    simp");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->text, "by\nrw [h]\nsimp");
}

TEST(LeanSurface, ProblemRoundTrip) {
  const std::string text =
      "theorem aimeII_2001_p3_mut_54_drop4 : ∃ (x : ℕ → ℤ), (∀ n ≥ 5, x n = x (n - 1) - x (n - 2) + "
      "x (n - 3) - x (n - 4)) ∧ x 10 = -267 ∧ x 11 = 211 ∧ x 12 = 375 ∧ x 14 ≠ 523 := by sorry";
  const auto p = parse_problem(text);
  EXPECT_EQ(p.binders.size(), 1u);
  EXPECT_EQ(print_theorem(p), text);
  EXPECT_EQ(print_statement(p), text.substr(0, text.size() - std::string(" sorry").size()));
}

TEST(LeanSurface, WorkedExampleMatchesGolden) {
  const auto unit = parse_corpus(data_dir() / "mini_corpus.lean");
  const auto& t = find(unit, "aimeII_2001_p3_g4_extracted_54");
  EXPECT_EQ(t.hypotheses.size(), 5u);
  EXPECT_EQ(print_theorem(t) + "\n", read_file(golden_dir() / "worked_example.lean"));
}

TEST(LeanSurface, CorpusRoundTripIsFixpoint) {
  const auto unit = parse_corpus(data_dir() / "mini_corpus.lean");
  EXPECT_EQ(unit.theorems.size(), 50u);
  EXPECT_TRUE(unit.skipped.empty());
  for (const auto& t : unit.theorems) {
    const std::string once = print_theorem(t);
    const auto reparsed = parse_theorem(once);
    EXPECT_EQ(reparsed, t) << t.name;
    EXPECT_EQ(print_theorem(reparsed), once) << t.name;
  }
}

TEST(LeanSurface, SourceSkipsRecordLines) {
  const auto unit = parse_source(
      "theorem ok (x : ℕ) (h : 0 < x) : x ≠ 0 := by omega\n\n"
      "theorem bad : ℕ → ℕ\n  | 0 => 1\n  | n + 1 => n := by sorry\n");
  EXPECT_EQ(unit.theorems.size(), 1u);
  ASSERT_EQ(unit.skipped.size(), 1u);
  EXPECT_EQ(unit.skipped[0].line, 3u);
}

TEST(LeanSurface, NormalizeWhitespace) { EXPECT_EQ(normalize_whitespace("  a \n\t b  "), "a b"); }
