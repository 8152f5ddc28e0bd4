#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "cexgen/errors.hpp"
#include "cexgen/lean_surface.hpp"
#include "cexgen/mutation.hpp"
#include "test_support.hpp"

using namespace cexgen;

namespace {

const char* kSchema = "theorem original_version (x : X) : H₁ x → H₂ x → C x := by sorry";

const char* kWorked = R"(theorem aimeII_2001_p3_g4_extracted_54
    (x : ℕ → ℤ)
    (h₁ : ∀ n ≥ 5, x n = x (n - 1) - x (n - 2) + x (n - 3) - x (n - 4))
    (h₂ : x 10 = -267)
    (h₃ : x 11 = 211)
    (h₄ : x 12 = 375)
    (h₅ : x 13 ≠ 420) :
    x 14 ≠ 523 := by sorry)";

std::string statement_of(const ExistentialProblem& p) {
  return normalize_whitespace("theorem " + p.name + " : " + print_signature(p));
}

class FixedOracle : public UsageOracle {
 public:
  explicit FixedOracle(std::set<std::size_t> u) : u_(std::move(u)) {}
  std::set<std::size_t> unused(const TheoremStatement&) override { return u_; }
  std::string name() const override { return "fixed"; }

 private:
  std::set<std::size_t> u_;
};

class UnavailableOracle : public UsageOracle {
 public:
  std::set<std::size_t> unused(const TheoremStatement&) override { throw OracleUnavailable("offline"); }
  std::string name() const override { return "unavailable"; }
};

}  // namespace

TEST(Mutation, SchemaImplicationForm) {
  const auto r = mutate(parse_theorem(kSchema), 0, BodyForm::Implication,
                        ProblemNames{"mutated_version", "dropped_hypothesis"});
  EXPECT_EQ(statement_of(r.mutated), "theorem mutated_version : ∃ x : X, H₂ x → C x");
  EXPECT_EQ(statement_of(r.dropped), "theorem dropped_hypothesis : ∃ x : X, ¬ H₁ x");
  EXPECT_EQ(r.mutated.kind, ProblemKind::Mutated);
  EXPECT_EQ(r.dropped.kind, ProblemKind::DroppedHypothesis);
}

TEST(Mutation, SchemaConjunctionForm) {
  const auto r = mutate(parse_theorem(kSchema), 1, BodyForm::Conjunction);
  EXPECT_EQ(statement_of(r.mutated), "theorem original_version_mut_drop1 : ∃ x : X, H₁ x ∧ C x");
  EXPECT_EQ(statement_of(r.dropped), "theorem original_version_drop1 : ∃ x : X, ¬ H₂ x");
}

TEST(Mutation, SchemaGolden) {
  std::string out;
  for (const auto form : {BodyForm::Implication, BodyForm::Conjunction}) {
    const auto r = mutate(parse_theorem(kSchema), 0, form, ProblemNames{"mutated_version", "dropped_hypothesis"});
    out += print_theorem(r.mutated) + "\n" + print_theorem(r.dropped) + "\n";
  }
  EXPECT_EQ(out, fixtures::read_file(fixtures::golden_dir() / "schemas.lean"));
}

TEST(Mutation, WorkedExampleDropFour) {
  const auto r = mutate(parse_theorem(kWorked), 4, BodyForm::Conjunction);
  EXPECT_EQ(r.mutated.name, "aimeII_2001_p3_mut_54_drop4");
  EXPECT_EQ(normalize_whitespace(print_signature(r.mutated)),
            "∃ (x : ℕ → ℤ), (∀ n ≥ 5, x n = x (n - 1) - x (n - 2) + x (n - 3) - x (n - 4)) ∧ x 10 = -267 ∧ "
            "x 11 = 211 ∧ x 12 = 375 ∧ x 14 ≠ 523");
  EXPECT_EQ(normalize_whitespace(print_signature(r.dropped)), "∃ (x : ℕ → ℤ), x 13 = 420");
  EXPECT_EQ(r.mutated.provenance.dropped_index, 4u);
  EXPECT_EQ(r.mutated.provenance.seed, "aimeII_2001_p3_g4_extracted_54");
}

TEST(Mutation, ProblemNames) {
  EXPECT_EQ(problem_names("foo", 3).mutated, "foo_mut_drop3");
  EXPECT_EQ(problem_names("foo", 3).dropped, "foo_drop3");
  EXPECT_EQ(problem_names("aimeII_2001_p3_g4_extracted_54", 4).mutated, "aimeII_2001_p3_mut_54_drop4");
  EXPECT_EQ(problem_names("aimeII_2001_p3_g4_extracted_54", 4).dropped, "aimeII_2001_p3_54_drop4");
}

TEST(Mutation, ReferencedHypothesisIsNotDroppable) {
  const auto t = parse_theorem("theorem t (f : ℕ → ℕ) (h₀ : 0 < f 0) (h₁ : h₀ = h₀) : f 0 ≠ 0 := by omega");
  EXPECT_THROW(mutate(t, 0, BodyForm::Conjunction), NotDroppable);
  EXPECT_EQ(droppable_hypotheses(t), (std::vector<std::size_t>{1}));
  EXPECT_THROW(mutate(t, 7, BodyForm::Conjunction), IndexOutOfRange);
}

TEST(Mutation, MutateAllCoversDroppable) {
  const auto rs = mutate_all(parse_theorem(kWorked), BodyForm::Implication);
  ASSERT_EQ(rs.size(), 5u);
  for (std::size_t j = 0; j < rs.size(); ++j) EXPECT_EQ(rs[j].drop_index, j);
}

TEST(Mutation, MutationIsDeterministic) {
  const auto t = parse_theorem(kWorked);
  const auto a = to_json(mutate(t, 2, BodyForm::Conjunction));
  const auto b = to_json(mutate(t, 2, BodyForm::Conjunction));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Mutation, StructuralOracleKeepsImplicitUsers) {
  StructuralOracle o;
  EXPECT_TRUE(o.unused(parse_theorem("theorem t (a : ℝ) (h₀ : 0 < a) (h₁ : a < 3) : a < 4 := by linarith")).empty());
  EXPECT_EQ(o.unused(parse_theorem("theorem t (a b : ℝ) (ha : 0 < a) (hb : 0 < b) (hc : b < 9) : 0 < a * b := by "
                                   "exact mul_pos ha hb")),
            (std::set<std::size_t>{2}));
  EXPECT_TRUE(o.unused(parse_theorem(kSchema)).empty());
}

TEST(Mutation, PruneRecordsNote) {
  FixedOracle o({1});
  const auto t = parse_theorem("theorem t (a : ℕ) (h₀ : 0 < a) (h₁ : a < 9) : a ≠ 0 := by omega");
  const auto p = prune_redundant(t, o);
  ASSERT_EQ(p.hypotheses.size(), 1u);
  EXPECT_EQ(p.hypotheses[0].name, "h₀");
  EXPECT_FALSE(p.provenance.notes.empty());
}

TEST(Mutation, UnusedVariableDiagnostics) {
  const auto names = unused_variable_names(
      {{"warning", "unused variable `h₁`\nnote: this linter can be disabled"}, {"info", "unused variable `x`"},
       {"warning", "something else"}});
  EXPECT_EQ(names, (std::set<std::string>{"h₁", "x"}));
}

TEST(Mutation, CorpusRatioAndFallback) {
  const auto unit = parse_corpus(fixtures::data_dir() / "mini_corpus.lean");
  UnavailableOracle o;
  const auto cm = mutate_corpus(unit.theorems, BodyForm::Conjunction, &o);
  EXPECT_EQ(cm.seeds, 50u);
  EXPECT_EQ(cm.notes.size(), 50u);
  EXPECT_GE(cm.ratio(), 1.0);
  EXPECT_LE(cm.ratio(), 3.0);
  const auto structural = mutate_corpus(unit.theorems, BodyForm::Conjunction);
  EXPECT_EQ(structural.records.size(), cm.records.size());
  EXPECT_TRUE(structural.notes.empty());
}

TEST(Mutation, RecordJson) {
  const auto j = to_json(mutate(parse_theorem(kSchema), 0, BodyForm::Implication));
  EXPECT_EQ(j["form"], "implication");
  EXPECT_EQ(j["drop_index"], 0);
  EXPECT_EQ(j["mutated_name"], "original_version_mut_drop0");
  EXPECT_EQ(parse_problem(j["mutated_lean"].get<std::string>()).name, "original_version_mut_drop0");
}
