#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

#include "cexgen/errors.hpp"
#include "cexgen/gateway.hpp"
#include "cexgen/lean_surface.hpp"
#include "test_support.hpp"

using namespace cexgen;
using cexgen::fixtures::golden_dir;
using cexgen::fixtures::read_file;

namespace {

const char* kMutated =
    "theorem aimeII_2001_p3_mut_54_drop4 : ∃ (x : ℕ → ℤ), (∀ n ≥ 5, x n = x (n - 1) - x (n - 2) + x (n - 3) - "
    "x (n - 4)) ∧ x 10 = -267 ∧ x 11 = 211 ∧ x 12 = 375 ∧ x 14 ≠ 523 := by sorry";

const char* kSimple = "theorem nat_not_ge_one : ∃ n : ℕ, ¬ (n ≥ 1) := by sorry";

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Gateway, ProposerPromptGolden) {
  const auto prompt = build_proposer_prompt(parse_problem(kMutated));
  EXPECT_EQ(prompt, read_file(golden_dir() / "proposer_prompt.txt"));
  EXPECT_EQ(prompt.rfind("Find a concrete example to prove the following existential problem.", 0), 0u);
  EXPECT_EQ(count(prompt, "x 14 ≠ 523"), 1u);
}

TEST(Gateway, ProverPromptGolden) {
  EXPECT_EQ(build_prover_prompt(parse_problem(kSimple), "0"), read_file(golden_dir() / "prover_prompt.txt"));
}

TEST(Gateway, ProverPromptEmbedsWitness) {
  const std::string w = "the 10-periodic sequence with x(10)=−267, x(11)=211, x(12)=375, x(14)=0";
  const auto prompt = build_prover_prompt(parse_problem(kMutated), w);
  EXPECT_EQ(count(prompt, w), 1u);
  EXPECT_EQ(count(prompt, "theorem aimeII_2001_p3_mut_54_drop4"), 1u);
}

TEST(Gateway, PromptWithEmptyName) {
  auto p = parse_problem(kSimple);
  p.name.clear();
  EXPECT_NE(build_proposer_prompt(p).find("∃ n : ℕ, ¬ n ≥ 1"), std::string::npos);
}

TEST(Gateway, ExtractBoxed) {
  EXPECT_EQ(extract_boxed("so \\boxed{3} or rather \\boxed{ \\{1, 2\\} }"), "\\{1, 2\\}");
  EXPECT_EQ(extract_boxed("\\boxed{f {x} = 1}"), "f {x} = 1");
  EXPECT_FALSE(extract_boxed("no answer").has_value());
  EXPECT_FALSE(extract_boxed("\\boxed{unterminated").has_value());
}

TEST(Gateway, ProofFromContinuation) {
  const auto p = parse_problem(kSimple);
  const auto pc = proof_from_response(p, "```lean4\n  use 0\n```");
  EXPECT_EQ(pc.proof, "by\n  use 0");
  EXPECT_FALSE(pc.header_normalized);
}

TEST(Gateway, ProofFromFullDeclaration) {
  const auto p = parse_problem(kSimple);
  const auto pc = proof_from_response(p, "Here:\n```lean4\nimport Mathlib\ntheorem nat_not_ge_one : ∃ n : ℕ, "
                                         "¬ (n ≥ 1) := by\n  use 0\n```\nDone.");
  EXPECT_EQ(pc.proof, "by\n  use 0");
  EXPECT_FALSE(pc.header_normalized);
}

TEST(Gateway, RestatedHeaderIsNormalized) {
  const auto p = parse_problem(kSimple);
  const std::string resp = "```lean4\ntheorem other : ∃ n : ℕ, n < 1 := by\n  use 0\n```";
  const auto pc = proof_from_response(p, resp);
  EXPECT_TRUE(pc.header_normalized);
  EXPECT_EQ(pc.proof, "by\n  use 0");
  EXPECT_EQ(proof_from_response(p, resp, false).proof, "sorry");
}

TEST(Gateway, MockClientSubstitutesPlaceholders) {
  MockClient mock;
  mock.add("*", Role::Proposer, "try \\boxed{7}");
  mock.add("*", Role::Prover, "```lean4\n{statement}\n  use {witness}\n```");
  const auto p = parse_problem(kSimple);
  GeneratorConfig cfg;
  const auto cs = propose(p, mock, cfg, 2, 1);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].witness, "7");
  cfg.role = Role::Prover;
  const auto ps = prove(p, "0", mock, cfg, 1, 1);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].proof, "by\n  use 0");
  EXPECT_FALSE(ps[0].header_normalized);
}

TEST(Gateway, MockClientIsSeeded) {
  MockClient mock;
  for (int i = 0; i < 10; ++i) mock.add("p", Role::Proposer, "\\boxed{" + std::to_string(i) + "}");
  GeneratorConfig cfg;
  const auto a = mock.complete("p", Role::Proposer, "", 5, cfg, 9);
  EXPECT_EQ(a, mock.complete("p", Role::Proposer, "", 5, cfg, 9));
  EXPECT_THROW(mock.complete("q", Role::Prover, "", 1, cfg, 9), EndpointUnavailable);
}

TEST(Gateway, MissingBoxedIsExtractionError) {
  MockClient mock;
  mock.add("*", Role::Proposer, "I could not find one.");
  const auto cs = propose(parse_problem(kSimple), mock, GeneratorConfig{}, 1, 0);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_TRUE(cs[0].witness.empty());
  EXPECT_TRUE(cs[0].extraction_error.has_value());
}

TEST(Gateway, ArchiveReceivesRawResponses) {
  MockClient mock;
  mock.add("*", Role::Proposer, "\\boxed{1}");
  std::vector<nlohmann::json> archived;
  propose(parse_problem(kSimple), mock, GeneratorConfig{}, 3, 0, [&](const nlohmann::json& j) { archived.push_back(j); });
  ASSERT_EQ(archived.size(), 3u);
  EXPECT_EQ(archived[2]["sample"], 2);
}

TEST(Gateway, ConfigValidation) {
  GeneratorConfig cfg;
  cfg.max_tokens = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  EXPECT_THROW(make_client("ftp://x"), ConfigError);
  EXPECT_THROW(make_client("mock:/nonexistent/file.jsonl"), ConfigError);
}

TEST(Gateway, HttpClientRoundTrip) {
  httplib::Server server;
  nlohmann::json seen;
  server.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    nlohmann::json choices = nlohmann::json::array();
    for (int i = 0; i < seen["n"].get<int>(); ++i) choices.push_back({{"text", "\\boxed{" + std::to_string(i) + "}"}});
    res.set_content(nlohmann::json{{"choices", choices}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto client = make_client("http://127.0.0.1:" + std::to_string(port) + "/v1/complete");
  GeneratorConfig cfg;
  cfg.samples_per_call = 2;
  const auto cs = propose(parse_problem(kSimple), *client, cfg, 3, 5);
  server.stop();
  t.join();
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs[2].witness, "0");
  EXPECT_EQ(seen["n"], 1);
  EXPECT_EQ(seen["max_tokens"], 4096);
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.9);
}

TEST(Gateway, HttpClientGivesUpAfterRetries) {
  GeneratorConfig cfg;
  cfg.retries = 0;
  cfg.request_timeout_s = 1;
  HttpClient client("http://127.0.0.1:1/none");
  EXPECT_THROW(client.complete("p", Role::Proposer, "x", 1, cfg, 0), EndpointUnavailable);
}
