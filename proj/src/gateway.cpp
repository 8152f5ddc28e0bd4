#include "cexgen/gateway.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <chrono>
#include <fstream>
#include <regex>
#include <thread>

#include "cexgen/errors.hpp"
#include "cexgen/lean_surface.hpp"
#include "cexgen/lexer.hpp"
#include "cexgen/rng.hpp"
#include "syntax_detail.hpp"

namespace cexgen {

using json = nlohmann::json;

const char* to_string(Role r) { return r == Role::Proposer ? "proposer" : "prover"; }

namespace {

Role parse_role(const std::string& s) {
  if (s == "proposer") return Role::Proposer;
  if (s == "prover") return Role::Prover;
  throw ConfigError(fmt::format("unknown generator role '{}'", s));
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Statement text without the trailing ` := by`.
std::string bare_statement(const ExistentialProblem& p) { return "theorem " + p.name + " : " + print_signature(p); }

// Whether a restated declaration header denotes `problem`, up to layout
// and redundant parentheses.
bool same_problem(const ExistentialProblem& problem, const std::string& header) {
  try {
    return parse_problem(header + " := by sorry", problem.kind) == problem;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

void validate(const GeneratorConfig& cfg) {
  if (cfg.temperature < 0) throw ConfigError("temperature must be non-negative");
  if (cfg.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (cfg.samples_per_call <= 0) throw ConfigError("samples_per_call must be positive");
  if (cfg.retries < 0) throw ConfigError("retries must be non-negative");
}

std::string build_proposer_prompt(const ExistentialProblem& problem) {
  return "Find a concrete example to prove the following existential problem.\n"
         "Note that:\n"
         "1. Please reason the problem and give the final answer in Natural Language.\n"
         "2. The final answer should be in the format \\\\boxed{...}.\n"
         "The problem is: " +
         print_theorem(problem);
}

std::string build_prover_prompt(const ExistentialProblem& problem, const std::string& witness,
                                const std::string& lean_header) {
  return "Complete the following Lean 4 code using the given concrete example " + witness +
         ":\n```lean4\n" + lean_header + "\n" + print_statement(problem);
}

std::optional<std::string> extract_boxed(const std::string& response) {
  static constexpr std::string_view kTag = "\\boxed{";
  std::optional<std::string> last;
  for (std::size_t pos = response.find(kTag); pos != std::string::npos; pos = response.find(kTag, pos + 1)) {
    int depth = 1;
    std::size_t i = pos + kTag.size();
    for (; i < response.size() && depth > 0; ++i) {
      if (response[i] == '{') ++depth;
      else if (response[i] == '}') --depth;
    }
    if (depth == 0) last = trim(response.substr(pos + kTag.size(), i - 1 - pos - kTag.size()));
  }
  return last;
}

// ---------------------------------------------------------------------------
// clients

std::unique_ptr<MockClient> MockClient::from_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("cannot open mock script {}", file.string()));
  auto client = std::make_unique<MockClient>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      client->add(j.at("problem_id").get<std::string>(), parse_role(j.at("role").get<std::string>()),
                  j.at("response").get<std::string>());
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: {}", file.string(), line_no, e.what()));
    }
  }
  return client;
}

void MockClient::add(const std::string& problem_id, Role role, std::string response) {
  script_[{problem_id, role}].push_back(std::move(response));
}

std::vector<std::string> MockClient::complete(const std::string& key, Role role, const std::string& prompt,
                                              int n, const GeneratorConfig&, std::uint64_t seed) {
  auto it = script_.find({key, role});
  if (it == script_.end()) it = script_.find({"*", role});
  if (it == script_.end())
    throw EndpointUnavailable(fmt::format("mock script has no {} response for {}", to_string(role), key));
  const auto& options = it->second;

  std::string witness, statement;
  if (role == Role::Prover) {
    static const std::string kLead = "Complete the following Lean 4 code using the given concrete example ";
    const auto colon_fence = prompt.find(":\n```lean4\n");
    if (prompt.rfind(kLead, 0) == 0 && colon_fence != std::string::npos)
      witness = prompt.substr(kLead.size(), colon_fence - kLead.size());
    if (const auto th = prompt.rfind("\ntheorem "); th != std::string::npos) statement = prompt.substr(th + 1);
  }
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t pick = derive_seed(derive_seed(seed, key), static_cast<std::uint64_t>(i));
    std::string r = options[pick % options.size()];
    replace_all(r, "{witness}", witness);
    replace_all(r, "{statement}", statement);
    out.push_back(std::move(r));
  }
  return out;
}

HttpClient::HttpClient(std::string url) {
  static const std::regex re(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ConfigError(fmt::format("bad endpoint URL '{}'", url));
  base_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::vector<std::string> HttpClient::complete(const std::string&, Role, const std::string& prompt, int n,
                                              const GeneratorConfig& cfg, std::uint64_t seed) {
  httplib::Client cli(base_);
  cli.set_connection_timeout(std::chrono::seconds(10));
  const auto t = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::duration<double>(cfg.request_timeout_s));
  cli.set_read_timeout(t);
  cli.set_write_timeout(t);
  const json body{{"prompt", prompt},
                  {"temperature", cfg.temperature},
                  {"max_tokens", cfg.max_tokens},
                  {"n", n},
                  {"seed", seed}};
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 << std::min(attempt, 6)));
    auto res = cli.Post(path_, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    try {
      const auto j = json::parse(res->body);
      std::vector<std::string> out;
      for (const auto& c : j.at("choices")) out.push_back(c.at("text").get<std::string>());
      return out;
    } catch (const json::exception& e) {
      last_error = fmt::format("malformed response: {}", e.what());
    }
  }
  throw EndpointUnavailable(fmt::format("{}{}: {}", base_, path_, last_error));
}

std::unique_ptr<GeneratorClient> make_client(const std::string& endpoint) {
  if (endpoint.rfind("mock:", 0) == 0) return MockClient::from_file(endpoint.substr(5));
  if (endpoint.rfind("http://", 0) == 0)
    return std::make_unique<HttpClient>(endpoint);
  throw ConfigError(fmt::format("unsupported generator endpoint '{}'", endpoint));
}

// ---------------------------------------------------------------------------
// roles

namespace {

std::vector<std::string> sample(GeneratorClient& client, const std::string& key, Role role,
                                const std::string& prompt, const GeneratorConfig& cfg, int n,
                                std::uint64_t seed) {
  std::vector<std::string> out;
  const int per_call = std::max(1, cfg.samples_per_call);
  for (int done = 0; done < n;) {
    const int k = std::min(per_call, n - done);
    auto part = client.complete(key, role, prompt, k, cfg, derive_seed(seed, static_cast<std::uint64_t>(done)));
    if (part.empty()) throw EndpointUnavailable(fmt::format("generator returned no choices for {}", key));
    for (auto& s : part)
      if (static_cast<int>(out.size()) < n) out.push_back(std::move(s));
    done += static_cast<int>(part.size());
  }
  return out;
}

}  // namespace

std::vector<CounterexampleCandidate> propose(const ExistentialProblem& problem, GeneratorClient& client,
                                             const GeneratorConfig& cfg, int n, std::uint64_t seed,
                                             const Archive& archive) {
  const std::string prompt = build_proposer_prompt(problem);
  const auto responses = sample(client, problem.name, Role::Proposer, prompt, cfg, n, seed);
  std::vector<CounterexampleCandidate> out;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    CounterexampleCandidate c;
    c.problem_id = problem.name;
    c.reasoning = responses[i];
    if (auto w = extract_boxed(responses[i]); w && !w->empty())
      c.witness = *w;
    else
      c.extraction_error = "no \\boxed{...} answer in response";
    if (archive)
      archive({{"role", "proposer"}, {"problem_id", problem.name}, {"sample", i}, {"response", responses[i]}});
    out.push_back(std::move(c));
  }
  return out;
}

ProofCandidate proof_from_response(const ExistentialProblem& problem, const std::string& response,
                                   bool normalize_header) {
  ProofCandidate pc;
  std::string code = response;
  // last fenced block; a missing closing fence runs to the end
  if (const auto open = response.rfind("```lean"); open != std::string::npos) {
    const auto nl = response.find('\n', open);
    const std::size_t start = nl == std::string::npos ? response.size() : nl + 1;
    const auto close = response.find("```", start);
    code = response.substr(start, close == std::string::npos ? std::string::npos : close - start);
  } else if (const auto close = response.rfind("```"); close != std::string::npos) {
    const auto open2 = response.rfind("```", close == 0 ? 0 : close - 1);
    if (open2 != std::string::npos && open2 < close) {
      const auto nl = response.find('\n', open2);
      if (nl != std::string::npos && nl < close) code = response.substr(nl + 1, close - nl - 1);
    }
  }

  std::string stripped;
  std::vector<Token> toks;
  try {
    stripped = strip_comments(code);
    toks = tokenize(stripped);
  } catch (const SyntaxError&) {
    toks.clear();
  }
  std::size_t decl = toks.size();
  for (std::size_t i = 0; i < toks.size(); ++i)
    if ((toks[i].is("theorem") || toks[i].is("lemma")) && i + 1 < toks.size()) {
      decl = i;
      break;
    }
  if (decl == toks.size()) {
    // a continuation of the prompt, which already ends in `:= by`
    std::string body = code;
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
    pc.proof = "by" + (body.empty() || body.front() == '\n' ? body : "\n" + body);
    return pc;
  }
  std::size_t assign = toks.size();
  try {
    const auto match = detail::match_brackets(toks);
    assign = detail::find_top_level(toks, match, decl, toks.size(), ":=");
  } catch (const SyntaxError&) {
    pc.diagnostics.push_back("unbalanced brackets in prover output");
  }
  if (assign == toks.size()) {
    pc.diagnostics.push_back("prover output has no proof");
    pc.proof = "sorry";
    return pc;
  }
  const std::string header = normalize_whitespace(std::string_view(stripped).substr(
      toks[decl].begin, toks[assign].begin - toks[decl].begin));
  const std::string expected = normalize_whitespace(bare_statement(problem));
  std::string proof = code.substr(toks[assign].end);
  while (!proof.empty() && std::isspace(static_cast<unsigned char>(proof.back()))) proof.pop_back();
  std::size_t lead = 0;
  while (lead < proof.size() && (proof[lead] == ' ' || proof[lead] == '\t')) ++lead;
  proof = proof.substr(lead);
  if (header != expected && !same_problem(problem, header)) {
    pc.diagnostics.push_back(fmt::format("prover restated the statement as '{}'", header));
    if (!normalize_header) {
      pc.diagnostics.push_back("proof rejected: statement mismatch");
      pc.proof = "sorry";
      return pc;
    }
    pc.header_normalized = true;
    pc.diagnostics.push_back("header normalized to the problem statement");
  }
  pc.proof = proof;
  return pc;
}

std::vector<ProofCandidate> prove(const ExistentialProblem& problem, const std::string& witness,
                                  GeneratorClient& client, const GeneratorConfig& cfg, int n,
                                  std::uint64_t seed, const Archive& archive) {
  const std::string prompt = build_prover_prompt(problem, witness, cfg.lean_header);
  const auto responses = sample(client, problem.name, Role::Prover, prompt, cfg, n, seed);
  std::vector<ProofCandidate> out;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (archive)
      archive({{"role", "prover"}, {"problem_id", problem.name}, {"sample", i}, {"witness", witness},
               {"response", responses[i]}});
    out.push_back(proof_from_response(problem, responses[i], cfg.normalize_header));
  }
  return out;
}

}  // namespace cexgen
