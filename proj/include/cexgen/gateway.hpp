#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cexgen/statement.hpp"

namespace cexgen {

enum class Role { Proposer, Prover };
const char* to_string(Role r);

inline constexpr const char* kDefaultLeanHeader =
    "import Mathlib\nimport Aesop\nset_option maxHeartbeats 400000\nopen BigOperators Real Nat Topology Rat";

struct GeneratorConfig {
  Role role = Role::Proposer;
  std::string endpoint;  // http://host:port/path or mock:<file>
  double temperature = 0.9;
  int max_tokens = 4096;
  int samples_per_call = 1;
  int retries = 3;
  double request_timeout_s = 600.0;
  std::string lean_header = kDefaultLeanHeader;
  bool normalize_header = true;
};

// Throws ConfigError on out-of-range settings.
void validate(const GeneratorConfig& cfg);

std::string build_proposer_prompt(const ExistentialProblem& problem);
std::string build_prover_prompt(const ExistentialProblem& problem, const std::string& witness,
                                const std::string& lean_header = kDefaultLeanHeader);

// Contents of the last `\boxed{...}` (nested braces allowed).
std::optional<std::string> extract_boxed(const std::string& response);

// Text generation backend. `key` identifies the problem for scripted
// clients; `seed` makes sampling reproducible where supported.
class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  virtual std::vector<std::string> complete(const std::string& key, Role role, const std::string& prompt,
                                            int n, const GeneratorConfig& cfg, std::uint64_t seed) = 0;
};

// JSONL script `{problem_id, role, response}`. Several responses for one
// (problem, role) are sampled by seed; `*` matches any problem. In
// responses, `{witness}` and `{statement}` are replaced by the witness and
// the statement of the prover prompt.
class MockClient : public GeneratorClient {
 public:
  static std::unique_ptr<MockClient> from_file(const std::filesystem::path& file);
  void add(const std::string& problem_id, Role role, std::string response);
  std::vector<std::string> complete(const std::string& key, Role role, const std::string& prompt, int n,
                                    const GeneratorConfig& cfg, std::uint64_t seed) override;

 private:
  std::map<std::pair<std::string, Role>, std::vector<std::string>> script_;
};

// POST {prompt, temperature, max_tokens, n} -> {choices:[{text}]}.
class HttpClient : public GeneratorClient {
 public:
  explicit HttpClient(std::string url);
  std::vector<std::string> complete(const std::string& key, Role role, const std::string& prompt, int n,
                                    const GeneratorConfig& cfg, std::uint64_t seed) override;

 private:
  std::string base_;
  std::string path_;
};

// `mock:<file>` or an http URL. Throws ConfigError.
std::unique_ptr<GeneratorClient> make_client(const std::string& endpoint);

struct CounterexampleCandidate {
  std::string problem_id;
  std::string reasoning;
  std::string witness;  // empty when extraction failed
  std::optional<std::string> extraction_error;
};

struct ProofCandidate {
  std::string proof;  // text after `:=`
  std::vector<std::string> diagnostics;
  bool header_normalized = false;
};

// Raw responses go to `archive` when set.
using Archive = std::function<void(const nlohmann::json&)>;

std::vector<CounterexampleCandidate> propose(const ExistentialProblem& problem, GeneratorClient& client,
                                             const GeneratorConfig& cfg, int n, std::uint64_t seed,
                                             const Archive& archive = {});

std::vector<ProofCandidate> prove(const ExistentialProblem& problem, const std::string& witness,
                                  GeneratorClient& client, const GeneratorConfig& cfg, int n,
                                  std::uint64_t seed, const Archive& archive = {});

// Splits a prover response into a proof for `problem`: the last code fence
// is taken, and a restated declaration header is replaced by the problem's
// own statement.
ProofCandidate proof_from_response(const ExistentialProblem& problem, const std::string& response,
                                   bool normalize_header = true);

}  // namespace cexgen
