#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cexgen/errors.hpp"
#include "cexgen/statement.hpp"

namespace cexgen {

struct ResourceLimits {
  double timeout_s = 60.0;
  std::uint64_t memory_bytes = 8ull << 30;
};

struct ProofJob {
  std::string id;
  std::string statement;  // declaration text up to `:=` (a trailing `by` is fine)
  std::string proof;      // proof text following `:=`
  ResourceLimits limits;
};

enum class VerifyStatus { Verified, Failed, Timeout, ResourceExhausted, ProtocolError };

const char* to_string(VerifyStatus s);
VerifyStatus parse_verify_status(const std::string& s);

struct Diagnostic {
  std::string severity;  // error | warning | info
  std::string text;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct VerificationResult {
  std::string id;
  VerifyStatus status = VerifyStatus::Failed;
  std::vector<Diagnostic> diagnostics;
  double elapsed = 0.0;
  bool contains_sorry = false;

  bool verified() const { return status == VerifyStatus::Verified; }
  // Infrastructure outcome rather than an answer about the proof.
  bool infrastructure_failure() const {
    return status == VerifyStatus::Timeout || status == VerifyStatus::ResourceExhausted ||
           status == VerifyStatus::ProtocolError;
  }
};

nlohmann::json to_json(const VerificationResult& r);
VerificationResult result_from_json(const nlohmann::json& j);

// A proof checker. Implementations must be safe to call from several
// threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual VerificationResult check(const ProofJob& job) = 0;
  virtual std::string name() const = 0;
};

// True when `proof` contains a `sorry` or `admit` token outside comments.
bool proof_contains_sorry(const std::string& proof);

// Runs the backend and applies the client-side contract.
//   - A proof containing `sorry` is never verified.
//   - An error-severity diagnostic demotes a verified reply to failed.
//   - A backend exception becomes a protocol-error result.
VerificationResult check_proof(const ProofJob& job, Backend& backend);

// Ground evaluation of `∃ binders, body` at a witness.
struct Witness {
  std::vector<std::string> positional;        // "2", "-3"
  std::map<std::string, std::string> named;   // n=0
};
// "2, 3", "n=0, m=-1", "⟨2, 3⟩", "(2)". Throws OutsideFragment when empty.
Witness parse_witness(const std::string& text);

struct ToyOptions {
  long bound = 100;  // instances examined per unbounded quantifier
};

// Throws OutsideFragment when the problem or witness is outside the
// fragment: integer (ℕ/ℤ) binders, linear and polynomial arithmetic,
// relations, ∧ ∨ ¬ → ↔, and quantifiers searched up to `bound`.
VerificationResult toy_check(const ExistentialProblem& problem, const Witness& witness,
                             const ToyOptions& opts = {});

// Witness text from a proof: `use a, b` or `exact ⟨a, b, ...⟩` /
// `refine ⟨a, ...⟩` (first components, one per binder).
std::optional<std::string> witness_from_proof(const std::string& proof, std::size_t arity);

// Built-in checker: parses the statement as an existential problem and
// evaluates it at the witness found in the proof.
class ToyBackend : public Backend {
 public:
  explicit ToyBackend(ToyOptions opts = {}, double delay_s = 0.0) : opts_(opts), delay_s_(delay_s) {}
  VerificationResult check(const ProofJob& job) override;
  std::string name() const override { return "toy"; }

 private:
  ToyOptions opts_;
  double delay_s_;
};

struct ProcessOptions {
  std::size_t workers = 1;
  double grace_s = 0.25;  // extra client-side wait beyond the job timeout
};

// Newline-delimited JSON over the stdin/stdout of `/bin/sh -c <command>`.
// One worker process per concurrent caller; a worker that times out or
// misbehaves is killed and respawned.
class SubprocessBackend : public Backend {
 public:
  explicit SubprocessBackend(std::string command, ProcessOptions opts = {});
  ~SubprocessBackend() override;
  VerificationResult check(const ProofJob& job) override;
  std::string name() const override { return "subprocess"; }

 private:
  struct Pool;
  std::unique_ptr<Pool> pool_;
};

// Same protocol over a TCP connection to host:port.
class TcpBackend : public Backend {
 public:
  explicit TcpBackend(std::string address, ProcessOptions opts = {});
  ~TcpBackend() override;
  VerificationResult check(const ProofJob& job) override;
  std::string name() const override { return "tcp"; }

 private:
  struct Pool;
  std::unique_ptr<Pool> pool_;
};

// VERIFIER_CMD, then VERIFIER_ADDR, then the toy checker.
std::unique_ptr<Backend> backend_from_environment(std::size_t workers, ToyOptions toy = {});

// Thrown by a progress callback to abandon a batch; propagates out of
// run_batch after in-flight jobs settle. Completed jobs stay checkpointed.
class BatchInterrupted : public Error {
 public:
  using Error::Error;
};

struct BatchOptions {
  std::size_t parallelism = 1;
  std::optional<std::filesystem::path> checkpoint;  // JSONL of results
  std::function<void(const VerificationResult&)> on_result;
};

// Answers every job once with at most `parallelism` in flight. Results are
// sorted by job id. Checkpointed results (other than protocol errors) are
// reused instead of re-running the job.
std::vector<VerificationResult> run_batch(const std::vector<ProofJob>& jobs, Backend& backend,
                                          const BatchOptions& opts);

}  // namespace cexgen
