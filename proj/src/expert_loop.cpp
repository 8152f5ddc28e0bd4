#include "cexgen/expert_loop.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cexgen/errors.hpp"
#include "cexgen/lean_surface.hpp"
#include "cexgen/reward.hpp"
#include "cexgen/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cexgen {

namespace {

constexpr const char* kFormatVersion = "cexgen-run/1";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

fs::path iter_dir(std::size_t k) { return fmt::format("iter_{}", k); }

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out << text;
    out.flush();
    if (!out) throw Error(fmt::format("short write to {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::vector<ProblemPair> load_problem_pairs(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot read {}", file.string()));
  std::vector<ProblemPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ProblemPair p;
      p.mutated = parse_problem(j.at("mutated_lean").get<std::string>(), ProblemKind::Mutated);
      p.dropped = parse_problem(j.at("dropped_lean").get<std::string>(), ProblemKind::DroppedHypothesis);
      if (j.contains("form")) {
        p.mutated.provenance.form = parse_body_form(j["form"].get<std::string>());
      }
      if (j.contains("seed")) {
        p.mutated.provenance.seed = p.dropped.provenance.seed = j["seed"].get<std::string>();
      }
      if (j.contains("drop_index")) {
        p.mutated.provenance.dropped_index = p.dropped.provenance.dropped_index = j["drop_index"].get<std::size_t>();
      }
      p.id = p.mutated.name;
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}:{}: {}", file.string(), lineno, e.what()));
    }
  }
  return out;
}

std::string job_statement(const ExistentialProblem& p) {
  std::string s = print_statement(p);
  if (s.size() >= 3 && s.compare(s.size() - 3, 3, " by") == 0) s.resize(s.size() - 3);
  return s;
}

json RunConfig::to_json() const {
  json ds = json::array();
  for (const auto& d : datasets) ds.push_back(d.string());
  auto gen = [](const GeneratorConfig& g) {
    return json{{"endpoint", g.endpoint},           {"temperature", g.temperature},
                {"max_tokens", g.max_tokens},       {"samples_per_call", g.samples_per_call},
                {"retries", g.retries},             {"request_timeout_s", g.request_timeout_s},
                {"lean_header", g.lean_header},     {"normalize_header", g.normalize_header}};
  };
  return {{"format", kFormatVersion},
          {"datasets", ds},
          {"holdout", holdout},
          {"iterations", iterations},
          {"batch_size", batch_size},
          {"single_pass", single_pass},
          {"alpha", alpha.str()},
          {"n_propose", n_propose},
          {"n_prove", n_prove},
          {"seed", seed},
          {"hook", hook ? json(*hook) : json(nullptr)},
          {"fail_fast", fail_fast},
          {"limits", {{"timeout_s", limits.timeout_s}, {"memory_bytes", limits.memory_bytes}}},
          {"proposer", gen(proposer)},
          {"prover", gen(prover)}};
}

namespace {

void generator_from_json(const json& j, GeneratorConfig& g) {
  if (!j.is_object()) throw ConfigError("generator settings must be an object");
  if (j.contains("endpoint")) g.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("temperature")) g.temperature = j["temperature"].get<double>();
  if (j.contains("max_tokens")) g.max_tokens = j["max_tokens"].get<int>();
  if (j.contains("samples_per_call")) g.samples_per_call = j["samples_per_call"].get<int>();
  if (j.contains("retries")) g.retries = j["retries"].get<int>();
  if (j.contains("request_timeout_s")) g.request_timeout_s = j["request_timeout_s"].get<double>();
  if (j.contains("lean_header")) g.lean_header = j["lean_header"].get<std::string>();
  if (j.contains("normalize_header")) g.normalize_header = j["normalize_header"].get<bool>();
  validate(g);
}

Fraction alpha_from_json(const json& a) {
  try {
    if (a.is_string()) return Fraction::parse(a.get<std::string>());
    if (a.is_number_integer()) return Fraction(a.get<std::int64_t>());
    return Fraction::parse(a.dump());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("bad alpha {}: {}", a.dump(), e.what()));
  }
}

}  // namespace

RunConfig run_config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("run configuration must be a JSON object");
  try {
    if (j.contains("datasets")) {
      c.datasets.clear();
      for (const auto& d : j["datasets"]) c.datasets.emplace_back(d.get<std::string>());
    }
    if (j.contains("holdout")) c.holdout = j["holdout"].get<std::size_t>();
    if (j.contains("iterations")) c.iterations = j["iterations"].get<std::size_t>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("single_pass")) c.single_pass = j["single_pass"].get<bool>();
    if (j.contains("alpha")) c.alpha = make_reward_config(alpha_from_json(j["alpha"])).alpha;
    if (j.contains("n_propose")) c.n_propose = j["n_propose"].get<int>();
    if (j.contains("n_prove")) c.n_prove = j["n_prove"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("hook"))
      c.hook = j["hook"].is_null() ? std::nullopt : std::optional<std::string>(j["hook"].get<std::string>());
    if (j.contains("fail_fast")) c.fail_fast = j["fail_fast"].get<bool>();
    if (j.contains("parallelism")) c.parallelism = j["parallelism"].get<std::size_t>();
    if (j.contains("limits")) {
      const auto& l = j["limits"];
      if (l.contains("timeout_s")) c.limits.timeout_s = l["timeout_s"].get<double>();
      if (l.contains("memory_bytes")) c.limits.memory_bytes = l["memory_bytes"].get<std::uint64_t>();
    }
    if (j.contains("proposer")) generator_from_json(j["proposer"], c.proposer);
    if (j.contains("prover")) generator_from_json(j["prover"], c.prover);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("run configuration: {}", e.what()));
  }
  if (c.n_propose < 1 || c.n_prove < 1) throw ConfigError("n_propose and n_prove must be positive");
  if (!(c.limits.timeout_s > 0)) throw ConfigError("timeout_s must be positive");
  return c;
}

std::pair<std::vector<ProblemPair>, std::vector<ProblemPair>> split_dataset(std::vector<ProblemPair> problems,
                                                                           std::size_t holdout,
                                                                           std::uint64_t seed) {
  if (holdout >= problems.size())
    throw HoldoutTooLarge(
        fmt::format("holdout {} leaves no training problems out of {}", holdout, problems.size()));
  std::vector<std::size_t> order(problems.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(order);
  std::vector<std::size_t> held(order.begin(), order.begin() + holdout);
  std::sort(held.begin(), held.end());
  std::vector<ProblemPair> train, validation;
  for (std::size_t i : held) validation.push_back(problems[i]);
  for (std::size_t i = holdout; i < order.size(); ++i) train.push_back(std::move(problems[order[i]]));
  return {std::move(train), std::move(validation)};
}

json IterationReport::to_json() const {
  json errs = json::array();
  for (const auto& e : error_records) errs.push_back(e);
  return {{"iteration", iteration},
          {"counts",
           {{"problems", counts.problems},
            {"proposed", counts.proposed},
            {"v_M", counts.v_M},
            {"v_H", counts.v_H},
            {"both", counts.both},
            {"neither", counts.neither},
            {"errors", counts.errors}}},
          {"reward_mass", reward_mass.str()},
          {"ce_examples", ce_examples},
          {"proof_examples", proof_examples},
          {"verified_proofs", verified_proofs},
          {"ce_sft", ce_path.generic_string()},
          {"proof_sft", proof_path.generic_string()},
          {"errors", errs}};
}

namespace {

struct ProofSlot {
  std::size_t job = 0;  // index into the job list
  std::string proof;
};

struct CandidateWork {
  std::size_t problem = 0;
  CounterexampleCandidate proposal;
  std::vector<ProofSlot> proofs_M;
  std::vector<ProofSlot> proofs_H;
};

}  // namespace

IterationReport run_iteration(std::size_t k, const std::vector<ProblemPair>& batch, LoopServices services,
                              const RunConfig& cfg, const fs::path& run_dir) {
  const auto started = std::chrono::steady_clock::now();
  const RewardConfig rcfg = make_reward_config(cfg.alpha);
  const fs::path dir = run_dir / iter_dir(k);
  fs::create_directories(dir);

  IterationReport report;
  report.iteration = k;
  report.counts.problems = batch.size();

  std::vector<json> transcript;
  std::vector<CandidateWork> work;
  std::vector<ProofJob> jobs;
  auto record_error = [&](json e) {
    ++report.counts.errors;
    report.error_records.push_back(std::move(e));
  };
  auto add_jobs = [&](const ExistentialProblem& p, const std::vector<ProofCandidate>& proofs, const char* tag,
                      std::size_t ci, std::vector<ProofSlot>& slots) {
    for (std::size_t pi = 0; pi < proofs.size(); ++pi) {
      ProofJob job;
      job.id = fmt::format("{:06}-{}-{:03}-{:03}", work[ci].problem, tag, ci, pi);
      job.statement = job_statement(p);
      job.proof = proofs[pi].proof;
      job.limits = cfg.limits;
      slots.push_back({jobs.size(), proofs[pi].proof});
      jobs.push_back(std::move(job));
    }
  };

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& pair = batch[i];
    const std::uint64_t pseed = derive_seed(derive_seed(cfg.seed, k), pair.id);
    const Archive archive = [&](const json& r) {
      json row = r;
      row["iteration"] = k;
      transcript.push_back(std::move(row));
    };
    try {
      auto proposals = propose(pair.mutated, services.proposer, cfg.proposer, cfg.n_propose,
                               derive_seed(pseed, "propose"), archive);
      for (auto& c : proposals) {
        work.push_back(CandidateWork{i, std::move(c), {}, {}});
        const std::size_t ci = work.size() - 1;
        auto& cand = work[ci];
        if (cand.proposal.witness.empty()) {
          record_error({{"problem_id", pair.id}, {"stage", "extract"},
                        {"message", cand.proposal.extraction_error.value_or("no witness")}});
          continue;
        }
        ++report.counts.proposed;
        const std::uint64_t cseed = derive_seed(pseed, ci);
        auto pm = prove(pair.mutated, cand.proposal.witness, services.prover, cfg.prover, cfg.n_prove,
                        derive_seed(cseed, "prove-M"), archive);
        auto ph = prove(pair.dropped, cand.proposal.witness, services.prover, cfg.prover, cfg.n_prove,
                        derive_seed(cseed, "prove-H"), archive);
        add_jobs(pair.mutated, pm, "M", ci, work[ci].proofs_M);
        add_jobs(pair.dropped, ph, "H", ci, work[ci].proofs_H);
      }
    } catch (const EndpointUnavailable& e) {
      if (cfg.fail_fast) throw;
      record_error({{"problem_id", pair.id}, {"stage", "generate"}, {"message", e.what()}});
    }
  }

  BatchOptions bopts;
  bopts.parallelism = cfg.parallelism;
  bopts.checkpoint = dir / "verify.jsonl";
  auto results = run_batch(jobs, services.verifier, bopts);
  std::map<std::string, const VerificationResult*> by_id;
  for (const auto& r : results) by_id[r.id] = &r;

  std::vector<Candidate> candidates;
  std::vector<RewardRecord> rewards;
  for (const auto& w : work) {
    const auto& pair = batch[w.problem];
    auto first_verified = [&](const std::vector<ProofSlot>& slots) -> std::optional<std::string> {
      std::optional<std::string> hit;
      for (const auto& s : slots) {
        const auto& r = *by_id.at(jobs[s.job].id);
        if (r.infrastructure_failure()) {
          if (cfg.fail_fast) throw Error(fmt::format("verification of {} failed: {}", r.id, to_string(r.status)));
          record_error({{"problem_id", pair.id}, {"stage", "verify"}, {"job", r.id},
                        {"status", to_string(r.status)}});
        }
        if (r.verified() && !hit) hit = s.proof;
      }
      return hit;
    };
    const auto proof_M = first_verified(w.proofs_M);
    const auto proof_H = first_verified(w.proofs_H);

    Candidate c;
    c.problem_id = pair.id;
    c.mutated_statement = print_theorem(pair.mutated);
    c.dropped_statement = print_theorem(pair.dropped);
    c.witness = w.proposal.witness;
    c.reasoning = w.proposal.reasoning;
    c.proof_M = proof_M.value_or("");
    c.proof_H = proof_H.value_or("");
    auto reward = compute_reward(proof_M.has_value(), proof_H.has_value(), rcfg, pair.id);
    report.counts.v_M += reward.v_M;
    report.counts.v_H += reward.v_H;
    report.counts.both += reward.v_M && reward.v_H;
    report.counts.neither += !reward.v_M && !reward.v_H;
    report.verified_proofs += reward.v_M + reward.v_H;
    report.reward_mass = report.reward_mass + reward.r;
    candidates.push_back(std::move(c));
    rewards.push_back(std::move(reward));
  }

  const auto ce = build_counterexample_sft(candidates, rewards, rcfg);
  const auto pf = build_proof_sft(candidates, rewards, rcfg);
  std::vector<json> ce_rows, pf_rows;
  for (const auto& e : ce) ce_rows.push_back(to_json(e));
  for (const auto& e : pf) pf_rows.push_back(to_json(e));
  report.ce_examples = ce.size();
  report.proof_examples = pf.size();
  report.ce_path = iter_dir(k) / "ce_sft.jsonl";
  report.proof_path = iter_dir(k) / "proof_sft.jsonl";

  write_file_atomic(run_dir / report.ce_path, jsonl(ce_rows));
  write_file_atomic(run_dir / report.proof_path, jsonl(pf_rows));
  write_file_atomic(run_dir / "transcripts" / fmt::format("iter_{}.jsonl", k), jsonl(transcript));
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_file_atomic(dir / "timing.json", json{{"wall_time_s", report.wall_time_s}}.dump(2) + "\n");
  // The report marks the iteration's outputs as complete.
  write_file_atomic(dir / "report.json", report.to_json().dump(2) + "\n");
  return report;
}

namespace {

json run_hook(const RunConfig& cfg, std::size_t k, const fs::path& run_dir, const IterationReport& rep) {
  if (!cfg.hook) return {{"hook", nullptr}};
  const fs::path ce = fs::absolute(run_dir / rep.ce_path);
  const fs::path pf = fs::absolute(run_dir / rep.proof_path);
  const std::string cmd = fmt::format("{} --ce {} --proof {} --iter {}", *cfg.hook, shell_quote(ce.string()),
                                      shell_quote(pf.string()), k);
  const int status = std::system(cmd.c_str());
  const int code = status == -1 ? -1 : WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (code != 0) throw Error(fmt::format("fine-tune hook exited with status {} at iteration {}", code, k));
  return {{"hook", *cfg.hook},
          {"ce", rep.ce_path.generic_string()},
          {"proof", rep.proof_path.generic_string()},
          {"iter", k},
          {"exit_code", code}};
}

json file_entry(const fs::path& run_dir, const fs::path& rel) {
  return {{"path", rel.generic_string()}, {"sha256", sha256_file(run_dir / rel)}};
}

json build_manifest(const RunConfig& cfg, const fs::path& run_dir, std::size_t done) {
  json inputs = json::array();
  for (const auto& d : cfg.datasets) inputs.push_back({{"path", d.string()}, {"sha256", sha256_file(d)}});
  json files = json::array();
  files.push_back(file_entry(run_dir, "run.json"));
  files.push_back(file_entry(run_dir, "split.json"));
  for (std::size_t k = 0; k < done; ++k) {
    for (const char* f : {"report.json", "ce_sft.jsonl", "proof_sft.jsonl", "hook.json"})
      files.push_back(file_entry(run_dir, iter_dir(k) / f));
    files.push_back(file_entry(run_dir, fs::path("transcripts") / fmt::format("iter_{}.jsonl", k)));
  }
  return {{"format", kFormatVersion},
          {"seed", cfg.seed},
          {"inputs", inputs},
          {"iterations_completed", done},
          {"iterations_planned", cfg.iterations},
          {"files", files}};
}

}  // namespace

json run_training(const RunConfig& cfg, LoopServices services, const fs::path& run_dir) {
  if (cfg.iterations > 0 && cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.n_propose < 1 || cfg.n_prove < 1) throw ConfigError("sample counts must be positive");
  make_reward_config(cfg.alpha);
  validate(cfg.proposer);
  validate(cfg.prover);

  std::vector<ProblemPair> all;
  for (const auto& d : cfg.datasets) {
    auto part = load_problem_pairs(d);
    for (auto& p : part) all.push_back(std::move(p));
  }
  auto [train, validation] = split_dataset(std::move(all), cfg.holdout, cfg.seed);
  if (cfg.single_pass && cfg.iterations * cfg.batch_size > train.size())
    throw ConfigError(fmt::format("{} iterations of {} problems exceed the {} training problems", cfg.iterations,
                                  cfg.batch_size, train.size()));

  fs::create_directories(run_dir);
  const std::string run_json = cfg.to_json().dump(2) + "\n";
  const fs::path run_path = run_dir / "run.json";
  if (fs::exists(run_path)) {
    if (read_file(run_path) != run_json)
      throw ConfigError(fmt::format("{} belongs to a run with a different configuration", run_dir.string()));
  } else {
    write_file_atomic(run_path, run_json);
  }
  json split = {{"validation", json::array()}, {"train", json::array()}};
  for (const auto& p : validation) split["validation"].push_back(p.id);
  for (const auto& p : train) split["train"].push_back(p.id);
  write_file_atomic(run_dir / "split.json", split.dump(2) + "\n");

  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    const fs::path dir = run_dir / iter_dir(k);
    if (fs::exists(dir / "report.json") && fs::exists(dir / "hook.json")) continue;
    std::vector<ProblemPair> batch;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) batch.push_back(train[(k * cfg.batch_size + b) % train.size()]);
    const auto rep = run_iteration(k, batch, services, cfg, run_dir);
    write_file_atomic(dir / "hook.json", run_hook(cfg, k, run_dir, rep).dump(2) + "\n");
    write_file_atomic(run_dir / "manifest.json", build_manifest(cfg, run_dir, k + 1).dump(2) + "\n");
  }
  const json manifest = build_manifest(cfg, run_dir, cfg.iterations);
  write_file_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace cexgen
