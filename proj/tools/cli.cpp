#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cexgen/errors.hpp"
#include "cexgen/evaluation.hpp"
#include "cexgen/expert_loop.hpp"
#include "cexgen/extraction.hpp"
#include "cexgen/lean_surface.hpp"
#include "cexgen/mutation.hpp"
#include "cexgen/reward.hpp"
#include "cexgen/simulator.hpp"
#include "cexgen/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cexgen::cli {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitItems = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  std::string run_dir = "cexgen-run";
  std::string log_level = "info";
  bool json_errors = false;
  bool strict = false;
  std::size_t parallelism = 1;
  double timeout_s = 60.0;
  long toy_bound = 100;
  double toy_delay_ms = 0.0;

  // Set after parsing.
  json file;
  bool seed_given = false;
  bool timeout_given = false;
  bool toy_bound_given = false;
  bool parallelism_given = false;
};

const std::set<std::string> kKnownKeys = {
    "format",    "datasets",  "holdout",  "iterations", "batch_size", "single_pass", "alpha",
    "n_propose", "n_prove",   "seed",     "hook",       "fail_fast",  "parallelism", "limits",
    "proposer",  "prover",    "evaluate", "simulate",   "log_level",  "toy"};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", path));
  for (const auto& [key, _] : j.items())
    if (!kKnownKeys.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", path, key));
  return j;
}

template <typename T>
T config_value(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

std::uint64_t effective_seed(const Globals& g) {
  return g.seed_given ? g.seed : config_value<std::uint64_t>(g.file, "seed", g.seed);
}

std::size_t effective_parallelism(const Globals& g) {
  return g.parallelism_given ? g.parallelism : config_value<std::size_t>(g.file, "parallelism", g.parallelism);
}

ResourceLimits effective_limits(const Globals& g) {
  ResourceLimits l;
  if (g.file.contains("limits")) {
    const auto& lj = g.file["limits"];
    l.timeout_s = config_value<double>(lj, "timeout_s", l.timeout_s);
    l.memory_bytes = config_value<std::uint64_t>(lj, "memory_bytes", l.memory_bytes);
  }
  if (g.timeout_given) l.timeout_s = g.timeout_s;
  if (!(l.timeout_s > 0)) throw ConfigError("timeout must be positive");
  return l;
}

std::unique_ptr<Backend> make_verifier(const Globals& g) {
  ToyOptions toy;
  toy.bound = g.toy_bound;
  if (g.file.contains("toy") && !g.toy_bound_given)
    toy.bound = config_value<long>(g.file["toy"], "bound", toy.bound);
  if (std::getenv("VERIFIER_CMD") || std::getenv("VERIFIER_ADDR"))
    return backend_from_environment(effective_parallelism(g), toy);
  return std::make_unique<ToyBackend>(toy, g.toy_delay_ms / 1000.0);
}

std::string endpoint_for(const std::string& configured, const char* env, const std::string& mock) {
  if (!mock.empty()) return "mock:" + mock;
  if (!configured.empty()) return configured;
  if (const char* e = std::getenv(env); e && *e) return e;
  throw ConfigError(fmt::format("no generator endpoint: set it in the config, pass --mock, or export {}", env));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `@file` reads the text from a file.
std::string text_or_file(const std::string& arg) { return arg.rfind('@', 0) == 0 ? read_text(arg.substr(1)) : arg; }

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

void write_manifest(const Globals& g, const std::string& command, const json& config,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                    const json& extra = json::object()) {
  json in = json::array(), out = json::array();
  for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  for (const auto& p : outputs) out.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  json m = {{"command", command},
            {"versions", {{"cexgen", kVersion}, {"compiler", __VERSION__}}},
            {"seed", effective_seed(g)},
            {"config", config},
            {"inputs", in},
            {"outputs", out}};
  m.update(extra);
  write_text(fs::path(g.run_dir) / (command + ".manifest.json"), m.dump(2) + "\n");
}

int finish(const Globals& g, std::size_t failures, const std::string& what) {
  if (failures == 0) return kExitOk;
  spdlog::warn("{} {}", failures, what);
  return g.strict ? kExitItems : kExitOk;
}

BodyForm parse_form(const std::string& s) {
  if (s == "conj" || s == "conjunction") return BodyForm::Conjunction;
  if (s == "impl" || s == "implication") return BodyForm::Implication;
  throw ConfigError(fmt::format("unknown form '{}'", s));
}

// ---- extract ----

struct ExtractArgs {
  std::vector<std::string> in;
  std::string states;
  std::string out;
};

int run_extract(const Globals& g, const ExtractArgs& a) {
  std::vector<fs::path> files(a.in.begin(), a.in.end());
  std::optional<fs::path> states;
  if (!a.states.empty()) states = a.states;
  const auto report = extract_corpus(files, states);

  std::string rows, lean;
  for (const auto& t : report.theorems) {
    rows += json{{"name", t.name}, {"lean", print_theorem(t)}, {"step_id", t.provenance.step_id},
                 {"notes", t.provenance.notes}}
                .dump() +
            "\n";
    lean += print_theorem(t) + "\n\n";
  }
  const fs::path out = a.out;
  fs::path lean_out = out;
  lean_out.replace_extension(".lean");
  write_text(out, rows);
  write_text(lean_out, lean);

  json skipped = json::array();
  for (const auto& s : report.skipped) skipped.push_back(to_json(s));
  auto inputs = files;
  if (states) inputs.push_back(*states);
  write_manifest(g, "extract", {{"in", a.in}, {"states", a.states}, {"out", a.out}}, inputs, {out, lean_out},
                 {{"counts", {{"seeds", report.seeds}, {"extracted", report.theorems.size()},
                              {"duplicates", report.duplicates}, {"skipped", report.skipped.size()}}},
                  {"skipped", skipped}});
  spdlog::info("extracted {} theorems from {} seeds ({} duplicates, {} skipped)", report.theorems.size(),
               report.seeds, report.duplicates, report.skipped.size());
  return finish(g, report.skipped.size(), "proof steps could not be extracted");
}

// ---- mutate ----

struct MutateArgs {
  std::vector<std::string> in;
  std::string out;
  std::string form = "conj";
  std::string oracle = "structural";
};

int run_mutate(const Globals& g, const MutateArgs& a) {
  const BodyForm form = parse_form(a.form);
  if (a.oracle != "structural" && a.oracle != "checker") throw ConfigError(fmt::format("unknown oracle '{}'", a.oracle));

  std::vector<TheoremStatement> seeds;
  json parse_skips = json::array();
  for (const auto& f : a.in) {
    auto unit = parse_corpus(f);
    for (auto& t : unit.theorems) seeds.push_back(std::move(t));
    for (const auto& s : unit.skipped) parse_skips.push_back({{"file", f}, {"line", s.line}, {"reason", s.reason}});
  }

  std::unique_ptr<Backend> verifier;
  std::unique_ptr<CheckerOracle> checker;
  if (a.oracle == "checker") {
    verifier = make_verifier(g);
    checker = std::make_unique<CheckerOracle>(*verifier, effective_limits(g));
  }
  const auto result = mutate_corpus(seeds, form, checker.get());

  std::string rows, lean;
  for (const auto& r : result.records) {
    rows += to_json(r).dump() + "\n";
    lean += print_theorem(r.mutated) + "\n\n" + print_theorem(r.dropped) + "\n\n";
  }
  const fs::path out = a.out;
  fs::path lean_out = out;
  lean_out.replace_extension(".lean");
  write_text(out, rows);
  write_text(lean_out, lean);

  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"seed", f.seed}, {"reason", f.reason}});
  std::vector<fs::path> inputs(a.in.begin(), a.in.end());
  write_manifest(g, "mutate", {{"in", a.in}, {"out", a.out}, {"form", to_string(form)}, {"oracle", a.oracle}},
                 inputs, {out, lean_out},
                 {{"counts", {{"seeds", result.seeds}, {"records", result.records.size()}, {"ratio", result.ratio()}}},
                  {"parse_skips", parse_skips},
                  {"failures", failures},
                  {"oracle_notes", result.notes}});
  spdlog::info("{} seeds -> {} problem pairs (ratio {:.2f})", result.seeds, result.records.size(), result.ratio());
  for (const auto& n : result.notes) spdlog::debug("{}", n);
  return finish(g, parse_skips.size() + result.failures.size(), "declarations or drops were skipped");
}

// ---- iterate ----

struct IterateArgs {
  std::string mock;
  std::vector<std::string> datasets;
  std::string alpha = "0.8";
  std::size_t iterations = 56;
  std::size_t batch_size = 10000;
  std::size_t holdout = 3000;
  std::string hook;
  bool fail_fast = false;
  bool repeat = false;
  double temperature = 0.9;
  int max_tokens = 4096;
};

struct GivenFlags {
  bool alpha = false, iterations = false, batch_size = false, holdout = false, hook = false, datasets = false,
       temperature = false, max_tokens = false;
};

int run_iterate(const Globals& g, const IterateArgs& a, const GivenFlags& given) {
  RunConfig cfg = run_config_from_json(g.file);
  cfg.seed = effective_seed(g);
  cfg.parallelism = effective_parallelism(g);
  cfg.limits = effective_limits(g);
  if (given.datasets) cfg.datasets.assign(a.datasets.begin(), a.datasets.end());
  if (given.alpha) cfg.alpha = make_reward_config(Fraction::parse(a.alpha)).alpha;
  if (given.iterations) cfg.iterations = a.iterations;
  if (given.batch_size) cfg.batch_size = a.batch_size;
  if (given.holdout) cfg.holdout = a.holdout;
  if (given.hook) cfg.hook = a.hook;
  if (a.fail_fast) cfg.fail_fast = true;
  if (a.repeat) cfg.single_pass = false;
  for (auto* gen : {&cfg.proposer, &cfg.prover}) {
    if (given.temperature) gen->temperature = a.temperature;
    if (given.max_tokens) gen->max_tokens = a.max_tokens;
  }
  cfg.proposer.endpoint = endpoint_for(cfg.proposer.endpoint, "PROPOSER_ADDR", a.mock);
  cfg.prover.endpoint = endpoint_for(cfg.prover.endpoint, "PROVER_ADDR", a.mock);
  if (cfg.datasets.empty()) throw ConfigError("no datasets given (config 'datasets' or --dataset)");

  auto proposer = make_client(cfg.proposer.endpoint);
  auto prover = make_client(cfg.prover.endpoint);
  auto verifier = make_verifier(g);
  spdlog::info("running {} iterations of {} problems (alpha {}, seed {})", cfg.iterations, cfg.batch_size,
               cfg.alpha.str(), cfg.seed);
  const json manifest = run_training(cfg, LoopServices{*proposer, *prover, *verifier}, g.run_dir);

  std::size_t errors = 0;
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    const json rep = json::parse(read_text((fs::path(g.run_dir) / fmt::format("iter_{}", k) / "report.json").string()));
    const auto& c = rep["counts"];
    errors += c["errors"].get<std::size_t>();
    spdlog::info("iter {}: proposed {}/{}  v_M {}  v_H {}  reward mass {}", k, c["proposed"].get<std::size_t>(),
                 c["problems"].get<std::size_t>(), c["v_M"].get<std::size_t>(), c["v_H"].get<std::size_t>(),
                 rep["reward_mass"].get<std::string>());
  }
  spdlog::info("manifest: {}", (fs::path(g.run_dir) / "manifest.json").string());
  (void)manifest;
  return finish(g, errors, "items failed during the run");
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string problems;
  std::string mock;
  std::vector<int> ks{1, 4, 9};
  int n_propose = 3;
  int n_prove = 3;
  double temperature = 0.9;
  int max_tokens = 4096;
};

std::vector<ExistentialProblem> load_eval_problems(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path));
  std::vector<ExistentialProblem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string key = j.contains("mutated_lean") ? "mutated_lean" : "lean";
      out.push_back(parse_problem(j.at(key).get<std::string>()));
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return out;
}

int run_evaluate(const Globals& g, const EvaluateArgs& a, const GivenFlags& given, const CLI::App& sub) {
  const RunConfig base = run_config_from_json(g.file);
  EvalConfig cfg;
  cfg.seed = effective_seed(g);
  cfg.parallelism = effective_parallelism(g);
  cfg.limits = effective_limits(g);
  cfg.proposer = base.proposer;
  cfg.prover = base.prover;
  const json section = g.file.value("evaluate", json::object());
  cfg.ks = config_value<std::vector<int>>(section, "ks", a.ks);
  cfg.n_propose = config_value<int>(section, "n_propose", a.n_propose);
  cfg.n_prove = config_value<int>(section, "n_prove", a.n_prove);
  if (sub.count("--k")) cfg.ks = a.ks;
  if (sub.count("--n-propose")) cfg.n_propose = a.n_propose;
  if (sub.count("--n-prove")) cfg.n_prove = a.n_prove;
  for (auto* gen : {&cfg.proposer, &cfg.prover}) {
    if (given.temperature) gen->temperature = a.temperature;
    if (given.max_tokens) gen->max_tokens = a.max_tokens;
  }
  cfg.proposer.endpoint = endpoint_for(cfg.proposer.endpoint, "PROPOSER_ADDR", a.mock);
  cfg.prover.endpoint = endpoint_for(cfg.prover.endpoint, "PROVER_ADDR", a.mock);

  const auto problems = load_eval_problems(a.problems);
  auto proposer = make_client(cfg.proposer.endpoint);
  auto prover = make_client(cfg.prover.endpoint);
  auto verifier = make_verifier(g);
  const auto report = evaluate_benchmark(problems, *proposer, *prover, *verifier, cfg);

  const fs::path dir = g.run_dir;
  write_text(dir / "evaluation.json", report.to_json().dump(2) + "\n");
  write_text(dir / "evaluation.txt", report.to_table());
  write_text(dir / "evaluation.csv", report.to_csv());
  std::fwrite(report.to_table().data(), 1, report.to_table().size(), stdout);

  std::size_t lost = 0;
  for (const auto& p : report.problems) lost += p.lost;
  write_manifest(g, "evaluate",
                 {{"ks", cfg.ks}, {"n_propose", cfg.n_propose}, {"n_prove", cfg.n_prove},
                  {"proposer", cfg.proposer.endpoint}, {"prover", cfg.prover.endpoint},
                  {"timeout_s", cfg.limits.timeout_s}},
                 {a.problems}, {dir / "evaluation.json", dir / "evaluation.txt", dir / "evaluation.csv"});
  return finish(g, lost, "attempts were lost to generator or checker failures");
}

// ---- simulate ----

struct SimulateArgs {
  std::string alpha = "0.8";
  double eta = 0.5;
  std::size_t iterations = 56;
  std::size_t runs = 20;
  std::vector<std::string> compare;
  bool no_plot = false;
};

std::pair<std::string, Fraction> parse_setting(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0) throw ConfigError(fmt::format("expected label:alpha, got '{}'", s));
  try {
    return {s.substr(0, colon), make_reward_config(Fraction::parse(s.substr(colon + 1))).alpha};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("bad alpha in '{}': {}", s, e.what()));
  }
}

std::vector<CurvePoint> mean_curve(const std::vector<SimRun>& runs) {
  std::vector<CurvePoint> out = runs.front().curve();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const auto c = runs[r].curve();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].pass1 += c[i].pass1;
      out[i].pass4 += c[i].pass4;
      out[i].pass9 += c[i].pass9;
    }
  }
  for (auto& p : out) {
    p.pass1 /= static_cast<double>(runs.size());
    p.pass4 /= static_cast<double>(runs.size());
    p.pass9 /= static_cast<double>(runs.size());
  }
  return out;
}

int run_simulate(const Globals& g, const SimulateArgs& a, const CLI::App& sub) {
  SimConfig cfg = sim_config_from_json(g.file.value("simulate", json::object()));
  cfg.seed = effective_seed(g);
  if (sub.count("--eta")) cfg.eta = a.eta;
  if (sub.count("--iterations")) cfg.iterations = a.iterations;
  if (sub.count("--alpha") || !g.file.value("simulate", json::object()).contains("alpha"))
    cfg.alpha = parse_setting("x:" + a.alpha).second;
  cfg = sim_config_from_json(json::object(), cfg);
  const fs::path dir = g.run_dir;
  std::vector<fs::path> outputs;

  if (a.compare.empty()) {
    const auto run = simulate(cfg);
    emit_curves(run.curve(), dir / "curves", !a.no_plot);
    outputs.push_back(dir / "curves.csv");
    if (!a.no_plot) outputs.push_back(dir / "curves.svg");
    const auto& last = run.iterations.back().eval;
    fmt::print("final pass@1 {:.4f}  pass@4 {:.4f}  pass@9 {:.4f}  (iterations to 90%: {})\n", last.pass1, last.pass4,
               last.pass9, run.iterations_to_90());
    write_manifest(g, "simulate", cfg.to_json(), {}, outputs);
    return kExitOk;
  }

  if (a.compare.size() != 2) throw ConfigError("--compare takes exactly two label:alpha settings");
  const auto [la, fa] = parse_setting(a.compare[0]);
  const auto [lb, fb] = parse_setting(a.compare[1]);
  if (la == lb) throw ConfigError("comparison labels must differ");
  SimConfig ca = cfg, cb = cfg;
  ca.alpha = fa;
  cb.alpha = fb;
  const std::size_t threads = effective_parallelism(g);
  const auto cmp = compare_settings(ca, cb, a.runs, threads);
  const json summary = cmp.to_json(la, lb);
  write_text(dir / "comparison.json", summary.dump(2) + "\n");
  write_text(dir / "comparison_runs.csv", cmp.curves_csv(la, lb));
  const auto mean_a = mean_curve(cmp.runs_a), mean_b = mean_curve(cmp.runs_b);
  write_text(dir / fmt::format("curves_{}.csv", la), curves_csv(mean_a));
  write_text(dir / fmt::format("curves_{}.csv", lb), curves_csv(mean_b));
  outputs = {dir / "comparison.json", dir / "comparison_runs.csv", dir / fmt::format("curves_{}.csv", la),
             dir / fmt::format("curves_{}.csv", lb)};
  if (!a.no_plot) {
    write_text(dir / "comparison.svg", curves_svg({{la, mean_a}, {lb, mean_b}}));
    outputs.push_back(dir / "comparison.svg");
  }
  fmt::print("{}\n", summary.dump(2));
  json config = cfg.to_json();
  config.erase("alpha");
  config["settings"] = {{la, fa.str()}, {lb, fb.str()}};
  config["runs"] = a.runs;
  write_manifest(g, "simulate", config, {}, outputs);
  return kExitOk;
}

// ---- check ----

struct CheckArgs {
  std::string statement;
  std::string proof;
};

int run_check(const Globals& g, const CheckArgs& a) {
  auto verifier = make_verifier(g);
  ProofJob job;
  job.id = "check";
  job.statement = text_or_file(a.statement);
  job.proof = text_or_file(a.proof);
  job.limits = effective_limits(g);
  const auto result = check_proof(job, *verifier);
  fmt::print("{}\n", to_json(result).dump());
  json config = {{"backend", verifier->name()}, {"timeout_s", job.limits.timeout_s}};
  write_manifest(g, "check", config, {}, {}, {{"result", to_json(result)}});
  return finish(g, result.verified() ? 0 : 1, "proof was not verified");
}

void report_error(const Globals& g, const char* kind, const std::string& message, int code) {
  if (g.json_errors) {
    fmt::print(stderr, "{}\n", json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump());
  } else {
    fmt::print(stderr, "error: {}\n", message);
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Counterexample problem synthesis and multi-reward expert iteration", "cexgen"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", g.seed, "Master random seed");
  app.add_option("--run-dir", g.run_dir, "Directory for outputs and manifests");
  app.add_option("--log-level", g.log_level, "Logging verbosity")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_flag("--json-errors", g.json_errors, "Report errors on stderr as JSON");
  app.add_flag("--strict", g.strict, "Exit with status 1 when individual items fail");
  auto* par_opt = app.add_option("--parallelism", g.parallelism, "Concurrent checker jobs")->check(CLI::PositiveNumber);
  auto* timeout_opt =
      app.add_option("--timeout-s", g.timeout_s, "Per-proof checker timeout in seconds")->check(CLI::PositiveNumber);
  auto* toy_bound_opt = app.add_option("--toy-bound", g.toy_bound, "Instances searched per unbounded quantifier by the built-in checker");
  app.add_option("--toy-delay-ms", g.toy_delay_ms, "Artificial latency of the built-in checker (testing aid)");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Harvest theorems from proof steps");
  extract->add_option("--in", ex.in, "Lean source files")->required()->check(CLI::ExistingFile);
  extract->add_option("--states", ex.states, "JSONL proof states for procedural steps")->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "Output JSONL (a .lean file is written alongside)")->required();

  MutateArgs mu;
  auto* mutate = app.add_subcommand("mutate", "Drop hypotheses to build counterexample problems");
  mutate->add_option("--in", mu.in, "Lean source files with seed theorems")->required()->check(CLI::ExistingFile);
  mutate->add_option("--out", mu.out, "Output JSONL (a .lean file is written alongside)")->required();
  mutate->add_option("--form", mu.form, "Body form of the mutated problem")
      ->check(CLI::IsMember({"conj", "conjunction", "impl", "implication"}));
  mutate->add_option("--oracle", mu.oracle, "Redundant-hypothesis oracle")
      ->check(CLI::IsMember({"structural", "checker"}));

  IterateArgs it;
  GivenFlags it_given;
  auto* iterate = app.add_subcommand("iterate", "Run multi-reward expert iteration");
  auto* it_mock = iterate->add_option("--mock", it.mock, "Scripted JSONL responses for both generators")
                      ->check(CLI::ExistingFile);
  auto* it_ds = iterate->add_option("--dataset", it.datasets, "Problem JSONL from `mutate` (repeatable)")
                    ->check(CLI::ExistingFile);
  auto* it_alpha = iterate->add_option("--alpha", it.alpha, "Weight of the mutated-proof reward");
  auto* it_iters = iterate->add_option("--iterations", it.iterations, "Number of iterations");
  auto* it_batch = iterate->add_option("--batch-size", it.batch_size, "Problems per iteration");
  auto* it_hold = iterate->add_option("--holdout", it.holdout, "Validation problems held out");
  auto* it_hook = iterate->add_option("--hook", it.hook, "Fine-tune command run after each iteration");
  iterate->add_flag("--fail-fast", it.fail_fast, "Abort on the first generator or checker failure");
  iterate->add_flag("--repeat", it.repeat, "Allow batches to wrap around the training set");
  auto* it_temp = iterate->add_option("--temperature", it.temperature, "Sampling temperature");
  auto* it_tok = iterate->add_option("--max-tokens", it.max_tokens, "Maximum generated tokens");
  (void)it_mock;

  EvaluateArgs ev;
  GivenFlags ev_given;
  auto* evaluate = app.add_subcommand("evaluate", "Measure pass@k on a problem set");
  evaluate->add_option("--problems", ev.problems, "Problem JSONL (mutated_lean or lean field)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--mock", ev.mock, "Scripted JSONL responses for both generators")->check(CLI::ExistingFile);
  evaluate->add_option("--k", ev.ks, "k values")->delimiter(',');
  evaluate->add_option("--n-propose", ev.n_propose, "Counterexamples proposed per problem");
  evaluate->add_option("--n-prove", ev.n_prove, "Proofs per counterexample");
  auto* ev_temp = evaluate->add_option("--temperature", ev.temperature, "Sampling temperature");
  auto* ev_tok = evaluate->add_option("--max-tokens", ev.max_tokens, "Maximum generated tokens");

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Simulate reward dynamics of a skill-scalar learner");
  sim->add_option("--alpha", si.alpha, "Weight of the mutated-proof reward");
  sim->add_option("--eta", si.eta, "Learning rate");
  sim->add_option("--iterations", si.iterations, "Iterations per run");
  sim->add_option("--runs", si.runs, "Paired runs for --compare")->check(CLI::PositiveNumber);
  sim->add_option("--compare", si.compare, "Two settings label:alpha, e.g. single:1.0 multi:0.8")->expected(2);
  sim->add_flag("--no-plot", si.no_plot, "Skip SVG output");

  CheckArgs ch;
  auto* check = app.add_subcommand("check", "Verify one proof with the configured checker");
  check->add_option("--statement", ch.statement, "Declaration up to `:=` (or @file)")->required();
  check->add_option("--proof", ch.proof, "Proof text after `:=` (or @file)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(g, "usage", e.what(), kExitConfig);
    return kExitConfig;
  }

  auto logger = spdlog::stderr_logger_st("cexgen");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  g.seed_given = seed_opt->count() > 0;
  g.parallelism_given = par_opt->count() > 0;
  g.timeout_given = timeout_opt->count() > 0;
  g.toy_bound_given = toy_bound_opt->count() > 0;
  it_given = {it_alpha->count() > 0, it_iters->count() > 0, it_batch->count() > 0, it_hold->count() > 0,
              it_hook->count() > 0,  it_ds->count() > 0,    it_temp->count() > 0,  it_tok->count() > 0};
  ev_given.temperature = ev_temp->count() > 0;
  ev_given.max_tokens = ev_tok->count() > 0;

  try {
    g.file = load_config(g.config);
    if (g.file.contains("log_level") && !app.get_option("--log-level")->count())
      spdlog::set_level(spdlog::level::from_str(g.file["log_level"].get<std::string>()));
    fs::create_directories(g.run_dir);
    if (*extract) return run_extract(g, ex);
    if (*mutate) return run_mutate(g, mu);
    if (*iterate) return run_iterate(g, it, it_given);
    if (*evaluate) return run_evaluate(g, ev, ev_given, *evaluate);
    if (*sim) return run_simulate(g, si, *sim);
    if (*check) return run_check(g, ch);
  } catch (const ConfigError& e) {
    report_error(g, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const HoldoutTooLarge& e) {
    report_error(g, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    report_error(g, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const Error& e) {
    report_error(g, "runtime", e.what(), kExitItems);
    return kExitItems;
  } catch (const std::exception& e) {
    report_error(g, "internal", e.what(), kExitItems);
    return kExitItems;
  }
  return kExitOk;
}

}  // namespace cexgen::cli
