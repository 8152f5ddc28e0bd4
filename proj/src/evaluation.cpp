#include "cexgen/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "cexgen/errors.hpp"
#include "cexgen/expert_loop.hpp"
#include "cexgen/rng.hpp"

namespace cexgen {

namespace {

void check_args(int n, int c, int k) {
  if (k < 1 || k > n || c < 0 || c > n)
    throw std::invalid_argument(fmt::format("pass@k needs 1 <= k <= n and 0 <= c <= n (n={}, c={}, k={})", n, c, k));
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i at every step.
    const std::uint64_t g = std::gcd(r, static_cast<std::uint64_t>(i));
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    const std::uint64_t a = r / g;
    const std::uint64_t b = num / (i / g);
    if (b != 0 && a > UINT64_MAX / b) throw std::overflow_error("binomial coefficient overflow");
    r = a * b;
  }
  return r;
}

}  // namespace

Fraction pass_at_k_exact(int n, int c, int k) {
  check_args(n, c, k);
  const std::uint64_t fail = binomial(n - c, k);
  const std::uint64_t all = binomial(n, k);
  if (all > static_cast<std::uint64_t>(INT64_MAX)) throw std::overflow_error("binomial coefficient overflow");
  return Fraction(1) - Fraction(static_cast<std::int64_t>(fail), static_cast<std::int64_t>(all));
}

double pass_at_k(int n, int c, int k) {
  check_args(n, c, k);
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (int i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / i;
  return 1.0 - miss;
}

int ProblemAttempts::c() const { return static_cast<int>(std::count(outcomes.begin(), outcomes.end(), true)); }

EvalReport summarize_attempts(std::vector<ProblemAttempts> problems, const std::vector<int>& ks,
                              std::uint64_t seed) {
  EvalReport rep;
  for (int k : ks) {
    if (k < 1) throw ConfigError(fmt::format("k must be positive, got {}", k));
    KSummary s;
    s.k = k;
    double total = 0.0;
    for (const auto& p : problems) {
      const int n = p.n();
      if (n == 0) continue;
      const int kk = std::min(k, n);
      total += pass_at_k(n, p.c(), kk);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      Rng rng(derive_seed(derive_seed(seed, p.id), static_cast<std::uint64_t>(k)));
      rng.shuffle(order);
      bool hit = false;
      for (int i = 0; i < kk; ++i) hit = hit || p.outcomes[order[i]];
      s.solved += hit;
    }
    s.mean_pass = problems.empty() ? 0.0 : total / static_cast<double>(problems.size());
    rep.per_k.push_back(s);
  }
  rep.problems = std::move(problems);
  return rep;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json probs = nlohmann::json::array();
  for (const auto& p : problems)
    probs.push_back({{"id", p.id}, {"n", p.n()}, {"c", p.c()}, {"lost", p.lost}, {"errors", p.errors}});
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& s : per_k) ks.push_back({{"k", s.k}, {"solved", s.solved}, {"mean_pass", s.mean_pass}});
  return {{"problems", probs}, {"per_k", ks}, {"total", problems.size()}};
}

std::string EvalReport::to_table() const {
  std::string out = fmt::format("{:>5}  {:>8}  {:>10}\n", "k", "solved", "pass@k");
  for (const auto& s : per_k)
    out += fmt::format("{:>5}  {:>8}  {:>10.4f}\n", s.k, fmt::format("{}/{}", s.solved, problems.size()), s.mean_pass);
  return out;
}

std::string EvalReport::to_csv() const {
  std::string out = "k,solved,mean_pass\n";
  for (const auto& s : per_k) out += fmt::format("{},{},{:.6f}\n", s.k, s.solved, s.mean_pass);
  return out;
}

EvalReport evaluate_benchmark(const std::vector<ExistentialProblem>& problems, GeneratorClient& proposer,
                              GeneratorClient& prover, Backend& verifier, const EvalConfig& cfg) {
  if (cfg.n_propose < 1 || cfg.n_prove < 1) throw ConfigError("sample counts must be positive");
  std::vector<ProblemAttempts> attempts(problems.size());
  std::vector<ProofJob> jobs;
  std::vector<std::size_t> job_problem;

  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& p = problems[i];
    auto& a = attempts[i];
    a.id = p.name;
    const std::uint64_t pseed = derive_seed(cfg.seed, p.name);
    std::vector<CounterexampleCandidate> cands;
    try {
      cands = propose(p, proposer, cfg.proposer, cfg.n_propose, derive_seed(pseed, "propose"));
    } catch (const EndpointUnavailable& e) {
      a.lost += static_cast<std::size_t>(cfg.n_propose * cfg.n_prove);
      a.errors.push_back(e.what());
      continue;
    }
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      if (cands[ci].witness.empty()) {
        // A proposal without an answer is a failed attempt, not a lost one.
        for (int j = 0; j < cfg.n_prove; ++j) a.outcomes.push_back(false);
        continue;
      }
      std::vector<ProofCandidate> proofs;
      try {
        proofs = prove(p, cands[ci].witness, prover, cfg.prover, cfg.n_prove, derive_seed(pseed, ci));
      } catch (const EndpointUnavailable& e) {
        a.lost += static_cast<std::size_t>(cfg.n_prove);
        a.errors.push_back(e.what());
        continue;
      }
      for (std::size_t pi = 0; pi < proofs.size(); ++pi) {
        ProofJob job;
        job.id = fmt::format("{:06}-{:03}-{:03}", i, ci, pi);
        job.statement = job_statement(p);
        job.proof = proofs[pi].proof;
        job.limits = cfg.limits;
        jobs.push_back(std::move(job));
        job_problem.push_back(i);
      }
    }
  }

  BatchOptions bopts;
  bopts.parallelism = cfg.parallelism;
  const auto results = run_batch(jobs, verifier, bopts);
  std::map<std::string, std::size_t> owner;
  for (std::size_t j = 0; j < jobs.size(); ++j) owner[jobs[j].id] = job_problem[j];
  for (const auto& r : results) {
    auto& a = attempts[owner.at(r.id)];
    if (r.infrastructure_failure()) {
      ++a.lost;
      a.errors.push_back(fmt::format("{}: {}", r.id, to_string(r.status)));
    } else {
      a.outcomes.push_back(r.verified());
    }
  }
  return summarize_attempts(std::move(attempts), cfg.ks, cfg.seed);
}

std::string curves_csv(const std::vector<CurvePoint>& points) {
  std::string out = "iteration,pass1,pass4,pass9\n";
  for (const auto& p : points) out += fmt::format("{},{:.6f},{:.6f},{:.6f}\n", p.iteration, p.pass1, p.pass4, p.pass9);
  return out;
}

std::string curves_svg(const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& series) {
  constexpr double W = 640, H = 400, L = 50, R = 150, T = 20, B = 40;
  std::size_t max_iter = 1;
  for (const auto& [_, pts] : series)
    for (const auto& p : pts) max_iter = std::max(max_iter, p.iteration);
  auto x = [&](std::size_t it) { return L + (W - L - R) * static_cast<double>(it) / static_cast<double>(max_iter); };
  auto y = [&](double v) { return T + (H - T - B) * (1.0 - v); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  static const char* dashes[] = {"", "6,3", "2,2"};
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, y(0), W - R, y(0));
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, y(0), L, y(1));
  for (int t = 0; t <= 4; ++t)
    out += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", L - 5, y(t / 4.0) + 4,
                       t / 4.0);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">iteration</text>\n", (L + W - R) / 2, H - 8);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", W - R, y(0) + 15, max_iter);

  int legend = 0;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& [label, pts] = series[s];
    const char* color = colors[s % std::size(colors)];
    for (int k = 0; k < 3; ++k) {
      std::string path;
      for (const auto& p : pts) {
        const double v = k == 0 ? p.pass1 : k == 1 ? p.pass4 : p.pass9;
        path += fmt::format("{}{:.1f},{:.1f}", path.empty() ? "" : " ", x(p.iteration), y(v));
      }
      out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-dasharray=\"{}\" points=\"{}\"/>\n", color,
                         dashes[k], path);
      const double ly = T + 14.0 * legend++;
      out += fmt::format(
          "<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-dasharray=\"{}\"/>"
          "<text x=\"{}\" y=\"{:.1f}\">{} pass@{}</text>\n",
          W - R + 10, ly, W - R + 30, ly, color, dashes[k], W - R + 35, ly + 4, label, k == 0 ? 1 : k == 1 ? 4 : 9);
    }
  }
  return out + "</svg>\n";
}

void emit_curves(const std::vector<CurvePoint>& points, const std::filesystem::path& stem, bool plot) {
  if (points.empty()) throw std::invalid_argument("no evaluation points to emit");
  write_file_atomic(stem.string() + ".csv", curves_csv(points));
  if (plot) write_file_atomic(stem.string() + ".svg", curves_svg({{stem.filename().string(), points}}));
}

}  // namespace cexgen
