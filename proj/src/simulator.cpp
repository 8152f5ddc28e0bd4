#include "cexgen/simulator.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "cexgen/errors.hpp"
#include "cexgen/reward.hpp"
#include "cexgen/rng.hpp"

namespace cexgen {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Normal normal_from_json(const nlohmann::json& j, Normal base) {
  if (j.contains("mean")) base.mean = j["mean"].get<double>();
  if (j.contains("sd")) base.sd = j["sd"].get<double>();
  if (!std::isfinite(base.mean) || !(base.sd >= 0.0) || !std::isfinite(base.sd))
    throw ConfigError("difficulty distribution needs a finite mean and sd >= 0");
  return base;
}

}  // namespace

nlohmann::json SimConfig::to_json() const {
  return {{"n_train", n_train},
          {"n_eval", n_eval},
          {"iterations", iterations},
          {"batch", batch},
          {"attempts", attempts},
          {"alpha", alpha.str()},
          {"eta", eta},
          {"initial_skill", initial_skill},
          {"schedule", schedule == Schedule::Cosine ? "cosine" : "constant"},
          {"d_M", {{"mean", d_M.mean}, {"sd", d_M.sd}}},
          {"d_H", {{"mean", d_H.mean}, {"sd", d_H.sd}}},
          {"seed", seed}};
}

SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig c) {
  try {
    if (j.contains("n_train")) c.n_train = j["n_train"].get<std::size_t>();
    if (j.contains("n_eval")) c.n_eval = j["n_eval"].get<std::size_t>();
    if (j.contains("iterations")) c.iterations = j["iterations"].get<std::size_t>();
    if (j.contains("batch")) c.batch = j["batch"].get<std::size_t>();
    if (j.contains("attempts")) c.attempts = j["attempts"].get<int>();
    if (j.contains("alpha"))
      c.alpha = j["alpha"].is_string() ? Fraction::parse(j["alpha"].get<std::string>())
                                       : Fraction::parse(fmt::format("{}", j["alpha"].get<double>()));
    if (j.contains("eta")) c.eta = j["eta"].get<double>();
    if (j.contains("initial_skill")) c.initial_skill = j["initial_skill"].get<double>();
    if (j.contains("schedule")) {
      const auto s = j["schedule"].get<std::string>();
      if (s == "cosine") c.schedule = Schedule::Cosine;
      else if (s == "constant") c.schedule = Schedule::Constant;
      else throw ConfigError(fmt::format("unknown schedule '{}'", s));
    }
    if (j.contains("d_M")) c.d_M = normal_from_json(j["d_M"], c.d_M);
    if (j.contains("d_H")) c.d_H = normal_from_json(j["d_H"], c.d_H);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("simulation config: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("simulation config: {}", e.what()));
  }
  make_reward_config(c.alpha);
  if (c.eta < 0.0 || !std::isfinite(c.eta)) throw ConfigError("eta must be finite and non-negative");
  if (c.n_train == 0 || c.n_eval == 0 || c.batch == 0) throw ConfigError("problem counts must be positive");
  if (c.attempts < 9) throw ConfigError("at least 9 evaluation attempts are needed for pass@9");
  return c;
}

std::vector<CurvePoint> SimRun::curve() const {
  std::vector<CurvePoint> out;
  for (const auto& it : iterations) out.push_back(it.eval);
  return out;
}

double SimRun::final_pass1() const { return iterations.empty() ? 0.0 : iterations.back().eval.pass1; }

std::size_t SimRun::iterations_to_90() const {
  const double target = 0.9 * final_pass1();
  for (const auto& it : iterations)
    if (it.eval.pass1 >= target) return it.eval.iteration;
  return iterations.empty() ? 0 : iterations.back().eval.iteration;
}

SimRun simulate(const SimConfig& cfg) {
  const RewardConfig rcfg = make_reward_config(cfg.alpha);

  Rng problems(derive_seed(cfg.seed, "problems"));
  std::vector<double> train_M(cfg.n_train), train_H(cfg.n_train), eval_M(cfg.n_eval);
  for (std::size_t i = 0; i < cfg.n_train; ++i) {
    train_M[i] = problems.normal(cfg.d_M.mean, cfg.d_M.sd);
    train_H[i] = problems.normal(cfg.d_H.mean, cfg.d_H.sd);
  }
  for (auto& d : eval_M) d = problems.normal(cfg.d_M.mean, cfg.d_M.sd);

  // Evaluation draws are fixed for the whole run, so pass rates move only
  // with skill.
  Rng eval_rng(derive_seed(cfg.seed, "eval"));
  std::vector<double> eval_u(cfg.n_eval * static_cast<std::size_t>(cfg.attempts));
  for (auto& u : eval_u) u = eval_rng.uniform();

  Rng train(derive_seed(cfg.seed, "train"));
  double s = cfg.initial_skill;
  SimRun run;
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    double mass = 0.0;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const std::size_t i = train.below(cfg.n_train);
      const bool v_M = train.uniform() < logistic(s - train_M[i]);
      const bool v_H = train.uniform() < logistic(s - train_H[i]);
      mass += compute_reward(v_M, v_H, rcfg).r.to_double();
    }
    mass /= static_cast<double>(cfg.batch);
    double lr = cfg.eta;
    if (cfg.schedule == Schedule::Cosine)
      lr *= 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(t) / static_cast<double>(cfg.iterations)));
    s += lr * mass;

    SimIteration it;
    it.skill = s;
    it.reward_mass = mass;
    it.eval.iteration = t + 1;
    double p1 = 0, p4 = 0, p9 = 0;
    const int n = cfg.attempts;
    for (std::size_t e = 0; e < cfg.n_eval; ++e) {
      const double p = logistic(s - eval_M[e]);
      int c = 0;
      for (int a = 0; a < n; ++a) c += eval_u[e * n + a] < p;
      p1 += pass_at_k(n, c, 1);
      p4 += pass_at_k(n, c, 4);
      p9 += pass_at_k(n, c, 9);
    }
    const double ne = static_cast<double>(cfg.n_eval);
    it.eval.pass1 = p1 / ne;
    it.eval.pass4 = p4 / ne;
    it.eval.pass9 = p9 / ne;
    run.iterations.push_back(it);
  }
  return run;
}

Comparison compare_settings(const SimConfig& a, const SimConfig& b, std::size_t runs, std::size_t threads) {
  if (runs == 0) throw ConfigError("runs must be at least 1");
  Comparison cmp;
  cmp.runs = runs;
  cmp.runs_a.resize(runs);
  cmp.runs_b.resize(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < runs;) {
      SimConfig ca = a, cb = b;
      ca.seed = cb.seed = a.seed + r;
      cmp.runs_a[r] = simulate(ca);
      cmp.runs_b[r] = simulate(cb);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::max<std::size_t>(1, std::min(threads, runs)); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  double wins = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const double fa = cmp.runs_a[r].final_pass1(), fb = cmp.runs_b[r].final_pass1();
    cmp.final_a += fa;
    cmp.final_b += fb;
    cmp.t90_a += static_cast<double>(cmp.runs_a[r].iterations_to_90());
    cmp.t90_b += static_cast<double>(cmp.runs_b[r].iterations_to_90());
    if (fa > fb) {
      ++cmp.strict_wins_a;
      wins += 1.0;
    } else if (fa == fb) {
      ++cmp.ties;
      wins += 0.5;
    }
  }
  const double n = static_cast<double>(runs);
  cmp.final_a /= n;
  cmp.final_b /= n;
  cmp.t90_a /= n;
  cmp.t90_b /= n;
  cmp.win_rate_a = wins / n;
  return cmp;
}

nlohmann::json Comparison::to_json(const std::string& la, const std::string& lb) const {
  return {{"runs", runs},
          {"settings", {la, lb}},
          {"final_pass1_mean", {{la, final_a}, {lb, final_b}}},
          {"iterations_to_90_mean", {{la, t90_a}, {lb, t90_b}}},
          {"strict_wins", {{la, strict_wins_a}, {lb, runs - strict_wins_a - ties}}},
          {"ties", ties},
          {"win_rate", {{la, win_rate_a}, {lb, 1.0 - win_rate_a}}}};
}

std::string Comparison::curves_csv(const std::string& la, const std::string& lb) const {
  std::string out = "run,setting,iteration,pass1,pass4,pass9\n";
  auto dump = [&](const std::vector<SimRun>& rs, const std::string& label) {
    for (std::size_t r = 0; r < rs.size(); ++r)
      for (const auto& it : rs[r].iterations)
        out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f}\n", r, label, it.eval.iteration, it.eval.pass1,
                           it.eval.pass4, it.eval.pass9);
  };
  dump(runs_a, la);
  dump(runs_b, lb);
  return out;
}

}  // namespace cexgen
