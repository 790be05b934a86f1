// Acceptance suite: one checkable criterion per function, each printing a
// single [PASS]/[FAIL] line. Run with no arguments for all criteria or with
// a list of criterion numbers (e.g. "svrpo_acceptance 4 7").
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "svrpo/envs.hpp"
#include "svrpo/errors.hpp"
#include "svrpo/experiment.hpp"
#include "svrpo/gradients.hpp"
#include "svrpo/policy.hpp"
#include "svrpo/rollout.hpp"
#include "svrpo/trustopt.hpp"

using namespace svrpo;

namespace {

struct Criterion {
  std::string description;
  std::function<bool(std::string&)> run;
};

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.next_gaussian();
  return v;
}

GaussianMlpPolicy random_tiny_policy(std::uint64_t seed, const PolicyArchitecture& arch) {
  Rng rng(seed, 0);
  GaussianMlpPolicy p(arch, rng);
  Vector ls(static_cast<std::size_t>(arch.action_dim));
  for (double& x : ls) x = 0.3 * rng.next_gaussian();
  p.set_log_std(ls);
  return p;
}

SurrogateBatch batch_from_env(const Env& env, std::size_t n, std::uint64_t seed,
                              GaussianMlpPolicy* anchor_out = nullptr,
                              std::vector<int> hidden = {8, 8}) {
  Rng rng(seed, 0);
  GaussianMlpPolicy anchor(
      PolicyArchitecture{env.obs_dim(), env.action_dim(), std::move(hidden), 0.0}, rng);
  const auto trajs = collect(anchor, env, n, Rng(seed + 1, 0));
  const SurrogateBatch batch = build_batch(anchor, trajs, LinearBaseline(), 0.99, true);
  if (anchor_out) *anchor_out = anchor;
  return batch;
}

SurrogateBatch clip_batch(SurrogateBatch batch, std::size_t n) {
  batch.observations.resize(n);
  batch.actions.resize(n);
  batch.advantages.resize(n);
  batch.anchor_log_probs.resize(n);
  return batch;
}

Vector perturbed_params(const Vector& w, double rel_scale, std::uint64_t seed) {
  Rng rng(seed, 3);
  Vector dir(w.size());
  for (double& x : dir) x = rng.next_gaussian();
  Vector out = w;
  axpy_inplace(rel_scale * norm2(w) / norm2(dir), dir, out);
  return out;
}

double trace_cov(const std::vector<Vector>& draws) {
  Vector mean(draws.front().size(), 0.0);
  for (const Vector& g : draws) axpy_inplace(1.0, g, mean);
  for (double& x : mean) x /= static_cast<double>(draws.size());
  double acc = 0.0;
  for (const Vector& g : draws)
    for (std::size_t i = 0; i < g.size(); ++i) acc += (g[i] - mean[i]) * (g[i] - mean[i]);
  return acc / static_cast<double>(draws.size() - 1);
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness vs central finite differences.
bool criterion_gradients(std::string& detail) {
  const PolicyArchitecture arch{2, 2, {3}, 0.0};
  double worst_glp = 0.0, worst_psg = 0.0;
  const PointMassEnv env;
  GaussianMlpPolicy anchor(PolicyArchitecture{4, 2, {4}, 0.0});
  const SurrogateBatch pm_batch = [&] {
    Rng rng(5, 0);
    anchor = GaussianMlpPolicy(PolicyArchitecture{4, 2, {4}, 0.0}, rng);
    const auto trajs = collect(anchor, env, 100, Rng(6, 0));
    return build_batch(anchor, trajs, LinearBaseline(), 0.99, true);
  }();

  Rng rng(1, 0);
  for (int trial = 0; trial < 100; ++trial) {
    // grad_log_prob on a random tiny policy.
    GaussianMlpPolicy p = random_tiny_policy(1000 + trial, arch);
    const Vector obs = random_vector(rng, 2);
    const Vector act = random_vector(rng, 2);
    GaussianMlpPolicy probe = p;
    const auto fd = oracles::central_difference(
        [&](const oracles::Vec& w) {
          probe.unflatten(w);
          return probe.log_prob(obs, act);
        },
        p.flatten(), 1e-5);
    worst_glp = std::max(worst_glp, oracles::gradient_mismatch(p.grad_log_prob(obs, act), fd));

    // per_sample_grad on the rollout batch at perturbed parameters.
    const std::size_t t = static_cast<std::size_t>(trial % pm_batch.size());
    GaussianMlpPolicy w = anchor;
    w.unflatten(perturbed_params(anchor.flatten(), 0.05, 2000 + trial));
    GaussianMlpPolicy probe_w = w;
    const auto fd_ps = oracles::central_difference(
        [&](const oracles::Vec& params) {
          probe_w.unflatten(params);
          return importance_ratio(probe_w, pm_batch, t) * pm_batch.advantages[t];
        },
        w.flatten(), 1e-5);
    worst_psg =
        std::max(worst_psg, oracles::gradient_mismatch(per_sample_grad(w, pm_batch, t), fd_ps));
  }
  std::ostringstream ss;
  ss << "max rel err: grad_log_prob " << worst_glp << ", per_sample_grad " << worst_psg;
  detail = ss.str();
  return worst_glp <= 1e-5 && worst_psg <= 1e-5;
}

// ---------------------------------------------------------------------------
// 2. SVRG unbiasedness over all singleton minibatches.
bool criterion_unbiasedness(std::string& detail) {
  const PointMassEnv env;
  GaussianMlpPolicy anchor(PolicyArchitecture{1, 1, {1}});
  SurrogateBatch batch = batch_from_env(env, 100, 11, &anchor, {4});
  batch = clip_batch(std::move(batch), 50);
  const AnchorGradientCache cache(anchor, batch);

  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    GaussianMlpPolicy w = anchor;
    w.unflatten(perturbed_params(anchor.flatten(), 0.02, 50 + point));
    Vector mean(w.param_count(), 0.0);
    for (std::size_t t = 0; t < batch.size(); ++t)
      axpy_inplace(1.0, svrg_gradient(w, cache, batch, {t}).vector, mean);
    for (double& x : mean) x /= static_cast<double>(batch.size());
    const Vector full = full_gradient(w, batch).vector;
    worst = std::max(worst, oracles::max_abs_diff(mean, full));
  }
  detail = "max |avg(svrg singletons) - full| = " + std::to_string(worst);
  return worst <= 1e-12;
}

// ---------------------------------------------------------------------------
// 3. Anchor identity, exact.
bool criterion_anchor_identity(std::string& detail) {
  const PendulumEnv env;
  GaussianMlpPolicy anchor(PolicyArchitecture{1, 1, {1}});
  const SurrogateBatch batch = batch_from_env(env, 400, 21, &anchor);
  const AnchorGradientCache cache(anchor, batch);
  Rng rng(22, 0);
  for (int draw = 0; draw < 20; ++draw) {
    std::vector<std::size_t> idx(16);
    for (std::size_t& i : idx) i = rng.next_below(batch.size());
    const Vector g = svrg_gradient(anchor, cache, batch, idx).vector;
    if (g != cache.full_gradient()) {
      detail = "draw " + std::to_string(draw) + " differs from the anchor gradient";
      return false;
    }
  }
  detail = "20/20 random minibatches reproduce g~ bitwise";
  return true;
}

// ---------------------------------------------------------------------------
// 4. Variance reduction near the anchor on both environments.
bool criterion_variance_reduction(std::string& detail) {
  std::ostringstream ss;
  bool ok = true;
  for (const char* env_name : {"pointmass", "pendulum"}) {
    const auto env = make_env(env_name);
    GaussianMlpPolicy anchor(PolicyArchitecture{1, 1, {1}});
    const SurrogateBatch batch = batch_from_env(*env, 400, 31, &anchor);
    const AnchorGradientCache cache(anchor, batch);

    GaussianMlpPolicy w = anchor;
    w.unflatten(perturbed_params(anchor.flatten(), 1e-3, 37));

    Rng rng(41, 0);
    std::vector<Vector> svrg_draws, mb_draws;
    const std::size_t m = 10;
    for (int d = 0; d < 500; ++d) {
      std::vector<std::size_t> idx(m);
      for (std::size_t& i : idx) i = rng.next_below(batch.size());
      svrg_draws.push_back(svrg_gradient(w, cache, batch, idx).vector);
      mb_draws.push_back(minibatch_gradient(w, batch, idx).vector);
    }
    const double ratio = trace_cov(svrg_draws) / trace_cov(mb_draws);
    ss << env_name << " trace-cov ratio " << ratio << "  ";
    ok = ok && ratio <= 0.5;
  }
  detail = ss.str();
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Fisher-vector products vs dense Fisher; CG vs dense solve.
bool criterion_fisher_cg(std::string& detail) {
  double worst_fvp = 0.0;
  Rng rng(51, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const PolicyArchitecture arch{2, 2, {2}, 0.0};  // P = 14 <= 30
    const GaussianMlpPolicy p = random_tiny_policy(500 + trial, arch);
    const std::size_t np = p.param_count();
    std::vector<Vector> states, actions;
    for (int i = 0; i < 16; ++i) {
      states.push_back(random_vector(rng, 2));
      actions.push_back(random_vector(rng, 2));
    }
    oracles::Mat dense(np, oracles::Vec(np, 0.0));
    for (std::size_t i = 0; i < states.size(); ++i) {
      const Vector g = p.grad_log_prob(states[i], actions[i]);
      for (std::size_t r = 0; r < np; ++r)
        for (std::size_t c = 0; c < np; ++c)
          dense[r][c] += g[r] * g[c] / static_cast<double>(states.size());
    }
    const double damping = 1e-5;
    const Vector v = random_vector(rng, np);
    Vector expected(np, 0.0);
    for (std::size_t r = 0; r < np; ++r) {
      for (std::size_t c = 0; c < np; ++c) expected[r] += dense[r][c] * v[c];
      expected[r] += damping * v[r];
    }
    worst_fvp = std::max(worst_fvp, oracles::max_abs_diff(
                                        fisher_vector_product(p, states, actions, v, damping),
                                        expected));
  }

  double worst_cg = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 20;
    Rng srng(60 + seed, 0);
    oracles::Mat b(n, oracles::Vec(n));
    for (auto& row : b)
      for (double& x : row) x = srng.next_gaussian();
    oracles::Mat a(n, oracles::Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) a[i][j] += b[k][i] * b[k][j];
        if (i == j) a[i][j] += 1.0;
      }
    Vector g(n);
    for (double& x : g) x = srng.next_gaussian();
    CgConfig cfg;
    cfg.max_iters = 200;
    cfg.residual_tol = 1e-13;
    const Vector x = conjugate_gradient(
        [&a](const Vector& v) {
          Vector out(v.size(), 0.0);
          for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) out[i] += a[i][j] * v[j];
          return out;
        },
        g, cfg);
    worst_cg = std::max(worst_cg, oracles::max_abs_diff(x, oracles::dense_solve(a, g)));
  }
  std::ostringstream ss;
  ss << "max FVP err " << worst_fvp << ", max CG err " << worst_cg;
  detail = ss.str();
  return worst_fvp <= 1e-10 && worst_cg <= 1e-8;
}

// ---------------------------------------------------------------------------
// 6. Trust-region contract over full runs of all four algorithms.
bool criterion_trust_region(std::string& detail) {
  const PointMassEnv env;
  int violations = 0;
  int accepted_total = 0;
  for (const Algorithm algo : {Algorithm::svrpo, Algorithm::trpo, Algorithm::svrpo_sgd,
                               Algorithm::svrpo_nofisher}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      SvrpoConfig cfg;
      cfg.epochs = 50;
      cfg.seed = seed;
      const TrainResult result = train(algo, cfg, env);
      for (const StepOutcome& out : result.step_outcomes) {
        if (!out.accepted) continue;
        ++accepted_total;
        if (!(out.measured_kl <= cfg.line_search.delta) ||
            !(out.surrogate_after > out.surrogate_before))
          ++violations;
      }
    }
  }
  detail = std::to_string(accepted_total) + " accepted steps, " +
           std::to_string(violations) + " violations";
  return violations == 0 && accepted_total > 0;
}

// ---------------------------------------------------------------------------
// 7. TRPO-equivalence degeneracy of svrpo at J=1, m=N, nu=1.
bool criterion_trpo_equivalence(std::string& detail) {
  const PointMassEnv env;
  SvrpoConfig cfg;
  cfg.n_transitions = 600;
  cfg.epochs = 10;
  cfg.inner_iters = 1;
  cfg.minibatch_size = 600;
  cfg.nu = 1.0;
  cfg.hidden_sizes = {16, 16};
  const TrainResult sv = svrpo_train(cfg, env);
  const TrainResult tr = trpo_train(cfg, env);
  double worst = 0.0;
  for (std::size_t e = 0; e < sv.param_history.size(); ++e)
    worst = std::max(worst, oracles::max_abs_diff(sv.param_history[e], tr.param_history[e]));
  detail = "max per-epoch parameter gap " + std::to_string(worst);
  return worst <= 1e-10;
}

// ---------------------------------------------------------------------------
// 8. Scaled-down headline comparison: svrpo vs trpo on pointmass.
bool criterion_headline(std::string& detail) {
  const PointMassEnv env;
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  auto run_all = [&](Algorithm algo) {
    std::vector<TrainResult> results;
    for (const std::uint64_t seed : seeds) {
      SvrpoConfig cfg;
      cfg.epochs = 50;
      cfg.seed = seed;
      results.push_back(train(algo, cfg, env));
    }
    return results;
  };
  const auto sv = run_all(Algorithm::svrpo);
  const auto tr = run_all(Algorithm::trpo);

  auto finals = [](const std::vector<TrainResult>& rs) {
    Vector v;
    for (const TrainResult& r : rs) v.push_back(r.records.back().mean_return);
    return v;
  };
  const double sv_final = median(finals(sv));
  const double tr_final = median(finals(tr));

  // Env steps at which svrpo's per-epoch median first reaches trpo's final
  // median (both algorithms consume identical per-epoch step counts).
  const std::size_t epochs = sv.front().records.size();
  std::size_t reach_steps = sv.front().records.back().env_steps_cumulative;
  bool reached = false;
  for (std::size_t e = 0; e < epochs && !reached; ++e) {
    Vector at_epoch;
    for (const TrainResult& r : sv) at_epoch.push_back(r.records[e].mean_return);
    if (median(at_epoch) >= tr_final) {
      reach_steps = sv.front().records[e].env_steps_cumulative;
      reached = true;
    }
  }
  const std::size_t tr_total = tr.front().records.back().env_steps_cumulative;
  const double efficiency = static_cast<double>(reach_steps) / static_cast<double>(tr_total);

  std::ostringstream ss;
  ss << "median final return svrpo " << sv_final << " vs trpo " << tr_final
     << "; svrpo reached trpo's final median at " << 100.0 * efficiency
     << "% of the step budget (soft target <= 80%)";
  const bool parity = sv_final >= tr_final;
  const bool efficient = reached && efficiency <= 0.8;
  if (!efficient) {
    // Soft clause missed: emit per-epoch variance-ratio diagnostics.
    SvrpoConfig diag_cfg;
    diag_cfg.epochs = 50;
    diag_cfg.seed = seeds.front();
    diag_cfg.diag_variance = true;
    const TrainResult diag = svrpo_train(diag_cfg, env);
    ss << "\n  diagnostics: per-epoch trace-cov(svrg)/trace-cov(minibatch) =";
    for (std::size_t e = 0; e < diag.variance_ratio_diag.size(); ++e) {
      if (e % 10 == 0) ss << "\n   ";
      ss << ' ' << diag.variance_ratio_diag[e];
    }
  }
  detail = ss.str();
  return parity;
}

// ---------------------------------------------------------------------------
// 9. Ablation ordering on pendulum.
bool criterion_ablations(std::string& detail) {
  const PendulumEnv env;
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  auto median_final = [&](Algorithm algo) {
    Vector finals;
    for (const std::uint64_t seed : seeds) {
      SvrpoConfig cfg;
      cfg.epochs = 50;
      cfg.seed = seed;
      finals.push_back(train(algo, cfg, env).records.back().mean_return);
    }
    return median(finals);
  };
  const double full = median_final(Algorithm::svrpo);
  const double sgd = median_final(Algorithm::svrpo_sgd);
  const double nofisher = median_final(Algorithm::svrpo_nofisher);
  std::ostringstream ss;
  ss << "median final return: svrpo " << full << ", svrpo-sgd " << sgd << ", svrpo-nofisher "
     << nofisher;
  detail = ss.str();
  return full >= sgd && full >= nofisher;
}

// ---------------------------------------------------------------------------
// 10. Determinism of the experiment harness.
bool criterion_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "svrpo_acceptance_det";
  std::error_code ec;
  fs::remove_all(base, ec);

  auto run_to = [&](const std::string& leaf) {
    ExperimentConfig cfg;
    cfg.out_dir = (base / leaf).string();
    cfg.seeds = {0, 1};
    cfg.train.n_transitions = 400;
    cfg.train.epochs = 3;
    cfg.train.inner_iters = 2;
    cfg.train.minibatch_size = 100;
    cfg.train.hidden_sizes = {8};
    return run_experiment(cfg);
  };
  const ExperimentSummary a = run_to("a");
  const ExperimentSummary b = run_to("b");

  auto strip_wall = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
    return out.str();
  };
  bool ok = true;
  for (std::size_t i = 0; i < a.csv_paths.size(); ++i)
    ok = ok && strip_wall(a.csv_paths[i]) == strip_wall(b.csv_paths[i]);
  fs::remove_all(base, ec);
  detail = ok ? "CSVs byte-identical (wall_ms excluded)" : "CSV mismatch";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, Criterion> criteria = {
      {1, {"gradient correctness vs finite differences (rel err <= 1e-5)", criterion_gradients}},
      {2, {"svrg unbiasedness over all singleton minibatches (<= 1e-12)", criterion_unbiasedness}},
      {3, {"svrg anchor identity (exact)", criterion_anchor_identity}},
      {4, {"variance reduction near the anchor (ratio <= 0.5, both envs)", criterion_variance_reduction}},
      {5, {"fisher-vector product and cg vs dense oracles (1e-10 / 1e-8)", criterion_fisher_cg}},
      {6, {"trust-region contract, all algorithms, 50 epochs x 3 seeds", criterion_trust_region}},
      {7, {"svrpo(J=1, m=N, nu=1) == trpo trajectories (<= 1e-10)", criterion_trpo_equivalence}},
      {8, {"pointmass headline: svrpo median final >= trpo (efficiency soft target)", criterion_headline}},
      {9, {"pendulum ablations: svrpo >= svrpo-sgd and svrpo-nofisher", criterion_ablations}},
      {10, {"byte-identical CSVs for identical configs and seeds", criterion_determinism}},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [num, c] : criteria) selected.push_back(num);

  int failures = 0;
  for (const int num : selected) {
    const auto it = criteria.find(num);
    if (it == criteria.end()) {
      std::printf("unknown criterion %d\n", num);
      ++failures;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = it->second.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d (%5.1fs): %s\n        %s\n", ok ? "PASS" : "FAIL", num,
                secs, it->second.description.c_str(), detail.c_str());
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
