#include "svrpo/trustopt.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "svrpo/errors.hpp"

namespace svrpo {

namespace {

// Stream-id layout: purpose tag in the high bits, epoch below, leaving room
// for per-episode substreams. Keeps algorithms that share a sample path
// (e.g. the svrpo/trpo equivalence at J=1, m=N, nu=1) consuming identical
// randomness while svrpo-only draws live on their own streams.
constexpr std::uint64_t kStreamInit = 0;
constexpr std::uint64_t kPurposeRollout = 1;
constexpr std::uint64_t kPurposeMinibatch = 2;
constexpr std::uint64_t kPurposeFisher = 3;
constexpr std::uint64_t kPurposeDiag = 4;

std::uint64_t stream_for(std::uint64_t purpose, int epoch) {
  return (purpose << 40) + (static_cast<std::uint64_t>(epoch) << 20);
}

std::vector<std::size_t> draw_minibatch(Rng& rng, std::size_t n, std::size_t m) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = rng.next_below(n);
  return idx;
}

// Uniform subsample without replacement (partial Fisher-Yates); the full
// index range, in order, when the subsample covers the whole batch.
std::vector<std::size_t> draw_fisher_subsample(Rng& rng, std::size_t n, double nu) {
  auto b = static_cast<std::size_t>(std::ceil(nu * static_cast<double>(n)));
  b = std::min(std::max<std::size_t>(b, 1), n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (b == n) return idx;
  for (std::size_t i = 0; i < b; ++i)
    std::swap(idx[i], idx[i + rng.next_below(n - i)]);
  idx.resize(b);
  return idx;
}

double trace_covariance(const std::vector<Vector>& draws) {
  const std::size_t k = draws.size();
  Vector mean(draws.front().size(), 0.0);
  for (const Vector& g : draws) axpy_inplace(1.0, g, mean);
  for (double& x : mean) x /= static_cast<double>(k);
  double acc = 0.0;
  for (const Vector& g : draws)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = g[i] - mean[i];
      acc += d * d;
    }
  return acc / static_cast<double>(k - 1);
}

double variance_ratio_diagnostic(const GaussianMlpPolicy& policy,
                                 const AnchorGradientCache& cache,
                                 const SurrogateBatch& batch, std::size_t minibatch_size,
                                 Rng& rng) {
  constexpr int kDraws = 60;
  const std::size_t m = std::min<std::size_t>(minibatch_size, 50);
  std::vector<Vector> svrg_draws, mb_draws;
  svrg_draws.reserve(kDraws);
  mb_draws.reserve(kDraws);
  try {
    for (int d = 0; d < kDraws; ++d) {
      const auto idx = draw_minibatch(rng, batch.size(), m);
      svrg_draws.push_back(svrg_gradient(policy, cache, batch, idx).vector);
      mb_draws.push_back(minibatch_gradient(policy, batch, idx).vector);
    }
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double tr_mb = trace_covariance(mb_draws);
  if (!(tr_mb > 0.0)) return 0.0;
  return trace_covariance(svrg_draws) / tr_mb;
}

}  // namespace

void SvrpoConfig::validate() const {
  if (n_transitions == 0) throw ConfigError("batch: N must be positive");
  if (epochs < 0) throw ConfigError("epochs: must be non-negative");
  if (inner_iters < 1) throw ConfigError("inner: J must be at least 1");
  if (minibatch_size == 0) throw ConfigError("mini: m must be positive");
  if (minibatch_size > n_transitions) throw ConfigError("mini: m must not exceed N");
  if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("nu: must be in (0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma: must be in (0, 1)");
  if (cg.max_iters < 1) throw ConfigError("cg_iters: must be at least 1");
  if (!(cg.residual_tol > 0.0)) throw ConfigError("cg_tol: must be positive");
  if (line_search.max_backtracks < 1) throw ConfigError("backtracks: must be at least 1");
  if (!(line_search.delta > 0.0)) throw ConfigError("delta: must be positive");
  if (line_search.accept_ratio < 0.0) throw ConfigError("accept_ratio: must be non-negative");
  if (damping < 0.0) throw ConfigError("damping: must be non-negative");
  if (hidden_sizes.empty()) throw ConfigError("hidden: must name at least one layer");
  for (int h : hidden_sizes)
    if (h <= 0) throw ConfigError("hidden: layer sizes must be positive");
  if (horizon < 0) throw ConfigError("horizon: must be non-negative");
}

Vector conjugate_gradient(const LinearOperator& apply_h, const Vector& g,
                          const CgConfig& cfg, CgStats* stats) {
  const double g_norm = norm2(g);
  const double tol = cfg.residual_tol * std::max(1.0, g_norm);
  Vector x(g.size(), 0.0);
  Vector r = g;  // residual g - H x0 with x0 = 0
  Vector p = r;
  double rr = dot(r, r);
  CgStats local;
  local.residual_norm = std::sqrt(rr);
  if (local.residual_norm <= tol) {
    if (stats) *stats = local;
    return x;
  }
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Vector hp = apply_h(p);
    const double php = dot(p, hp);
    if (!std::isfinite(php) || php <= 0.0)
      throw NumericalError("conjugate_gradient: non-positive or non-finite curvature");
    const double alpha = rr / php;
    axpy_inplace(alpha, p, x);
    axpy_inplace(-alpha, hp, r);
    const double rr_new = dot(r, r);
    if (!std::isfinite(rr_new))
      throw NumericalError("conjugate_gradient: non-finite residual");
    local.iterations = it + 1;
    local.residual_norm = std::sqrt(rr_new);
    if (local.residual_norm <= tol) {
      if (stats) *stats = local;
      return x;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  local.hit_cap = true;
  if (stats) *stats = local;
  return x;
}

std::pair<Vector, double> natural_step(const Vector& x, const LinearOperator& apply_h,
                                       double delta) {
  const double curvature = dot(x, apply_h(x));
  if (!std::isfinite(curvature) || curvature <= 0.0)
    throw NumericalError("natural_step: non-positive curvature");
  const double eta0 = std::sqrt(2.0 * delta / curvature);
  if (!std::isfinite(eta0)) throw NumericalError("natural_step: non-finite step size");
  return {scaled(x, eta0), eta0};
}

SubsampledFisher::SubsampledFisher(const GaussianMlpPolicy& policy,
                                   const SurrogateBatch& batch,
                                   const std::vector<std::size_t>& indices, double damping)
    : damping_(damping) {
  if (indices.empty()) throw ArgumentError("SubsampledFisher: empty subsample");
  scores_.reserve(indices.size());
  for (std::size_t t : indices) {
    if (t >= batch.size()) throw ArgumentError("SubsampledFisher: index out of range");
    scores_.push_back(policy.grad_log_prob(batch.observations[t], batch.actions[t]));
  }
}

Vector SubsampledFisher::apply(const Vector& v) const {
  if (v.size() != scores_.front().size())
    throw ArgumentError("SubsampledFisher: vector dimension mismatch");
  Vector acc(v.size(), 0.0);
  for (const Vector& score : scores_) {
    const double coef = dot(score, v);
    axpy_inplace(coef, score, acc);
  }
  const double inv = 1.0 / static_cast<double>(scores_.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] * inv + damping_ * v[i];
  return acc;
}

BatchEval::BatchEval(const GaussianMlpPolicy& anchor, const SurrogateBatch& batch)
    : batch_(&batch),
      anchor_log_std_(anchor.log_std()),
      anchor_std_(anchor.action_std()) {
  anchor_means_.reserve(batch.size());
  for (const Vector& obs : batch.observations) anchor_means_.push_back(anchor.mean(obs));
}

SurrogateEval BatchEval::evaluate(const GaussianMlpPolicy& candidate) const {
  const Vector cand_std = candidate.action_std();
  const Vector& cand_log_std = candidate.log_std();
  double surrogate = 0.0;
  double kl_sum = 0.0;
  for (std::size_t t = 0; t < batch_->size(); ++t) {
    const Vector mu = candidate.mean(batch_->observations[t]);
    const double lp = diag_gaussian_log_prob(mu, cand_log_std, cand_std, batch_->actions[t]);
    const double log_ratio = lp - batch_->anchor_log_probs[t];
    if (log_ratio > 30.0)
      throw DivergenceError("surrogate evaluation: importance ratio overflow");
    surrogate += std::exp(log_ratio) * batch_->advantages[t];
    kl_sum += kl_diag_gaussian(anchor_means_[t], anchor_log_std_, anchor_std_, mu,
                               cand_log_std, cand_std);
  }
  const double n = static_cast<double>(batch_->size());
  return {surrogate / n, kl_sum / n};
}

StepOutcome backtracking_line_search(GaussianMlpPolicy& policy, const Vector& step,
                                     const CandidateEvaluator& eval,
                                     const LineSearchConfig& cfg, double eta0,
                                     double predicted_improvement) {
  check_finite(step, "line-search step");
  const Vector w0 = policy.flatten();
  const double surrogate_before = eval(policy).surrogate;

  StepOutcome outcome;
  outcome.surrogate_before = surrogate_before;
  outcome.surrogate_after = surrogate_before;

  double scale = 1.0;
  for (int k = 0; k < cfg.max_backtracks; ++k, scale *= 0.5) {
    Vector candidate = w0;
    axpy_inplace(scale, step, candidate);
    policy.unflatten(candidate);
    SurrogateEval ev;
    try {
      ev = eval(policy);
    } catch (const DivergenceError&) {
      continue;  // shrink and retry
    }
    const double improvement = ev.surrogate - surrogate_before;
    const double required = cfg.accept_ratio * std::max(0.0, predicted_improvement * scale);
    if (ev.mean_kl <= cfg.delta && improvement > required && improvement > 0.0) {
      outcome.accepted = true;
      outcome.eta = eta0 * scale;
      outcome.measured_kl = ev.mean_kl;
      outcome.surrogate_after = ev.surrogate;
      outcome.backtracks = k;
      return outcome;
    }
  }
  policy.unflatten(w0);  // bit-identical restore
  outcome.backtracks = cfg.max_backtracks;
  return outcome;
}

StepOutcome backtracking_line_search(GaussianMlpPolicy& policy, const Vector& step,
                                     const SurrogateBatch& batch,
                                     const LineSearchConfig& cfg) {
  GaussianMlpPolicy anchor = policy;
  anchor.unflatten(batch.anchor_params);
  const BatchEval eval(anchor, batch);
  return backtracking_line_search(
      policy, step, [&eval](const GaussianMlpPolicy& c) { return eval.evaluate(c); }, cfg,
      1.0, 0.0);
}

const char* algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::svrpo: return "svrpo";
    case Algorithm::trpo: return "trpo";
    case Algorithm::svrpo_sgd: return "svrpo-sgd";
    case Algorithm::svrpo_nofisher: return "svrpo-nofisher";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "svrpo") return Algorithm::svrpo;
  if (name == "trpo") return Algorithm::trpo;
  if (name == "svrpo-sgd") return Algorithm::svrpo_sgd;
  if (name == "svrpo-nofisher") return Algorithm::svrpo_nofisher;
  throw ConfigError("algo: unknown algorithm '" + name +
                    "' (expected svrpo|trpo|svrpo-sgd|svrpo-nofisher)");
}

TrainResult train(Algorithm algo, const SvrpoConfig& config, const Env& env) {
  config.validate();
  if (config.n_transitions < static_cast<std::size_t>(env.horizon()))
    throw ConfigError("batch: N must be at least the environment horizon");

  const bool uses_fisher = algo == Algorithm::svrpo || algo == Algorithm::trpo;
  const int inner_iters = algo == Algorithm::trpo ? 1 : config.inner_iters;

  PolicyArchitecture arch{env.obs_dim(), env.action_dim(), config.hidden_sizes,
                          config.init_log_std};
  Rng init_rng(config.seed, kStreamInit);
  GaussianMlpPolicy policy(arch, init_rng);

  TrainResult result;
  result.arch = arch;
  LinearBaseline baseline;  // first epoch uses the zero baseline
  std::size_t cumulative_steps = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    try {
      const Rng rollout_rng(config.seed, stream_for(kPurposeRollout, epoch));
      const auto trajectories = collect(policy, env, config.n_transitions, rollout_rng);
      std::size_t epoch_steps = 0;
      Vector episode_returns;
      episode_returns.reserve(trajectories.size());
      for (const Trajectory& traj : trajectories) {
        epoch_steps += traj.transitions.size();
        episode_returns.push_back(traj.total_reward());
      }
      const auto [mean_return, var_return] = mean_and_var(episode_returns);

      // Advantages come from the previous epoch's baseline; the refit below
      // serves the next epoch.
      const SurrogateBatch batch = build_batch(policy, trajectories, baseline,
                                               config.gamma, config.normalize_advantages);
      baseline = fit_baseline(trajectories, config.gamma);
      if (!config.dump_prefix.empty())
        dump_trajectories(config.dump_prefix + "_epoch" + std::to_string(epoch) + ".jsonl",
                          epoch, trajectories);

      const AnchorGradientCache cache(policy, batch);
      const BatchEval eval(cache.anchor_policy(), batch);
      const double anchor_grad_norm = norm2(cache.full_gradient());

      Rng minibatch_rng(config.seed, stream_for(kPurposeMinibatch, epoch));
      Rng fisher_rng(config.seed, stream_for(kPurposeFisher, epoch));

      GaussianMlpPolicy current = policy;
      int accepted = 0, rejected = 0;

      for (int j = 0; j < inner_iters; ++j) {
        try {
          GradientEstimate grad;
          switch (algo) {
            case Algorithm::trpo:
              grad = {cache.full_gradient(), batch.size(), EstimatorKind::full};
              break;
            case Algorithm::svrpo:
            case Algorithm::svrpo_nofisher:
              grad = svrg_gradient(current, cache, batch,
                                   draw_minibatch(minibatch_rng, batch.size(),
                                                  config.minibatch_size));
              break;
            case Algorithm::svrpo_sgd:
              grad = minibatch_gradient(current, batch,
                                        draw_minibatch(minibatch_rng, batch.size(),
                                                       config.minibatch_size));
              break;
          }
          if (!(norm2(grad.vector) > 0.0)) {
            StepOutcome outcome;
            const double surr = eval.evaluate(current).surrogate;
            outcome.surrogate_before = outcome.surrogate_after = surr;
            outcome.backtracks = 0;
            result.step_outcomes.push_back(outcome);
            ++rejected;
            continue;
          }

          std::unique_ptr<SubsampledFisher> fisher;
          LinearOperator apply_h;
          if (uses_fisher) {
            fisher = std::make_unique<SubsampledFisher>(
                current, batch,
                draw_fisher_subsample(fisher_rng, batch.size(), config.nu),
                config.damping);
            apply_h = [&fisher](const Vector& v) { return fisher->apply(v); };
          } else {
            apply_h = [](const Vector& v) { return v; };
          }

          CgStats cg_stats;
          const Vector x = conjugate_gradient(apply_h, grad.vector, config.cg, &cg_stats);
          if (cg_stats.hit_cap) ++result.cg_capped_steps;
          const auto [step, eta0] = natural_step(x, apply_h, config.line_search.delta);
          const double predicted = dot(grad.vector, step);

          StepOutcome outcome = backtracking_line_search(
              current, step,
              [&eval](const GaussianMlpPolicy& c) { return eval.evaluate(c); },
              config.line_search, eta0, predicted);
          if (outcome.accepted) {
            if (!(outcome.measured_kl <= config.line_search.delta) ||
                !(outcome.surrogate_after > outcome.surrogate_before))
              throw NumericalError("accepted step violates the trust-region contract");
            ++accepted;
          } else {
            ++rejected;
          }
          result.step_outcomes.push_back(outcome);
        } catch (const NumericalError& e) {
          throw NumericalError("inner step " + std::to_string(j + 1) + ": " + e.what());
        }
      }

      policy = current;
      cumulative_steps += epoch_steps;

      IterationRecord rec;
      rec.epoch = epoch;
      rec.env_steps_cumulative = cumulative_steps;
      rec.mean_return = mean_return;
      rec.std_return = std::sqrt(var_return);
      rec.mean_kl = eval.evaluate(policy).mean_kl;
      rec.accepted_steps = accepted;
      rec.rejected_steps = rejected;
      rec.grad_norm = anchor_grad_norm;
      rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - wall_start)
                        .count();
      result.records.push_back(rec);
      result.param_history.push_back(policy.flatten());

      if (config.diag_variance) {
        Rng diag_rng(config.seed, stream_for(kPurposeDiag, epoch));
        result.variance_ratio_diag.push_back(variance_ratio_diagnostic(
            policy, cache, batch, config.minibatch_size, diag_rng));
      }
    } catch (const NumericalError& e) {
      throw NumericalError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }

  result.final_params = policy.flatten();
  return result;
}

TrainResult svrpo_train(const SvrpoConfig& config, const Env& env) {
  return train(Algorithm::svrpo, config, env);
}
TrainResult trpo_train(const SvrpoConfig& config, const Env& env) {
  return train(Algorithm::trpo, config, env);
}
TrainResult ablation_sgd_train(const SvrpoConfig& config, const Env& env) {
  return train(Algorithm::svrpo_sgd, config, env);
}
TrainResult ablation_nofisher_train(const SvrpoConfig& config, const Env& env) {
  return train(Algorithm::svrpo_nofisher, config, env);
}

}  // namespace svrpo
