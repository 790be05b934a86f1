#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "svrpo/envs.hpp"
#include "svrpo/gradients.hpp"
#include "svrpo/linalg.hpp"
#include "svrpo/policy.hpp"
#include "svrpo/rollout.hpp"

namespace svrpo {

struct CgConfig {
  int max_iters = 10;
  double residual_tol = 1e-10;
};

struct LineSearchConfig {
  int max_backtracks = 10;
  double delta = 0.01;  // KL radius
  /// Fraction of the predicted linear improvement a candidate must beat.
  /// 0 accepts any strict surrogate improvement.
  double accept_ratio = 0.0;
};

struct SvrpoConfig {
  std::size_t n_transitions = 2000;  // N, transitions per epoch
  int epochs = 50;                   // L
  int inner_iters = 5;               // J
  std::size_t minibatch_size = 400;  // m
  double nu = 0.1;                   // Fisher subsample ratio
  double gamma = 0.99;
  CgConfig cg;
  LineSearchConfig line_search;
  double damping = 1e-5;
  std::uint64_t seed = 0;
  std::vector<int> hidden_sizes = {32, 32};
  double init_log_std = 0.0;
  int horizon = 0;  // 0 keeps the environment default
  bool normalize_advantages = true;
  /// Per-epoch SVRG-vs-minibatch trace-covariance ratio (costly; for
  /// diagnostics output only).
  bool diag_variance = false;
  /// When non-empty, per-epoch trajectory dumps are written under this
  /// prefix as <prefix>_epoch<l>.jsonl.
  std::string dump_prefix;

  void validate() const;  // throws ConfigError naming the field
};

struct StepOutcome {
  bool accepted = false;
  double eta = 0.0;  // effective step size along the CG direction
  double measured_kl = 0.0;
  double surrogate_before = 0.0;
  double surrogate_after = 0.0;
  int backtracks = 0;
};

struct IterationRecord {
  int epoch = 0;
  std::size_t env_steps_cumulative = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_kl = 0.0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double grad_norm = 0.0;
  std::int64_t wall_ms = 0;
};

struct TrainResult {
  std::vector<IterationRecord> records;
  /// Policy parameters after each epoch, in epoch order.
  std::vector<Vector> param_history;
  /// Every inner-step outcome of the whole run, in execution order.
  std::vector<StepOutcome> step_outcomes;
  /// Inner steps whose CG hit the iteration cap before the residual bound.
  int cg_capped_steps = 0;
  /// Filled when diag_variance is set: per-epoch ratio
  /// traceCov(svrg) / traceCov(minibatch) at the epoch's final iterate.
  std::vector<double> variance_ratio_diag;
  PolicyArchitecture arch;
  Vector final_params;
};

struct CgStats {
  int iterations = 0;
  double residual_norm = 0.0;
  bool hit_cap = false;
};

using LinearOperator = std::function<Vector(const Vector&)>;

/// Standard conjugate gradients from x0 = 0 for a symmetric positive
/// definite operator. Stops when |A x - g| <= residual_tol * max(1, |g|)
/// or after max_iters rounds.
Vector conjugate_gradient(const LinearOperator& apply_h, const Vector& g,
                          const CgConfig& cfg, CgStats* stats = nullptr);

/// Scale the CG direction so the quadratic KL model at the full step equals
/// delta: eta0 = sqrt(2 delta / (x' H x)). Returns (eta0 * x, eta0).
std::pair<Vector, double> natural_step(const Vector& x, const LinearOperator& apply_h,
                                       double delta);

/// Fisher operator over a fixed state subsample with per-sample score
/// vectors precomputed once; apply() matches
/// policy::fisher_vector_product on the same (state, action) pairs.
class SubsampledFisher {
 public:
  SubsampledFisher(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                   const std::vector<std::size_t>& indices, double damping);
  Vector apply(const Vector& v) const;
  std::size_t subsample_size() const { return scores_.size(); }

 private:
  std::vector<Vector> scores_;
  double damping_;
};

struct SurrogateEval {
  double surrogate = 0.0;  // (1/N) sum rho_t A_t
  double mean_kl = 0.0;    // mean state-wise KL(anchor, candidate)
};

/// Full-batch evaluation context for one epoch: anchor distribution
/// parameters are computed once, after which evaluating a candidate costs a
/// single forward pass per transition.
class BatchEval {
 public:
  BatchEval(const GaussianMlpPolicy& anchor, const SurrogateBatch& batch);

  /// Throws DivergenceError when any log importance ratio exceeds 30.
  SurrogateEval evaluate(const GaussianMlpPolicy& candidate) const;

 private:
  const SurrogateBatch* batch_;
  std::vector<Vector> anchor_means_;
  Vector anchor_log_std_;
  Vector anchor_std_;
};

using CandidateEvaluator = std::function<SurrogateEval(const GaussianMlpPolicy&)>;

/// Backtracking line search along `step` from the policy's current
/// parameters: tries scales 1, 1/2, 1/4, ... and accepts the first candidate
/// that strictly improves the surrogate and keeps the mean KL to the epoch
/// anchor within delta. On acceptance the policy is left at the accepted
/// parameters; otherwise it is restored bit-identically. Divergence errors
/// reject the candidate and shrink. eta0 is the step's natural scale,
/// predicted_improvement the linear model of the surrogate gain at scale 1.
StepOutcome backtracking_line_search(GaussianMlpPolicy& policy, const Vector& step,
                                     const CandidateEvaluator& eval,
                                     const LineSearchConfig& cfg, double eta0,
                                     double predicted_improvement);

/// Convenience overload matching the epoch-anchor semantics directly from a
/// batch (reconstructs the anchor policy from batch.anchor_params).
StepOutcome backtracking_line_search(GaussianMlpPolicy& policy, const Vector& step,
                                     const SurrogateBatch& batch,
                                     const LineSearchConfig& cfg);

enum class Algorithm { svrpo, trpo, svrpo_sgd, svrpo_nofisher };

const char* algorithm_name(Algorithm algo);
Algorithm algorithm_from_name(const std::string& name);  // throws ConfigError

/// One training run. All four algorithms share the epoch skeleton
/// (collect, freeze batch, anchor gradient, inner natural-gradient steps
/// with line search); they differ in the gradient estimator and the
/// preconditioner:
///   svrpo          svrg gradient, subsampled Fisher
///   trpo           full gradient, subsampled Fisher, single inner step
///   svrpo_sgd      minibatch gradient, identity preconditioner
///   svrpo_nofisher svrg gradient, identity preconditioner
TrainResult train(Algorithm algo, const SvrpoConfig& config, const Env& env);

TrainResult svrpo_train(const SvrpoConfig& config, const Env& env);
TrainResult trpo_train(const SvrpoConfig& config, const Env& env);
TrainResult ablation_sgd_train(const SvrpoConfig& config, const Env& env);
TrainResult ablation_nofisher_train(const SvrpoConfig& config, const Env& env);

}  // namespace svrpo
