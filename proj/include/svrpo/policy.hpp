#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "svrpo/linalg.hpp"
#include "svrpo/rng.hpp"

namespace svrpo {

struct PolicyArchitecture {
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<int> hidden_sizes;
  double init_log_std = 0.0;

  void validate() const;
  bool same_shape(const PolicyArchitecture& other) const;
};

/// Diagonal-Gaussian policy. The mean is an MLP with tanh hidden activations
/// and a linear output layer; the log standard deviation is one learned
/// scalar per action dimension, independent of the state.
///
/// Parameters flatten layer-major, weights (row-major) before biases, with
/// log_std last. unflatten(flatten(p)) is exact.
class GaussianMlpPolicy {
 public:
  /// Zero weights and biases, log_std = arch.init_log_std.
  explicit GaussianMlpPolicy(PolicyArchitecture arch);
  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  GaussianMlpPolicy(PolicyArchitecture arch, Rng& rng);

  const PolicyArchitecture& arch() const { return arch_; }
  std::size_t param_count() const { return param_count_; }

  Vector flatten() const;
  void unflatten(const Vector& params);

  /// (mean, std) at an observation. Throws ArgumentError for non-finite or
  /// wrongly sized input.
  std::pair<Vector, Vector> forward(const Vector& obs) const;

  /// Mean only; cheaper when std is not needed.
  Vector mean(const Vector& obs) const;

  /// exp(log_std), the state-independent action standard deviation.
  Vector action_std() const;
  const Vector& log_std() const { return log_std_; }
  void set_log_std(const Vector& log_std);

  double log_prob(const Vector& obs, const Vector& action) const;

  /// Exact backpropagated gradient of log_prob w.r.t. all parameters,
  /// in flatten order.
  Vector grad_log_prob(const Vector& obs, const Vector& action) const;

  /// acc += weight * grad_log_prob(obs, action), term by term. Bulk gradient
  /// estimators use this so their arithmetic matches a literal
  /// per-sample-gradient loop bit for bit.
  void accumulate_score(const Vector& obs, const Vector& action, double weight,
                        Vector& acc) const;

 private:
  void check_obs(const Vector& obs) const;
  void check_action(const Vector& action) const;

  PolicyArchitecture arch_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  Vector log_std_;
  std::size_t param_count_ = 0;
};

/// Log density of a diagonal Gaussian.
double diag_gaussian_log_prob(const Vector& mean, const Vector& log_std,
                              const Vector& std, const Vector& action);

/// KL(p || q) for diagonal Gaussians given their distribution parameters.
double kl_diag_gaussian(const Vector& mean_p, const Vector& log_std_p, const Vector& std_p,
                        const Vector& mean_q, const Vector& log_std_q, const Vector& std_q);

/// Per-state KL divergence KL(p(.|obs) || q(.|obs)). Architectures must match.
double kl(const GaussianMlpPolicy& p, const GaussianMlpPolicy& q, const Vector& obs);

/// Empirical Fisher-vector product on a state subsample:
///   (1/B) sum_i (g_i . v) g_i + damping * v,   g_i = grad log pi(a_i | s_i),
/// where the actions are the recorded rollout actions paired with each state.
Vector fisher_vector_product(const GaussianMlpPolicy& policy,
                             const std::vector<Vector>& states,
                             const std::vector<Vector>& actions,
                             const Vector& v, double damping);

}  // namespace svrpo
