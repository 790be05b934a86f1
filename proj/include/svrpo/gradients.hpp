#pragma once

#include <cstddef>
#include <vector>

#include "svrpo/linalg.hpp"
#include "svrpo/policy.hpp"
#include "svrpo/rollout.hpp"

namespace svrpo {

enum class EstimatorKind { full, minibatch, svrg };

struct GradientEstimate {
  Vector vector;
  std::size_t n_samples_used = 0;
  EstimatorKind kind = EstimatorKind::full;
};

/// Anchor-point data for the variance-reduced estimator: the full-batch
/// gradient at the anchor parameters plus a copy of the anchor policy used
/// to recompute per-sample anchor gradients on demand (caching all N of
/// them densely would cost N x P).
class AnchorGradientCache {
 public:
  AnchorGradientCache(const GaussianMlpPolicy& anchor_policy, const SurrogateBatch& batch);

  const Vector& full_gradient() const { return full_gradient_; }
  const GaussianMlpPolicy& anchor_policy() const { return anchor_policy_; }

 private:
  GaussianMlpPolicy anchor_policy_;
  Vector full_gradient_;
};

/// Importance ratio rho_t = exp(log pi_w(a_t|s_t) - anchor_log_prob[t]).
/// Throws DivergenceError when the log-ratio exceeds 30.
double importance_ratio(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                        std::size_t t);

/// rho_t * grad log pi_w(a_t|s_t) * A_t  — the t-th sample's contribution to
/// the surrogate gradient. Advantages and anchor log-probs are constants of
/// the batch; no gradient flows through them.
Vector per_sample_grad(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                       std::size_t t);

/// Mean of per_sample_grad over the whole batch, fixed summation order.
GradientEstimate full_gradient(const GaussianMlpPolicy& policy, const SurrogateBatch& batch);

/// (1/m) sum over the minibatch; indices drawn uniformly with replacement.
GradientEstimate minibatch_gradient(const GaussianMlpPolicy& policy,
                                    const SurrogateBatch& batch,
                                    const std::vector<std::size_t>& indices);

/// Variance-reduced estimate: anchor full gradient plus the minibatch mean of
/// (per-sample gradient at w) - (per-sample gradient at the anchor). At
/// w == anchor the correction cancels term by term and the result is the
/// anchor gradient exactly.
GradientEstimate svrg_gradient(const GaussianMlpPolicy& policy,
                               const AnchorGradientCache& cache,
                               const SurrogateBatch& batch,
                               const std::vector<std::size_t>& indices);

/// Surrogate objective (1/N) sum_t rho_t * A_t. Same divergence guard as the
/// ratio itself.
double surrogate_value(const GaussianMlpPolicy& policy, const SurrogateBatch& batch);

}  // namespace svrpo
