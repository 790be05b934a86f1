#include "svrpo/gradients.hpp"

#include <cmath>
#include <string>

#include "svrpo/errors.hpp"

namespace svrpo {

namespace {
constexpr double kLogRatioLimit = 30.0;

double log_ratio(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                 std::size_t t) {
  if (t >= batch.size()) throw ArgumentError("gradients: sample index out of range");
  const double lr = policy.log_prob(batch.observations[t], batch.actions[t]) -
                    batch.anchor_log_probs[t];
  if (lr > kLogRatioLimit)
    throw DivergenceError("importance ratio overflow at sample " + std::to_string(t) +
                          " (log-ratio " + std::to_string(lr) + ")");
  return lr;
}

/// acc += per-sample gradient at `t`, using the exact same per-term
/// arithmetic as per_sample_grad.
void accumulate_sample(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                       std::size_t t, double sign, Vector& acc) {
  const double weight = sign * std::exp(log_ratio(policy, batch, t)) * batch.advantages[t];
  policy.accumulate_score(batch.observations[t], batch.actions[t], weight, acc);
}
}  // namespace

AnchorGradientCache::AnchorGradientCache(const GaussianMlpPolicy& anchor_policy,
                                         const SurrogateBatch& batch)
    : anchor_policy_(anchor_policy) {
  if (anchor_policy.flatten() != batch.anchor_params)
    throw ArgumentError("AnchorGradientCache: policy parameters differ from the batch anchor");
  full_gradient_ = svrpo::full_gradient(anchor_policy_, batch).vector;
  check_finite(full_gradient_, "anchor full gradient");
}

double importance_ratio(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                        std::size_t t) {
  return std::exp(log_ratio(policy, batch, t));
}

Vector per_sample_grad(const GaussianMlpPolicy& policy, const SurrogateBatch& batch,
                       std::size_t t) {
  Vector grad(policy.param_count(), 0.0);
  accumulate_sample(policy, batch, t, 1.0, grad);
  return grad;
}

GradientEstimate full_gradient(const GaussianMlpPolicy& policy, const SurrogateBatch& batch) {
  Vector acc(policy.param_count(), 0.0);
  for (std::size_t t = 0; t < batch.size(); ++t) accumulate_sample(policy, batch, t, 1.0, acc);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& x : acc) x *= inv;
  check_finite(acc, "full gradient");
  return {std::move(acc), batch.size(), EstimatorKind::full};
}

GradientEstimate minibatch_gradient(const GaussianMlpPolicy& policy,
                                    const SurrogateBatch& batch,
                                    const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw ArgumentError("minibatch_gradient: empty minibatch");
  Vector acc(policy.param_count(), 0.0);
  for (std::size_t t : indices) accumulate_sample(policy, batch, t, 1.0, acc);
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (double& x : acc) x *= inv;
  check_finite(acc, "minibatch gradient");
  return {std::move(acc), indices.size(), EstimatorKind::minibatch};
}

GradientEstimate svrg_gradient(const GaussianMlpPolicy& policy,
                               const AnchorGradientCache& cache,
                               const SurrogateBatch& batch,
                               const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw ArgumentError("svrg_gradient: empty minibatch");
  Vector correction(policy.param_count(), 0.0);
  for (std::size_t t : indices) {
    accumulate_sample(policy, batch, t, 1.0, correction);
    accumulate_sample(cache.anchor_policy(), batch, t, -1.0, correction);
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  Vector out = cache.full_gradient();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += correction[i] * inv;
  check_finite(out, "svrg gradient");
  return {std::move(out), indices.size(), EstimatorKind::svrg};
}

double surrogate_value(const GaussianMlpPolicy& policy, const SurrogateBatch& batch) {
  double acc = 0.0;
  for (std::size_t t = 0; t < batch.size(); ++t)
    acc += std::exp(log_ratio(policy, batch, t)) * batch.advantages[t];
  return acc / static_cast<double>(batch.size());
}

}  // namespace svrpo
