#include "svrpo/policy.hpp"

#include <cmath>
#include <string>

#include "svrpo/errors.hpp"

namespace svrpo {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;  // 0.5*log(2*pi)
}

void PolicyArchitecture::validate() const {
  if (obs_dim <= 0 || action_dim <= 0)
    throw ArgumentError("policy architecture: obs_dim and action_dim must be positive");
  if (hidden_sizes.empty())
    throw ArgumentError("policy architecture: hidden_sizes must be non-empty");
  for (int h : hidden_sizes)
    if (h <= 0) throw ArgumentError("policy architecture: hidden sizes must be positive");
}

bool PolicyArchitecture::same_shape(const PolicyArchitecture& other) const {
  return obs_dim == other.obs_dim && action_dim == other.action_dim &&
         hidden_sizes == other.hidden_sizes;
}

GaussianMlpPolicy::GaussianMlpPolicy(PolicyArchitecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t in = static_cast<std::size_t>(arch_.obs_dim);
  std::vector<std::size_t> outs;
  for (int h : arch_.hidden_sizes) outs.push_back(static_cast<std::size_t>(h));
  outs.push_back(static_cast<std::size_t>(arch_.action_dim));
  for (std::size_t out : outs) {
    weights_.emplace_back(out, in);
    biases_.emplace_back(out, 0.0);
    param_count_ += out * in + out;
    in = out;
  }
  log_std_.assign(static_cast<std::size_t>(arch_.action_dim), arch_.init_log_std);
  param_count_ += log_std_.size();
}

GaussianMlpPolicy::GaussianMlpPolicy(PolicyArchitecture arch, Rng& rng)
    : GaussianMlpPolicy(std::move(arch)) {
  for (Matrix& w : weights_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& x : w.data()) x = bound * (2.0 * rng.next_double() - 1.0);
  }
}

Vector GaussianMlpPolicy::flatten() const {
  Vector flat;
  flat.reserve(param_count_);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), weights_[l].data().begin(), weights_[l].data().end());
    flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
  }
  flat.insert(flat.end(), log_std_.begin(), log_std_.end());
  return flat;
}

void GaussianMlpPolicy::unflatten(const Vector& params) {
  if (params.size() != param_count_)
    throw ArgumentError("unflatten: expected " + std::to_string(param_count_) +
                        " parameters, got " + std::to_string(params.size()));
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Vector& wd = weights_[l].data();
    std::copy(params.begin() + pos, params.begin() + pos + wd.size(), wd.begin());
    pos += wd.size();
    std::copy(params.begin() + pos, params.begin() + pos + biases_[l].size(),
              biases_[l].begin());
    pos += biases_[l].size();
  }
  std::copy(params.begin() + pos, params.end(), log_std_.begin());
}

void GaussianMlpPolicy::check_obs(const Vector& obs) const {
  if (obs.size() != static_cast<std::size_t>(arch_.obs_dim))
    throw ArgumentError("policy: observation dimension mismatch");
  for (double x : obs)
    if (!std::isfinite(x)) throw ArgumentError("policy: non-finite observation");
}

void GaussianMlpPolicy::check_action(const Vector& action) const {
  if (action.size() != static_cast<std::size_t>(arch_.action_dim))
    throw ArgumentError("policy: action dimension mismatch");
}

Vector GaussianMlpPolicy::mean(const Vector& obs) const {
  check_obs(obs);
  Vector act = obs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Vector z = matvec(weights_[l], act);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += biases_[l][i];
    if (l + 1 < weights_.size())
      for (double& x : z) x = std::tanh(x);
    act = std::move(z);
  }
  return act;
}

std::pair<Vector, Vector> GaussianMlpPolicy::forward(const Vector& obs) const {
  return {mean(obs), action_std()};
}

Vector GaussianMlpPolicy::action_std() const {
  Vector std_out(log_std_.size());
  for (std::size_t i = 0; i < log_std_.size(); ++i) std_out[i] = std::exp(log_std_[i]);
  return std_out;
}

void GaussianMlpPolicy::set_log_std(const Vector& log_std) {
  if (log_std.size() != log_std_.size())
    throw ArgumentError("set_log_std: dimension mismatch");
  log_std_ = log_std;
}

double GaussianMlpPolicy::log_prob(const Vector& obs, const Vector& action) const {
  check_action(action);
  const Vector mu = mean(obs);
  double lp = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double sd = std::exp(log_std_[k]);
    const double z = (action[k] - mu[k]) / sd;
    lp += -0.5 * z * z - log_std_[k] - kHalfLog2Pi;
  }
  return lp;
}

Vector GaussianMlpPolicy::grad_log_prob(const Vector& obs, const Vector& action) const {
  Vector grad(param_count_, 0.0);
  accumulate_score(obs, action, 1.0, grad);
  return grad;
}

void GaussianMlpPolicy::accumulate_score(const Vector& obs, const Vector& action,
                                         double weight, Vector& acc) const {
  check_obs(obs);
  check_action(action);
  if (acc.size() != param_count_)
    throw ArgumentError("accumulate_score: accumulator dimension mismatch");

  const std::size_t n_layers = weights_.size();
  // Forward pass keeping every layer input.
  std::vector<Vector> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(obs);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Vector z = matvec(weights_[l], acts.back());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += biases_[l][i];
    if (l + 1 < n_layers)
      for (double& x : z) x = std::tanh(x);
    acts.push_back(std::move(z));
  }
  const Vector& mu = acts.back();

  // d log_prob / d mean_k = (a_k - mu_k) / sigma_k^2.
  Vector delta(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double sd = std::exp(log_std_[k]);
    delta[k] = (action[k] - mu[k]) / (sd * sd);
  }

  // Backward pass. Parameter offset of layer l in the flat layout.
  std::vector<std::size_t> offsets(n_layers);
  std::size_t pos = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = pos;
    pos += weights_[l].rows() * weights_[l].cols() + weights_[l].rows();
  }
  const std::size_t log_std_offset = pos;

  for (std::size_t li = n_layers; li-- > 0;) {
    const Matrix& w = weights_[li];
    const Vector& input = acts[li];
    const std::size_t base = offsets[li];
    // Weight and bias gradients: dW[i][j] = delta_i * input_j, db[i] = delta_i.
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const std::size_t row_base = base + i * w.cols();
      for (std::size_t j = 0; j < w.cols(); ++j)
        acc[row_base + j] += weight * (delta[i] * input[j]);
      acc[base + w.rows() * w.cols() + i] += weight * delta[i];
    }
    if (li == 0) break;
    // Push delta through the weights and the tanh of the previous layer.
    Vector prev(w.cols(), 0.0);
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, j) * delta[i];
      prev[j] = s * (1.0 - input[j] * input[j]);
    }
    delta = std::move(prev);
  }

  // d log_prob / d log_std_k = ((a_k - mu_k)/sigma_k)^2 - 1.
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double sd = std::exp(log_std_[k]);
    const double z = (action[k] - mu[k]) / sd;
    acc[log_std_offset + k] += weight * (z * z - 1.0);
  }
}

double diag_gaussian_log_prob(const Vector& mean, const Vector& log_std,
                              const Vector& std, const Vector& action) {
  double lp = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double z = (action[k] - mean[k]) / std[k];
    lp += -0.5 * z * z - log_std[k] - kHalfLog2Pi;
  }
  return lp;
}

double kl_diag_gaussian(const Vector& mean_p, const Vector& log_std_p, const Vector& std_p,
                        const Vector& mean_q, const Vector& log_std_q, const Vector& std_q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mean_p.size(); ++k) {
    const double dm = mean_p[k] - mean_q[k];
    acc += log_std_q[k] - log_std_p[k] +
           (std_p[k] * std_p[k] + dm * dm) / (2.0 * std_q[k] * std_q[k]) - 0.5;
  }
  return acc;
}

double kl(const GaussianMlpPolicy& p, const GaussianMlpPolicy& q, const Vector& obs) {
  if (!p.arch().same_shape(q.arch()))
    throw ArgumentError("kl: policy architecture mismatch");
  return kl_diag_gaussian(p.mean(obs), p.log_std(), p.action_std(),
                          q.mean(obs), q.log_std(), q.action_std());
}

Vector fisher_vector_product(const GaussianMlpPolicy& policy,
                             const std::vector<Vector>& states,
                             const std::vector<Vector>& actions,
                             const Vector& v, double damping) {
  if (states.empty()) throw ArgumentError("fisher_vector_product: empty subsample");
  if (states.size() != actions.size())
    throw ArgumentError("fisher_vector_product: states/actions size mismatch");
  if (v.size() != policy.param_count())
    throw ArgumentError("fisher_vector_product: vector dimension mismatch");
  Vector acc(v.size(), 0.0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vector score = policy.grad_log_prob(states[i], actions[i]);
    const double coef = dot(score, v);
    axpy_inplace(coef, score, acc);
  }
  const double inv = 1.0 / static_cast<double>(states.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] * inv + damping * v[i];
  return acc;
}

}  // namespace svrpo
