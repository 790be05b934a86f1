#include "svrpo/rollout.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "svrpo/errors.hpp"

namespace svrpo {

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const Transition& tr : transitions) total += tr.reward;
  return total;
}

LinearBaseline::LinearBaseline(Vector coefficients)
    : coefficients_(std::move(coefficients)) {
  check_finite(coefficients_, "baseline coefficients");
}

Vector LinearBaseline::features(const Vector& observation, int t) {
  Vector phi;
  phi.reserve(feature_dim(observation.size()));
  phi.insert(phi.end(), observation.begin(), observation.end());
  for (double s : observation) phi.push_back(s * s);
  const double ts = 0.01 * static_cast<double>(t);
  phi.push_back(ts);
  phi.push_back(ts * ts);
  phi.push_back(ts * ts * ts);
  phi.push_back(1.0);
  return phi;
}

double LinearBaseline::value(const Vector& observation, int t) const {
  if (coefficients_.empty()) return 0.0;
  return dot(features(observation, t), coefficients_);
}

std::vector<Trajectory> collect(const GaussianMlpPolicy& policy, const Env& env,
                                std::size_t n_transitions, const Rng& rng) {
  if (n_transitions < static_cast<std::size_t>(env.horizon()))
    throw ArgumentError("collect: n_transitions must be at least one horizon");
  std::vector<Trajectory> trajectories;
  std::size_t total = 0;
  for (std::uint64_t episode = 0; total < n_transitions; ++episode) {
    Rng ep_rng = rng.substream(episode);
    EnvState state = env.reset(ep_rng);
    Trajectory traj;
    while (!state.done) {
      const Vector obs = env.observe(state);
      const auto [mean, std] = policy.forward(obs);
      const Vector action = gaussian_sample(ep_rng, mean, std);
      const StepResult res = env.step(state, action);
      traj.transitions.push_back({obs, action, res.reward, state.t - 1});
    }
    total += traj.transitions.size();
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

Vector discounted_returns(const Trajectory& traj, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ArgumentError("discounted_returns: gamma must be in (0, 1)");
  const std::size_t n = traj.transitions.size();
  Vector returns(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    running = traj.transitions[i].reward + gamma * running;
    returns[i] = running;
  }
  return returns;
}

LinearBaseline fit_baseline(const std::vector<Trajectory>& trajectories, double gamma) {
  if (trajectories.empty()) throw ArgumentError("fit_baseline: no trajectories");
  constexpr double kRidge = 1e-5;
  const std::size_t d =
      LinearBaseline::feature_dim(trajectories.front().transitions.front().observation.size());
  Matrix gram(d, d, 0.0);
  Vector rhs(d, 0.0);
  for (const Trajectory& traj : trajectories) {
    const Vector returns = discounted_returns(traj, gamma);
    for (std::size_t i = 0; i < traj.transitions.size(); ++i) {
      const Vector phi = LinearBaseline::features(traj.transitions[i].observation,
                                                  traj.transitions[i].t);
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) gram(r, c) += phi[r] * phi[c];
        rhs[r] += phi[r] * returns[i];
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) gram(i, i) += kRidge;
  return LinearBaseline(solve_spd(std::move(gram), std::move(rhs)));
}

SurrogateBatch build_batch(const GaussianMlpPolicy& policy,
                           const std::vector<Trajectory>& trajectories,
                           const LinearBaseline& baseline, double gamma,
                           bool normalize) {
  SurrogateBatch batch;
  batch.anchor_params = policy.flatten();
  for (const Trajectory& traj : trajectories) {
    const Vector returns = discounted_returns(traj, gamma);
    for (std::size_t i = 0; i < traj.transitions.size(); ++i) {
      const Transition& tr = traj.transitions[i];
      batch.observations.push_back(tr.observation);
      batch.actions.push_back(tr.action);
      batch.advantages.push_back(returns[i] - baseline.value(tr.observation, tr.t));
      batch.anchor_log_probs.push_back(policy.log_prob(tr.observation, tr.action));
    }
  }
  if (normalize && !batch.advantages.empty()) {
    const auto [mean, var] = mean_and_var(batch.advantages);
    const double scale = 1.0 / std::max(std::sqrt(var), 1e-8);
    for (double& a : batch.advantages) a = (a - mean) * scale;
  }
  check_finite(batch.advantages, "advantages");
  check_finite(batch.anchor_log_probs, "anchor log-probs");
  return batch;
}

void dump_trajectories(const std::string& path, int epoch,
                       const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path);
  if (!out) throw IoError("dump_trajectories: cannot open " + path);
  for (std::size_t traj_id = 0; traj_id < trajectories.size(); ++traj_id) {
    for (const Transition& tr : trajectories[traj_id].transitions) {
      nlohmann::json line = {{"epoch", epoch}, {"traj_id", traj_id},    {"t", tr.t},
                             {"obs", tr.observation}, {"act", tr.action}, {"reward", tr.reward}};
      out << line.dump() << '\n';
    }
  }
}

}  // namespace svrpo
