#pragma once

#include <string>
#include <vector>

#include "svrpo/envs.hpp"
#include "svrpo/linalg.hpp"
#include "svrpo/policy.hpp"
#include "svrpo/rng.hpp"

namespace svrpo {

struct Transition {
  Vector observation;
  Vector action;
  double reward = 0.0;
  int t = 0;
};

struct Trajectory {
  std::vector<Transition> transitions;
  bool terminal = true;

  double total_reward() const;
};

/// Least-squares value baseline over the feature map
///   phi(s, t) = [s, s*s, 0.01 t, (0.01 t)^2, (0.01 t)^3, 1]
/// with ridge 1e-5. A default-constructed baseline predicts 0 everywhere.
class LinearBaseline {
 public:
  LinearBaseline() = default;
  explicit LinearBaseline(Vector coefficients);

  double value(const Vector& observation, int t) const;
  const Vector& coefficients() const { return coefficients_; }
  bool is_zero() const { return coefficients_.empty(); }

  static Vector features(const Vector& observation, int t);
  static std::size_t feature_dim(std::size_t obs_dim) { return 2 * obs_dim + 4; }

 private:
  Vector coefficients_;
};

/// Frozen anchor-policy dataset defining the epoch's surrogate objective.
/// Nothing in it changes during the inner loop; in particular
/// anchor_log_probs holds log pi_anchor(a_t | s_t) computed once at build
/// time and never recomputed.
struct SurrogateBatch {
  Vector anchor_params;
  std::vector<Vector> observations;
  std::vector<Vector> actions;
  Vector advantages;
  Vector anchor_log_probs;

  std::size_t size() const { return observations.size(); }
};

/// Run whole episodes of `policy` on `env` until at least n_transitions
/// transitions are collected; episodes are never truncated, so the total may
/// exceed n_transitions by less than one horizon. Episode k draws from
/// rng.substream(k) (reset first, then one gaussian per action), which makes
/// the result identical no matter how episodes would be scheduled.
/// Requires n_transitions >= env.horizon().
std::vector<Trajectory> collect(const GaussianMlpPolicy& policy, const Env& env,
                                std::size_t n_transitions, const Rng& rng);

/// R_t = r_t + gamma R_{t+1}, R_T = r_T. Requires 0 < gamma < 1.
Vector discounted_returns(const Trajectory& traj, double gamma);

LinearBaseline fit_baseline(const std::vector<Trajectory>& trajectories, double gamma);

/// Advantages A_t = R_t - baseline(s_t, t), then (when `normalize`)
/// standardized to mean 0 / std 1 across the batch; anchor log-probs frozen
/// at the policy's current parameters.
SurrogateBatch build_batch(const GaussianMlpPolicy& policy,
                           const std::vector<Trajectory>& trajectories,
                           const LinearBaseline& baseline, double gamma,
                           bool normalize = true);

/// Debug dump: one JSON line per transition with fields
/// epoch, traj_id, t, obs, act, reward.
void dump_trajectories(const std::string& path, int epoch,
                       const std::vector<Trajectory>& trajectories);

}  // namespace svrpo
