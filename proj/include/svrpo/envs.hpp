#pragma once

#include <memory>
#include <string>

#include "svrpo/linalg.hpp"
#include "svrpo/rng.hpp"

namespace svrpo {

/// `internal` is the raw physical state (what the dynamics update);
/// observe() maps it to what the policy sees.
struct EnvState {
  Vector internal;
  int t = 0;
  bool done = false;
};

struct StepResult {
  Vector next_observation;
  double reward = 0.0;
  bool done = false;
};

/// Deterministic toy continuous-control environment. Environments hold no
/// mutable state; (state, action) -> StepResult is a pure function, so each
/// rollout worker can own a cheap clone.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual EnvState reset(Rng& rng) const = 0;
  /// Advances `state` in place. Throws UsageError on a done state.
  virtual StepResult step(EnvState& state, const Vector& action) const = 0;
  virtual Vector observe(const EnvState& state) const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

/// 2-D point mass pushed by a force in [-1,1]^2 toward the goal (1,1).
/// Semi-implicit Euler at dt = 0.05; reward is evaluated at the pre-step
/// position: -(|p - goal|^2) - 0.01 |a|^2.
class PointMassEnv final : public Env {
 public:
  explicit PointMassEnv(int horizon = 100) : horizon_(horizon) {}
  std::string name() const override { return "pointmass"; }
  int obs_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int horizon() const override { return horizon_; }
  EnvState reset(Rng& rng) const override;
  StepResult step(EnvState& state, const Vector& action) const override;
  Vector observe(const EnvState& state) const override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<PointMassEnv>(*this); }

 private:
  int horizon_;
};

/// Torque-limited pendulum swing-up; theta = 0 is upright, theta wrapped to
/// (-pi, pi], theta_dot clipped to [-8, 8], torque clipped to [-2, 2].
/// Reward at the pre-step state: -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2).
class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(int horizon = 200) : horizon_(horizon) {}
  std::string name() const override { return "pendulum"; }
  int obs_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  EnvState reset(Rng& rng) const override;
  StepResult step(EnvState& state, const Vector& action) const override;
  Vector observe(const EnvState& state) const override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<PendulumEnv>(*this); }

 private:
  int horizon_;
};

/// Lookup by CLI name: "pointmass" | "pendulum". horizon_override = 0 keeps
/// the environment default. Throws ConfigError for unknown names.
std::unique_ptr<Env> make_env(const std::string& name, int horizon_override = 0);

}  // namespace svrpo
