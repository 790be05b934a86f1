#include "svrpo/envs.hpp"

#include <algorithm>
#include <cmath>

#include "svrpo/errors.hpp"

namespace svrpo {

namespace {

constexpr double kDt = 0.05;
constexpr double kPi = 3.14159265358979323846;

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

/// Wrap an angle to (-pi, pi].
double wrap_angle(double theta) {
  double w = std::fmod(theta + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

void check_step_preconditions(const EnvState& state, const Vector& action,
                              std::size_t action_dim) {
  if (state.done) throw UsageError("step: episode already finished");
  if (action.size() != action_dim) throw ArgumentError("step: action dimension mismatch");
}

}  // namespace

EnvState PointMassEnv::reset(Rng& rng) const {
  EnvState s;
  const double x = 2.0 * rng.next_double() - 1.0;
  const double y = 2.0 * rng.next_double() - 1.0;
  s.internal = {x, y, 0.0, 0.0};
  return s;
}

StepResult PointMassEnv::step(EnvState& state, const Vector& action) const {
  check_step_preconditions(state, action, 2);
  const double ax = clip(action[0], -1.0, 1.0);
  const double ay = clip(action[1], -1.0, 1.0);
  double& x = state.internal[0];
  double& y = state.internal[1];
  double& vx = state.internal[2];
  double& vy = state.internal[3];

  const double gx = 1.0, gy = 1.0;
  const double reward = -((x - gx) * (x - gx) + (y - gy) * (y - gy)) -
                        0.01 * (ax * ax + ay * ay);

  vx += ax * kDt;
  vy += ay * kDt;
  x += vx * kDt;
  y += vy * kDt;

  state.t += 1;
  state.done = state.t >= horizon_;
  return {observe(state), reward, state.done};
}

Vector PointMassEnv::observe(const EnvState& state) const { return state.internal; }

EnvState PendulumEnv::reset(Rng& rng) const {
  EnvState s;
  // theta in (-pi, pi], theta_dot in [-1, 1].
  const double theta = kPi - 2.0 * kPi * rng.next_double();
  const double theta_dot = 2.0 * rng.next_double() - 1.0;
  s.internal = {theta, theta_dot};
  return s;
}

StepResult PendulumEnv::step(EnvState& state, const Vector& action) const {
  check_step_preconditions(state, action, 1);
  constexpr double g = 10.0, m = 1.0, l = 1.0;
  const double u = clip(action[0], -2.0, 2.0);
  double& theta = state.internal[0];
  double& theta_dot = state.internal[1];

  const double reward = -(theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * u * u);

  const double theta_ddot = (3.0 * g / (2.0 * l)) * std::sin(theta) + (3.0 / (m * l * l)) * u;
  theta_dot = clip(theta_dot + theta_ddot * kDt, -8.0, 8.0);
  theta = wrap_angle(theta + theta_dot * kDt);

  state.t += 1;
  state.done = state.t >= horizon_;
  return {observe(state), reward, state.done};
}

Vector PendulumEnv::observe(const EnvState& state) const {
  return {std::cos(state.internal[0]), std::sin(state.internal[0]), state.internal[1]};
}

std::unique_ptr<Env> make_env(const std::string& name, int horizon_override) {
  if (horizon_override < 0) throw ConfigError("horizon: must be non-negative");
  if (name == "pointmass")
    return std::make_unique<PointMassEnv>(horizon_override > 0 ? horizon_override : 100);
  if (name == "pendulum")
    return std::make_unique<PendulumEnv>(horizon_override > 0 ? horizon_override : 200);
  throw ConfigError("env: unknown environment '" + name + "' (expected pointmass|pendulum)");
}

}  // namespace svrpo
