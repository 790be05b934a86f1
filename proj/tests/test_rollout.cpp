#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "svrpo/errors.hpp"
#include "svrpo/rollout.hpp"

using namespace svrpo;

namespace {

GaussianMlpPolicy make_policy(const Env& env, std::uint64_t seed) {
  Rng rng(seed, 0);
  return GaussianMlpPolicy({env.obs_dim(), env.action_dim(), {8, 8}, 0.0}, rng);
}

Trajectory trajectory_from_rewards(const Vector& rewards) {
  Trajectory traj;
  for (std::size_t i = 0; i < rewards.size(); ++i)
    traj.transitions.push_back({{0.0}, {0.0}, rewards[i], static_cast<int>(i)});
  return traj;
}

}  // namespace

TEST_CASE("collect gathers whole episodes") {
  const PointMassEnv env;  // horizon 100
  const GaussianMlpPolicy policy = make_policy(env, 1);
  const auto trajs = collect(policy, env, 200, Rng(0, 0));
  CHECK(trajs.size() == 2);
  for (const Trajectory& t : trajs) CHECK(t.transitions.size() == 100);
  // t strictly increasing from 0
  for (std::size_t i = 0; i < trajs[0].transitions.size(); ++i)
    CHECK(trajs[0].transitions[i].t == static_cast<int>(i));
  CHECK_THROWS_AS(collect(policy, env, 50, Rng(0, 0)), ArgumentError);
}

TEST_CASE("collect is deterministic given the rng") {
  const PendulumEnv env;
  const GaussianMlpPolicy policy = make_policy(env, 2);
  const auto a = collect(policy, env, 400, Rng(9, 100));
  const auto b = collect(policy, env, 400, Rng(9, 100));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t t = 0; t < a[i].transitions.size(); ++t) {
      CHECK(a[i].transitions[t].observation == b[i].transitions[t].observation);
      CHECK(a[i].transitions[t].action == b[i].transitions[t].action);
      CHECK(a[i].transitions[t].reward == b[i].transitions[t].reward);
    }
}

TEST_CASE("random-policy pendulum mean episode reward regression fixture") {
  // Reference value computed once by this exact simulation (1000 episodes of
  // the zero-mean unit-std policy); deterministic, so equality is tight.
  const PendulumEnv env;
  GaussianMlpPolicy policy({env.obs_dim(), env.action_dim(), {8}, 0.0});  // zero net
  const auto trajs = collect(policy, env, 1000 * env.horizon(), Rng(2024, 0));
  REQUIRE(trajs.size() == 1000);
  double acc = 0.0;
  for (const Trajectory& t : trajs) acc += t.total_reward();
  const double mean_episode_reward = acc / 1000.0;
  CHECK(mean_episode_reward == doctest::Approx(-1229.4009174385451).epsilon(1e-9));
}

TEST_CASE("discounted returns recursion") {
  const Trajectory traj = trajectory_from_rewards({1.0, 1.0, 1.0});
  CHECK(discounted_returns(traj, 0.5) == Vector{1.75, 1.5, 1.0});

  const Trajectory single = trajectory_from_rewards({4.2});
  CHECK(discounted_returns(single, 0.9) == Vector{4.2});

  Rng rng(3, 0);
  Vector rewards(20);
  for (double& r : rewards) r = rng.next_gaussian();
  const Trajectory rnd = trajectory_from_rewards(rewards);
  const Vector ret = discounted_returns(rnd, 0.97);
  for (std::size_t t = 0; t + 1 < ret.size(); ++t)
    CHECK(ret[t] - rewards[t] - 0.97 * ret[t + 1] == doctest::Approx(0.0));
  CHECK(ret.back() == rewards.back());

  // R_0 equals the direct geometric sum.
  double direct = 0.0, g = 1.0;
  for (double r : rewards) {
    direct += g * r;
    g *= 0.97;
  }
  CHECK(ret[0] == doctest::Approx(direct).epsilon(1e-12));

  CHECK_THROWS_AS(discounted_returns(rnd, 1.0), ArgumentError);
}

TEST_CASE("fit_baseline") {
  const PointMassEnv env;
  const GaussianMlpPolicy policy = make_policy(env, 4);
  auto trajs = collect(policy, env, 400, Rng(5, 0));

  SUBCASE("zero targets give zero coefficients") {
    for (Trajectory& t : trajs)
      for (Transition& tr : t.transitions) tr.reward = 0.0;
    const LinearBaseline baseline = fit_baseline(trajs, 0.99);
    for (double c : baseline.coefficients()) CHECK(c == doctest::Approx(0.0));
  }

  SUBCASE("exactly-linear targets are fit to high accuracy") {
    // Construct returns R_t = c . phi(s_t, t) by back-solving the rewards:
    // r_t = R_t - gamma R_{t+1}.
    const double gamma = 0.99;
    Vector coeffs(LinearBaseline::feature_dim(4));
    Rng rng(6, 0);
    for (double& c : coeffs) c = 2e-4 * rng.next_gaussian();
    const LinearBaseline target(coeffs);
    for (Trajectory& t : trajs) {
      const std::size_t n = t.transitions.size();
      Vector desired(n);
      for (std::size_t i = 0; i < n; ++i)
        desired[i] = target.value(t.transitions[i].observation, t.transitions[i].t);
      for (std::size_t i = 0; i < n; ++i)
        t.transitions[i].reward =
            desired[i] - (i + 1 < n ? gamma * desired[i + 1] : 0.0);
    }
    const LinearBaseline fitted = fit_baseline(trajs, gamma);
    for (const Trajectory& t : trajs) {
      const Vector ret = discounted_returns(t, gamma);
      for (std::size_t i = 0; i < t.transitions.size(); ++i) {
        const double pred = fitted.value(t.transitions[i].observation, t.transitions[i].t);
        CHECK(std::fabs(pred - ret[i]) < 1e-8);
      }
    }
  }

  SUBCASE("normal-equation identity holds") {
    const double gamma = 0.99;
    const LinearBaseline fitted = fit_baseline(trajs, gamma);
    const std::size_t d = LinearBaseline::feature_dim(4);
    Vector lhs(d, 0.0);
    for (const Trajectory& t : trajs) {
      const Vector ret = discounted_returns(t, gamma);
      for (std::size_t i = 0; i < t.transitions.size(); ++i) {
        const Vector phi =
            LinearBaseline::features(t.transitions[i].observation, t.transitions[i].t);
        const double resid =
            ret[i] - fitted.value(t.transitions[i].observation, t.transitions[i].t);
        axpy_inplace(resid, phi, lhs);
      }
    }
    axpy_inplace(-1e-5, fitted.coefficients(), lhs);
    CHECK(norm2(lhs) < 1e-7);
  }

  SUBCASE("fitted baseline beats the zero baseline on training data") {
    const double gamma = 0.99;
    const LinearBaseline fitted = fit_baseline(trajs, gamma);
    double mse_fit = 0.0, mse_zero = 0.0;
    std::size_t n = 0;
    for (const Trajectory& t : trajs) {
      const Vector ret = discounted_returns(t, gamma);
      for (std::size_t i = 0; i < t.transitions.size(); ++i) {
        const double pred = fitted.value(t.transitions[i].observation, t.transitions[i].t);
        mse_fit += (ret[i] - pred) * (ret[i] - pred);
        mse_zero += ret[i] * ret[i];
        ++n;
      }
    }
    CHECK(mse_fit / n <= mse_zero / n);
  }
}

TEST_CASE("build_batch") {
  const PointMassEnv env;
  const GaussianMlpPolicy policy = make_policy(env, 7);
  const auto trajs = collect(policy, env, 300, Rng(8, 0));
  const LinearBaseline zero;

  SUBCASE("standardized advantages have mean 0, std 1") {
    const SurrogateBatch batch = build_batch(policy, trajs, zero, 0.99, true);
    const auto [mean, var] = mean_and_var(batch.advantages);
    CHECK(std::fabs(mean) < 1e-10);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-10);
  }

  SUBCASE("zero baseline gives raw returns before standardization") {
    const SurrogateBatch batch = build_batch(policy, trajs, zero, 0.99, false);
    std::size_t k = 0;
    for (const Trajectory& t : trajs) {
      const Vector ret = discounted_returns(t, 0.99);
      for (std::size_t i = 0; i < t.transitions.size(); ++i, ++k)
        CHECK(batch.advantages[k] == ret[i]);
    }
  }

  SUBCASE("anchor log-probs are frozen and reproducible") {
    const SurrogateBatch batch = build_batch(policy, trajs, zero, 0.99, true);
    CHECK(batch.anchor_params == policy.flatten());
    for (std::size_t t = 0; t < batch.size(); ++t)
      CHECK(batch.anchor_log_probs[t] ==
            policy.log_prob(batch.observations[t], batch.actions[t]));
  }
}
