#pragma once

#include <array>
#include <limits>

#include <Eigen/Dense>

#include "lfanpg/mdp.hpp"
#include "lfanpg/policy.hpp"

namespace lfanpg::testing {

/// Two-state, two-action MDP that never terminates. Observations are the
/// one-hot state indicator, so a raw-transform FeatureMap gives a tabular
/// log-linear policy.
class TabularMdp {
 public:
  // transition[s][a] = probability of moving to state 1.
  std::array<std::array<double, 2>, 2> to_state1{{{0.2, 0.7}, {0.9, 0.4}}};
  std::array<std::array<double, 2>, 2> reward{{{1.0, -0.5}, {2.0, 0.25}}};
  double start_in_state1 = 0.3;

  EnvSpec spec() const { return {2, 2, std::numeric_limits<std::size_t>::max(), -1e300, 1e300}; }

  StateVec reset(RngStream& rng)
  {
    state_ = rng.coin(start_in_state1) ? 1 : 0;
    steps_ = 0;
    return observation();
  }

  StepOutcome step(ActionId a)
  {
    const double r = reward[state_][a.index];
    // Transition randomness lives in its own stream so the sampler's streams stay untouched.
    state_ = transition_rng_.coin(to_state1[state_][a.index]) ? 1 : 0;
    ++steps_;
    return {observation(), r, false};
  }

  bool done() const { return false; }
  std::size_t steps() const { return steps_; }
  std::size_t state() const { return state_; }

  StateVec observation() const
  {
    StateVec v = StateVec::Zero(2);
    v[static_cast<Eigen::Index>(state_)] = 1.0;
    return v;
  }

  /// Exact discounted Q over pairs indexed 2*s + a: q = (I - gamma P_pi)^{-1} r.
  Eigen::Vector4d exact_q(const LogLinearPolicy& policy, double gamma) const
  {
    std::array<Eigen::Vector2d, 2> pi;
    for (std::size_t s = 0; s < 2; ++s) {
      StateVec obs = StateVec::Zero(2);
      obs[static_cast<Eigen::Index>(s)] = 1.0;
      pi[s] = policy.distribution(obs);
    }
    Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
    Eigen::Vector4d r;
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        const auto row = static_cast<Eigen::Index>(2 * s + a);
        r[row] = reward[s][a];
        const double p1 = to_state1[s][a];
        for (std::size_t s2 = 0; s2 < 2; ++s2)
          for (std::size_t a2 = 0; a2 < 2; ++a2)
            p(row, static_cast<Eigen::Index>(2 * s2 + a2)) = (s2 == 1 ? p1 : 1.0 - p1) * pi[s2][static_cast<Eigen::Index>(a2)];
      }
    return (Eigen::Matrix4d::Identity() - gamma * p).partialPivLu().solve(r);
  }

 private:
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  RngStream transition_rng_{12345, "tabular-transitions"};
};

static_assert(Environment<TabularMdp>);

}  // namespace lfanpg::testing
