#pragma once

#include <cmath>
#include <numbers>

#include "lfanpg/mdp.hpp"

namespace lfanpg::envs {

/// Cart-pole balancing (Barto, Sutton & Anderson 1983), explicit Euler.
struct CartPoleConstants {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_pole_length = 0.5;
  double force_magnitude = 10.0;
  double tau = 0.02;
  double angle_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
  double position_threshold = 2.4;
  double reset_bound = 0.05;
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  StateVec observation() const
  {
    StateVec v(4);
    v << x, x_dot, theta, theta_dot;
    return v;
  }
};

inline CartPoleState cartpole_dynamics(const CartPoleState& s, ActionId a,
                                       const CartPoleConstants& c = {})
{
  const double force = a.index == 1 ? c.force_magnitude : -c.force_magnitude;
  const double total_mass = c.cart_mass + c.pole_mass;
  const double pole_mass_length = c.pole_mass * c.half_pole_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);

  const double temp = (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (c.gravity * sin_t - cos_t * temp) /
      (c.half_pole_length * (4.0 / 3.0 - c.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  return {s.x + c.tau * s.x_dot, s.x_dot + c.tau * x_acc, s.theta + c.tau * s.theta_dot,
          s.theta_dot + c.tau * theta_acc};
}

/// Failure region; the boundary itself counts as failed.
inline bool cartpole_failed(const CartPoleState& s, const CartPoleConstants& c = {})
{
  return std::abs(s.x) >= c.position_threshold || std::abs(s.theta) >= c.angle_threshold;
}

class CartPole {
 public:
  static constexpr std::size_t kMaxSteps = 200;

  explicit CartPole(CartPoleConstants c = {}, std::size_t max_steps = kMaxSteps)
      : constants_(c), clock_(max_steps)
  {
  }

  EnvSpec spec() const { return {4, 2, clock_.max_steps(), 0.0, static_cast<double>(clock_.max_steps())}; }

  StateVec reset(RngStream& rng)
  {
    const double b = constants_.reset_bound;
    state_ = {rng.uniform(-b, b), rng.uniform(-b, b), rng.uniform(-b, b), rng.uniform(-b, b)};
    clock_.restart();
    return state_.observation();
  }

  StepOutcome step(ActionId a)
  {
    clock_.check_active("CartPole");
    if (a.index > 1)
      throw UsageError("CartPole: action out of range");
    state_ = cartpole_dynamics(state_, a, constants_);
    const bool done = clock_.advance(cartpole_failed(state_, constants_));
    return {state_.observation(), 1.0, done};
  }

  /// Starts an episode from an explicit state.
  StateVec reset_to(const CartPoleState& s)
  {
    state_ = s;
    clock_.restart();
    return state_.observation();
  }

  const CartPoleState& state() const { return state_; }
  const CartPoleConstants& constants() const { return constants_; }
  bool done() const { return clock_.done(); }
  std::size_t steps() const { return clock_.steps(); }

 private:
  CartPoleConstants constants_;
  CartPoleState state_;
  EpisodeClock clock_;
};

}  // namespace lfanpg::envs
