#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "lfanpg/mdp.hpp"

namespace lfanpg::envs {

/// Two-link acrobot (Sutton 1996), "book" dynamics, one RK4 step per action.
struct AcrobotConstants {
  double link_length_1 = 1.0;
  double link_mass_1 = 1.0;
  double link_mass_2 = 1.0;
  double link_com_1 = 0.5;
  double link_com_2 = 0.5;
  double link_moi = 1.0;
  double gravity = 9.8;
  double dt = 0.2;
  double max_vel_1 = 4.0 * std::numbers::pi;
  double max_vel_2 = 9.0 * std::numbers::pi;
  double reset_bound = 0.1;
};

struct AcrobotState {
  double theta1 = 0.0;
  double theta2 = 0.0;  // relative to link 1
  double omega1 = 0.0;
  double omega2 = 0.0;

  StateVec observation() const
  {
    StateVec v(6);
    v << std::cos(theta1), std::sin(theta1), std::cos(theta2), std::sin(theta2), omega1, omega2;
    return v;
  }
};

inline double acrobot_torque(ActionId a) { return static_cast<double>(a.index) - 1.0; }

/// Wraps into [-pi, pi).
inline double wrap_angle(double x)
{
  constexpr double pi = std::numbers::pi;
  x = std::fmod(x + pi, 2.0 * pi);
  if (x < 0.0)
    x += 2.0 * pi;
  x -= pi;
  return x < pi ? x : -pi;
}

inline bool goal_height_reached(const AcrobotState& s)
{
  return -std::cos(s.theta1) - std::cos(s.theta1 + s.theta2) > 1.0;
}

namespace detail {

using AcrobotDeriv = std::array<double, 4>;

inline AcrobotDeriv acrobot_dsdt(const AcrobotDeriv& s, double torque, const AcrobotConstants& c)
{
  const double m1 = c.link_mass_1, m2 = c.link_mass_2;
  const double l1 = c.link_length_1, lc1 = c.link_com_1, lc2 = c.link_com_2;
  const double i1 = c.link_moi, i2 = c.link_moi, g = c.gravity;
  const auto [t1, t2, dt1, dt2] = s;

  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  // cos(x - pi/2) written as sin(x) so the hanging rest state is an exact fixed point.
  const double phi2 = m2 * lc2 * g * std::sin(t1 + t2);
  const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                      2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) + (m1 * lc1 + m2 * l1) * g * std::sin(t1) +
                      phi2;
  const double ddt2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddt1 = -(d2 * ddt2 + phi1) / d1;
  return {dt1, dt2, ddt1, ddt2};
}

}  // namespace detail

inline AcrobotState acrobot_dynamics(const AcrobotState& s, ActionId a, const AcrobotConstants& c = {})
{
  using detail::AcrobotDeriv;
  const double torque = acrobot_torque(a);
  const double h = c.dt;
  const AcrobotDeriv y0{s.theta1, s.theta2, s.omega1, s.omega2};
  auto axpy = [](const AcrobotDeriv& y, double k, const AcrobotDeriv& d) {
    return AcrobotDeriv{y[0] + k * d[0], y[1] + k * d[1], y[2] + k * d[2], y[3] + k * d[3]};
  };
  const AcrobotDeriv k1 = detail::acrobot_dsdt(y0, torque, c);
  const AcrobotDeriv k2 = detail::acrobot_dsdt(axpy(y0, h / 2.0, k1), torque, c);
  const AcrobotDeriv k3 = detail::acrobot_dsdt(axpy(y0, h / 2.0, k2), torque, c);
  const AcrobotDeriv k4 = detail::acrobot_dsdt(axpy(y0, h, k3), torque, c);
  AcrobotDeriv y;
  for (std::size_t i = 0; i < 4; ++i)
    y[i] = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  return {wrap_angle(y[0]), wrap_angle(y[1]), std::clamp(y[2], -c.max_vel_1, c.max_vel_1),
          std::clamp(y[3], -c.max_vel_2, c.max_vel_2)};
}

class Acrobot {
 public:
  static constexpr std::size_t kMaxSteps = 500;

  explicit Acrobot(AcrobotConstants c = {}, std::size_t max_steps = kMaxSteps)
      : constants_(c), clock_(max_steps)
  {
  }

  EnvSpec spec() const { return {6, 3, clock_.max_steps(), -static_cast<double>(clock_.max_steps()), 0.0}; }

  StateVec reset(RngStream& rng)
  {
    const double b = constants_.reset_bound;
    state_ = {rng.uniform(-b, b), rng.uniform(-b, b), rng.uniform(-b, b), rng.uniform(-b, b)};
    clock_.restart();
    return state_.observation();
  }

  StepOutcome step(ActionId a)
  {
    clock_.check_active("Acrobot");
    if (a.index > 2)
      throw UsageError("Acrobot: action out of range");
    state_ = acrobot_dynamics(state_, a, constants_);
    const bool goal = goal_height_reached(state_);
    const bool done = clock_.advance(goal);
    return {state_.observation(), goal ? 0.0 : -1.0, done};
  }

  StateVec reset_to(const AcrobotState& s)
  {
    state_ = s;
    clock_.restart();
    return state_.observation();
  }

  const AcrobotState& state() const { return state_; }
  bool done() const { return clock_.done(); }
  std::size_t steps() const { return clock_.steps(); }

 private:
  AcrobotConstants constants_;
  AcrobotState state_;
  EpisodeClock clock_;
};

}  // namespace lfanpg::envs
