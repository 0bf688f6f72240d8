#pragma once

#include <stdexcept>
#include <utility>

#include "lfanpg/mdp.hpp"

namespace lfanpg {

/// Multiplies every element by an independent Uniform(1 - zeta, 1 + zeta)
/// draw. zeta == 0 returns the input unchanged and consumes no randomness.
inline StateVec perturb(const StateVec& raw, double zeta, RngStream& rng)
{
  if (!(zeta >= 0.0))
    throw std::invalid_argument("perturb: noise level must be non-negative");
  if (zeta == 0.0)
    return raw;
  StateVec out(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i)
    out[i] = raw[i] * rng.uniform(1.0 - zeta, 1.0 + zeta);
  return out;
}

/// Environment adaptor that perturbs observations only; the wrapped
/// environment keeps integrating its true state.
template <Environment Env>
class NoisyObservation {
 public:
  NoisyObservation(Env env, double zeta, RngStream noise)
      : env_(std::move(env)), zeta_(zeta), noise_(std::move(noise))
  {
    if (!(zeta_ >= 0.0))
      throw std::invalid_argument("NoisyObservation: noise level must be non-negative");
  }

  EnvSpec spec() const { return env_.spec(); }

  StateVec reset(RngStream& rng) { return perturb(env_.reset(rng), zeta_, noise_); }

  StepOutcome step(ActionId a)
  {
    StepOutcome out = env_.step(a);
    out.next_state = perturb(out.next_state, zeta_, noise_);
    return out;
  }

  bool done() const { return env_.done(); }
  std::size_t steps() const { return env_.steps(); }
  double zeta() const { return zeta_; }

  Env& inner() { return env_; }
  const Env& inner() const { return env_; }

 private:
  Env env_;
  double zeta_;
  RngStream noise_;
};

}  // namespace lfanpg
