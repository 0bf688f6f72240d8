#pragma once

#include <Eigen/Core>

#include <compare>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "lfanpg/rng.hpp"

namespace lfanpg {

/// Raw or augmented observation.
using StateVec = Eigen::VectorXd;

struct ActionId {
  std::size_t index = 0;
  friend auto operator<=>(const ActionId&, const ActionId&) = default;
};

struct StepOutcome {
  StateVec next_state;
  double reward = 0.0;
  bool done = false;
};

struct EnvSpec {
  std::size_t raw_state_dim = 0;
  std::size_t action_count = 0;
  std::size_t max_episode_steps = 0;
  double min_return = 0.0;
  double max_return = 0.0;
};

/// Raised on contract violations such as stepping a finished episode.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Episodic MDP with a discrete action set.
template <class E>
concept Environment = requires(E env, const E cenv, RngStream& rng, ActionId a) {
  { cenv.spec() } -> std::convertible_to<EnvSpec>;
  { env.reset(rng) } -> std::same_as<StateVec>;
  { env.step(a) } -> std::same_as<StepOutcome>;
  { cenv.done() } -> std::convertible_to<bool>;
  { cenv.steps() } -> std::convertible_to<std::size_t>;
};

/// Step counter and done flag shared by the concrete environments.
class EpisodeClock {
 public:
  explicit EpisodeClock(std::size_t max_steps) : max_steps_(max_steps) {}

  void restart()
  {
    steps_ = 0;
    done_ = false;
    started_ = true;
  }

  /// Throws UsageError when the episode is already over or never started.
  void check_active(const char* who) const
  {
    if (!started_)
      throw UsageError(std::string(who) + ": step() before reset()");
    if (done_)
      throw UsageError(std::string(who) + ": step() on a finished episode");
  }

  /// Records one transition; returns the resulting done flag.
  bool advance(bool terminal)
  {
    ++steps_;
    done_ = terminal || steps_ >= max_steps_;
    return done_;
  }

  std::size_t steps() const { return steps_; }
  bool done() const { return done_; }
  std::size_t max_steps() const { return max_steps_; }

 private:
  std::size_t max_steps_;
  std::size_t steps_ = 0;
  bool done_ = false;
  bool started_ = false;
};

/// Runs one episode from reset and returns the undiscounted reward sum.
/// `act(state, rng)` picks the action; at most `cap` steps are taken.
template <Environment Env, class ActFn>
double rollout_return(Env& env, ActFn&& act, RngStream& rng, std::size_t cap)
{
  if (cap > env.spec().max_episode_steps)
    throw UsageError("rollout_return: cap exceeds max_episode_steps");
  StateVec s = env.reset(rng);
  double total = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    const StepOutcome out = env.step(act(s, rng));
    total += out.reward;
    if (out.done)
      break;
    s = out.next_state;
  }
  return total;
}

}  // namespace lfanpg
