#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lfanpg/mdp.hpp"
#include "lfanpg/policy.hpp"
#include "lfanpg/robustness.hpp"

namespace lfanpg {

struct NpgConfig {
  std::size_t iterations = 25;      // T, actor iterations
  std::size_t critic_steps = 150;   // N, SGD iterations per critic solve
  double actor_step = 0.1;          // eta
  double critic_step = 0.1;         // alpha
  double gamma = 0.95;
  double w_max = 1e12;              // radius of the critic's feasible ball
  std::size_t eval_episodes = 20;

  /// Throws std::invalid_argument naming the first bad field. T = 0 is
  /// accepted and yields an untrained policy.
  void validate() const
  {
    if (critic_steps < 1) throw std::invalid_argument("critic_steps must be >= 1");
    if (!(actor_step > 0.0) || !std::isfinite(actor_step)) throw std::invalid_argument("actor_step must be > 0");
    if (!(critic_step > 0.0) || !std::isfinite(critic_step)) throw std::invalid_argument("critic_step must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (!(w_max > 0.0)) throw std::invalid_argument("w_max must be > 0");
    if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
  }
};

/// (s, a, Q-hat) drawn from the discounted visitation distribution.
struct QSample {
  StateVec state;  // raw observation as seen by the agent
  ActionId action;
  double q_hat = 0.0;
  std::size_t accept_index = 0;  // h, number of acceptance coins that came up "continue"
  std::size_t env_steps = 0;
  std::size_t episodes = 0;      // resets performed
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based; row t holds the policy after t actor updates
  double avg_return = 0.0;
  std::size_t episodes_used = 0;   // cumulative over training work
  std::size_t env_steps_used = 0;  // cumulative over training work
  double wall_clock_s = 0.0;       // cumulative, evaluation excluded
  double theta_norm = 0.0;
  double w_hat_norm = 0.0;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Streams consumed by the sampler.
struct SamplerStreams {
  RngStream& reset;
  RngStream& policy;
  RngStream& coins;
};

/// Draws (s_h, a_h) ~ d_nu^pi and an unbiased estimate of Q^pi(s_h, a_h).
///
/// Phase A starts from an env reset with a_0 ~ pi and, at every step h,
/// accepts the current pair with probability 1 - gamma or otherwise acts
/// once more under pi. An episode that ends during phase A is restarted and
/// h keeps counting. Phase B acts from the accepted pair, stopping after
/// each reward with probability 1 - gamma or when the episode ends; Q-hat is
/// the undiscounted reward sum from step h inclusive.
template <Environment Env>
QSample sample_q(Env& env, const LogLinearPolicy& policy, double gamma, SamplerStreams rng)
{
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("sample_q: gamma must lie in [0, 1)");
  QSample out;
  StateVec s = env.reset(rng.reset);
  ++out.episodes;
  ActionId a = policy.act(s, rng.policy);

  while (rng.coins.coin(gamma)) {
    StepOutcome step = env.step(a);
    ++out.env_steps;
    if (step.done) {
      s = env.reset(rng.reset);
      ++out.episodes;
    } else {
      s = std::move(step.next_state);
    }
    a = policy.act(s, rng.policy);
    ++out.accept_index;
  }
  out.state = s;
  out.action = a;

  for (;;) {
    StepOutcome step = env.step(a);
    ++out.env_steps;
    out.q_hat += step.reward;
    if (step.done || !rng.coins.coin(gamma))
      break;
    a = policy.act(step.next_state, rng.policy);
  }
  return out;
}

/// w <- Proj_W(w - 2 alpha (w . phi - q) phi), where Proj_W rescales onto
/// the ball of radius w_max when the step leaves it.
inline Eigen::VectorXd critic_sgd_step(const Eigen::VectorXd& w, const Eigen::VectorXd& phi, double q_hat,
                                       double alpha, double w_max)
{
  if (w.size() != phi.size())
    throw std::invalid_argument("critic_sgd_step: dimension mismatch");
  if (!w.allFinite() || !phi.allFinite() || !std::isfinite(q_hat) || !std::isfinite(alpha))
    throw std::invalid_argument("critic_sgd_step: non-finite input");
  Eigen::VectorXd next = w - 2.0 * alpha * (w.dot(phi) - q_hat) * phi;
  if (!next.allFinite())
    return next;
  const double norm = next.stableNorm();
  if (norm > w_max)
    next *= w_max / norm;
  return next;
}

/// Called with every post-step critic iterate.
using CriticObserver = std::function<void(const Eigen::VectorXd&)>;

/// Averaged projected SGD over N samples from `next_sample`, which returns
/// a (phi, q_hat) pair. Starts from w_0 = 0 and returns (1/N) sum w_1..w_N.
template <class SampleSource>
Eigen::VectorXd averaged_sgd(SampleSource&& next_sample, std::size_t dim, std::size_t steps, double alpha,
                             double w_max, const CriticObserver& observer = {})
{
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t n = 0; n < steps; ++n) {
    const auto [phi, q] = next_sample();
    w = critic_sgd_step(w, phi, q, alpha, w_max);
    if (!w.allFinite())
      throw DivergenceError("critic iterate became non-finite at SGD step " + std::to_string(n + 1));
    if (observer)
      observer(w);
    sum += w;
  }
  return steps ? Eigen::VectorXd(sum / static_cast<double>(steps)) : sum;
}

struct CriticResult {
  Eigen::VectorXd w_hat;
  std::size_t env_steps = 0;
  std::size_t episodes = 0;
};

/// Fits the compatible critic for the current policy: N fresh samples from
/// sample_q, each consumed by one projected SGD step.
template <Environment Env>
CriticResult critic_solve(Env& env, const LogLinearPolicy& policy, const NpgConfig& cfg, SamplerStreams rng,
                          const CriticObserver& observer = {})
{
  CriticResult res;
  const FeatureMap& map = policy.map();
  auto source = [&] {
    const QSample qs = sample_q(env, policy, cfg.gamma, rng);
    res.env_steps += qs.env_steps;
    res.episodes += qs.episodes;
    return std::pair<Eigen::VectorXd, double>(map.phi(map.psi(qs.state), qs.action), qs.q_hat);
  };
  res.w_hat = averaged_sgd(source, map.total_dim(), cfg.critic_steps, cfg.critic_step, cfg.w_max, observer);
  return res;
}

inline PolicyParams actor_update(const PolicyParams& params, const Eigen::VectorXd& w_hat, double eta)
{
  if (params.theta.size() != w_hat.size())
    throw std::invalid_argument("actor_update: dimension mismatch");
  return {params.theta + eta * w_hat};
}

/// Mean undiscounted return of the stochastic policy over `episodes` fresh
/// episodes. Resets, actions and observation noise all draw from `rng`.
template <Environment Env>
double evaluate(Env env, const LogLinearPolicy& policy, std::size_t episodes, RngStream& rng, double zeta = 0.0)
{
  if (episodes < 1)
    throw std::invalid_argument("evaluate: episodes must be >= 1");
  const std::size_t cap = env.spec().max_episode_steps;
  auto act = [&](const StateVec& s, RngStream& r) { return policy.act(perturb(s, zeta, r), r); };
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e)
    total += rollout_return(env, act, rng, cap);
  return total / static_cast<double>(episodes);
}

struct TrainHooks {
  std::function<void(const IterationRecord&)> on_record;
  CriticObserver on_critic_step;
};

struct TrainResult {
  PolicyParams params;
  std::vector<IterationRecord> records;
};

/// Sample-based natural policy gradient with a log-linear policy.
///
/// Starting from theta = 0, each of the T iterations fits w-hat with
/// critic_solve and steps theta += eta * w-hat. After every iteration the
/// policy is evaluated on cfg.eval_episodes fresh episodes (untimed).
/// Observation noise of level zeta applies to both training and evaluation.
/// Throws DivergenceError if theta or w-hat stops being finite; records
/// already emitted through hooks.on_record are kept by the caller.
template <Environment Env>
TrainResult train(const Env& env_prototype, const FeatureMap& map, const NpgConfig& cfg, std::uint64_t seed,
                  double zeta = 0.0, const TrainHooks& hooks = {})
{
  cfg.validate();
  const EnvSpec spec = env_prototype.spec();
  if (map.raw_dim() != spec.raw_state_dim || map.action_count() != spec.action_count)
    throw std::invalid_argument("train: feature map does not match the environment");

  RunStreams streams(seed);
  NoisyObservation<Env> env(env_prototype, zeta, streams.noise);
  const SamplerStreams sampler{streams.reset, streams.policy, streams.coins};

  TrainResult result{PolicyParams::zeros(map), {}};
  std::size_t episodes = 0;
  std::size_t env_steps = 0;
  double elapsed = 0.0;

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const LogLinearPolicy current(map, result.params);
    CriticResult critic = critic_solve(env, current, cfg, sampler, hooks.on_critic_step);
    if (!critic.w_hat.allFinite())
      throw DivergenceError("critic estimate became non-finite at iteration " + std::to_string(t + 1));
    result.params = actor_update(result.params, critic.w_hat, cfg.actor_step);
    if (!result.params.theta.allFinite())
      throw DivergenceError("policy parameters became non-finite at iteration " + std::to_string(t + 1));
    elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    episodes += critic.episodes;
    env_steps += critic.env_steps;

    IterationRecord rec;
    rec.iteration = t + 1;
    rec.avg_return =
        evaluate(env_prototype, LogLinearPolicy(map, result.params), cfg.eval_episodes, streams.eval, zeta);
    rec.episodes_used = episodes;
    rec.env_steps_used = env_steps;
    rec.wall_clock_s = elapsed;
    rec.theta_norm = result.params.theta.norm();
    rec.w_hat_norm = critic.w_hat.norm();
    result.records.push_back(rec);
    if (hooks.on_record)
      hooks.on_record(rec);
  }
  return result;
}

}  // namespace lfanpg
