#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <map>

#include "lfanpg/envs/acrobot.hpp"
#include "lfanpg/envs/cartpole.hpp"
#include "lfanpg/npg.hpp"
#include "support/tabular_mdp.hpp"

using namespace lfanpg;
using lfanpg::testing::TabularMdp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

struct Streams {
  RngStream reset, policy, coins;
  explicit Streams(std::uint64_t seed) : reset(seed, "reset"), policy(seed, "policy-sampling"), coins(seed, "sampler-coins") {}
  SamplerStreams view() { return {reset, policy, coins}; }
};

LogLinearPolicy tabular_policy()
{
  const FeatureMap map(StateTransform::raw, 2, 2);
  // pi(.|s0) = softmax(0.5, -0.3), pi(.|s1) = softmax(-0.2, 0.8)
  return LogLinearPolicy(map, PolicyParams{vec({0.5, -0.2, -0.3, 0.8})});
}

}  // namespace

TEST(CriticSgdStep, HandEvaluatedUpdate)
{
  // w' = 0 - 2 * 0.1 * (0 - 2) * (1, 0) = (0.4, 0)
  const Eigen::VectorXd w = critic_sgd_step(vec({0, 0}), vec({1, 0}), 2.0, 0.1, 1e12);
  EXPECT_NEAR(w[0], 0.4, 1e-15);
  EXPECT_EQ(w[1], 0.0);
}

TEST(CriticSgdStep, ProjectsOntoBall)
{
  const Eigen::VectorXd w = critic_sgd_step(vec({3, 4}), vec({0, 0}), 1.0, 0.1, 1.0);
  EXPECT_NEAR(w[0], 0.6, 1e-15);
  EXPECT_NEAR(w[1], 0.8, 1e-15);
  const Eigen::VectorXd inside = critic_sgd_step(vec({0.3, 0.4}), vec({0, 0}), 1.0, 0.1, 1.0);
  EXPECT_EQ(inside, vec({0.3, 0.4}));
}

TEST(CriticSgdStep, ProjectionSurvivesOverflowingNorm)
{
  const Eigen::VectorXd w = critic_sgd_step(vec({3e200, 4e200}), vec({0, 0}), 1.0, 0.1, 1.0);
  EXPECT_NEAR(w[0], 0.6, 1e-15);
  EXPECT_NEAR(w[1], 0.8, 1e-15);
}

TEST(CriticSgdStep, ZeroResidualLeavesWeightsUnchanged)
{
  const Eigen::VectorXd w = vec({1.5, -2.0, 0.25});
  const Eigen::VectorXd phi = vec({2.0, 1.0, 4.0});
  EXPECT_EQ(critic_sgd_step(w, phi, w.dot(phi), 0.3, 1e12), w);
}

TEST(CriticSgdStep, RejectsBadInput)
{
  EXPECT_THROW(critic_sgd_step(vec({0, 0}), vec({1, 0, 0}), 1.0, 0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(critic_sgd_step(vec({0, 0}), vec({1, NAN}), 1.0, 0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(critic_sgd_step(vec({0, 0}), vec({1, 0}), INFINITY, 0.1, 1.0), std::invalid_argument);
}

TEST(AveragedSgd, SingleStepIsThePostUpdateIterate)
{
  auto source = [] { return std::pair<Eigen::VectorXd, double>(vec({1, 0}), 2.0); };
  EXPECT_EQ(averaged_sgd(source, 2, 1, 0.1, 1e12), critic_sgd_step(vec({0, 0}), vec({1, 0}), 2.0, 0.1, 1e12));
}

TEST(AveragedSgd, AveragesIteratesOneThroughN)
{
  // w1 = 0.4, w2 = 0.4 + 0.2 * (2 - 0.4) = 0.72; average 0.56
  auto source = [] { return std::pair<Eigen::VectorXd, double>(vec({1}), 2.0); };
  EXPECT_NEAR(averaged_sgd(source, 1, 2, 0.1, 1e12)[0], 0.56, 1e-15);
}

TEST(AveragedSgd, ZeroStepSizeStaysAtOrigin)
{
  RngStream rng(0, "x");
  auto source = [&] { return std::pair<Eigen::VectorXd, double>(vec({rng.uniform(), rng.uniform()}), 5.0); };
  EXPECT_EQ(averaged_sgd(source, 2, 100, 0.0, 1e12), vec({0, 0}));
}

TEST(AveragedSgd, OverflowIsReportedAsDivergence)
{
  auto source = [] { return std::pair<Eigen::VectorXd, double>(vec({1e200, 1e200}), 1e200); };
  EXPECT_THROW(averaged_sgd(source, 2, 5, 1e200, 1e300), DivergenceError);
}

// Least-squares oracle: normal equations on a frozen dataset versus the
// averaged iterate; error should shrink as N grows and alpha shrinks.
TEST(AveragedSgd, ApproachesLeastSquaresOnReplayedData)
{
  const FeatureMap map(StateTransform::raw, 3, 2);
  RngStream data_rng(1, "dataset");
  const Eigen::VectorXd w_true = vec({1.0, -2.0, 0.5, 3.0, 0.0, -1.0});
  std::vector<std::pair<Eigen::VectorXd, double>> data;
  for (int i = 0; i < 300; ++i) {
    StateVec psi(3);
    for (Eigen::Index k = 0; k < 3; ++k) psi[k] = data_rng.uniform(-2, 2);
    const auto phi = map.phi(psi, ActionId{data_rng.next_u64() % 2});
    data.emplace_back(phi, phi.dot(w_true) + data_rng.uniform(-1, 1));
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
  for (const auto& [phi, q] : data) {
    a += phi * phi.transpose();
    b += q * phi;
  }
  const Eigen::VectorXd w_ls = a.ldlt().solve(b);

  auto rel_error = [&](std::size_t steps, double alpha) {
    RngStream pick(2, "replay");
    auto source = [&] { return data[pick.next_u64() % data.size()]; };
    return (averaged_sgd(source, 6, steps, alpha, 1e12) - w_ls).norm() / w_ls.norm();
  };
  const double coarse = rel_error(2000, 0.02);
  const double fine = rel_error(40000, 0.005);
  EXPECT_LT(fine, coarse);
  EXPECT_LT(fine, 0.05);
}

TEST(ActorUpdate, VectorArithmetic)
{
  const PolicyParams zero{Eigen::VectorXd::Zero(4)};
  const Eigen::VectorXd w = vec({1, -1, 0, 0});
  const PolicyParams next = actor_update(zero, w, 0.1);
  EXPECT_EQ(next.theta, vec({0.1, -0.1, 0, 0}));
  EXPECT_EQ(actor_update(next, w, 0.0).theta, next.theta);
  const Eigen::VectorXd w2 = vec({0.5, 2, -3, 1});
  EXPECT_LT((actor_update(actor_update(zero, w, 0.3), w2, 0.3).theta - actor_update(zero, w + w2, 0.3).theta)
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_THROW(actor_update(zero, vec({1}), 0.1), std::invalid_argument);
}

TEST(SampleQ, ZeroGammaAcceptsImmediatelyAndStopsAfterOneReward)
{
  envs::CartPole env;
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  const LogLinearPolicy policy(map, PolicyParams::zeros(map));
  Streams s(0);
  for (int i = 0; i < 200; ++i) {
    const QSample q = sample_q(env, policy, 0.0, s.view());
    ASSERT_EQ(q.accept_index, 0u);
    ASSERT_EQ(q.q_hat, 1.0);
    ASSERT_EQ(q.env_steps, 1u);
  }
}

TEST(SampleQ, AcceptanceIndexMeanMatchesGeometric)
{
  TabularMdp env;
  const LogLinearPolicy policy = tabular_policy();
  Streams s(1);
  constexpr int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += static_cast<double>(sample_q(env, policy, 0.95, s.view()).accept_index);
  EXPECT_NEAR(sum / n, 19.0, 0.05 * 19.0);
}

TEST(SampleQ, UnbiasedOnTabularMdp)
{
  TabularMdp env;
  const LogLinearPolicy policy = tabular_policy();
  const double gamma = 0.9;
  const Eigen::Vector4d q_exact = env.exact_q(policy, gamma);
  Streams s(2);
  std::map<std::size_t, std::vector<double>> by_pair;
  for (int i = 0; i < 80000; ++i) {
    const QSample q = sample_q(env, policy, gamma, s.view());
    by_pair[2 * static_cast<std::size_t>(q.state[1]) + q.action.index].push_back(q.q_hat);
  }
  ASSERT_EQ(by_pair.size(), 4u);
  for (const auto& [pair, qs] : by_pair) {
    const double n = static_cast<double>(qs.size());
    double mean = 0.0, sq = 0.0;
    for (double v : qs) mean += v;
    mean /= n;
    for (double v : qs) sq += (v - mean) * (v - mean);
    const double se = std::sqrt(sq / (n - 1) / n);
    EXPECT_NEAR(mean, q_exact[static_cast<Eigen::Index>(pair)], 3 * se) << "pair " << pair;
  }
}

TEST(SampleQ, RestartsEpisodesDuringAcceptancePhase)
{
  envs::CartPole env;
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  const LogLinearPolicy policy(map, PolicyParams::zeros(map));
  Streams s(3);
  std::size_t restarts = 0;
  for (int i = 0; i < 2000; ++i) {
    const QSample q = sample_q(env, policy, 0.99, s.view());
    ASSERT_GE(q.q_hat, 1.0);
    ASSERT_LE(q.q_hat, 200.0);
    restarts += q.episodes - 1;
  }
  // random policy survives ~20 steps; with mean acceptance index 99 restarts are routine
  EXPECT_GT(restarts, 1000u);
}

TEST(SampleQ, AcrobotEstimatesStayInRewardRange)
{
  envs::Acrobot env;
  const FeatureMap map(StateTransform::acrobot_aug7, 6, 3);
  const LogLinearPolicy policy(map, PolicyParams::zeros(map));
  Streams s(4);
  for (int i = 0; i < 500; ++i) {
    const QSample q = sample_q(env, policy, 0.95, s.view());
    ASSERT_LE(q.q_hat, 0.0);
    ASSERT_GE(q.q_hat, -500.0);
  }
}

TEST(CriticSolve, ZeroStepSizeGivesZero)
{
  envs::CartPole env;
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  NpgConfig cfg;
  cfg.critic_step = 0.0;
  Streams s(5);
  const CriticResult res = critic_solve(env, LogLinearPolicy(map, PolicyParams::zeros(map)), cfg, s.view());
  EXPECT_EQ(res.w_hat, Eigen::VectorXd::Zero(14));
  EXPECT_GT(res.env_steps, 0u);
}

TEST(CriticSolve, ProjectionHoldsAtEveryStep)
{
  envs::CartPole env;
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  NpgConfig cfg;
  cfg.w_max = 0.5;
  Streams s(6);
  double worst = 0.0;
  critic_solve(env, LogLinearPolicy(map, PolicyParams::zeros(map)), cfg, s.view(),
               [&](const Eigen::VectorXd& w) { worst = std::max(worst, w.norm()); });
  EXPECT_LE(worst, 0.5 + 1e-12);
  EXPECT_GT(worst, 0.49);
}

TEST(Evaluate, AlwaysFailingPolicyScoresLow)
{
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  PolicyParams params = PolicyParams::zeros(map);
  params.theta[7 + 3] = 100.0;  // cos(theta) weight on "push right": always push right
  RngStream rng(0, "eval");
  const double mean = evaluate(envs::CartPole{}, LogLinearPolicy(map, params), 20, rng);
  EXPECT_GT(mean, 0.0);
  EXPECT_LT(mean, 20.0);
}

TEST(Evaluate, UniformAcrobotPolicyStaysNearFloor)
{
  const FeatureMap map(StateTransform::acrobot_aug7, 6, 3);
  RngStream rng(0, "eval");
  EXPECT_LT(evaluate(envs::Acrobot{}, LogLinearPolicy(map, PolicyParams::zeros(map)), 20, rng), -450.0);
}

TEST(Evaluate, SingleEpisodeEqualsRollout)
{
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  const LogLinearPolicy policy(map, PolicyParams::zeros(map));
  RngStream a(3, "eval"), b(3, "eval");
  envs::CartPole env;
  const double single =
      rollout_return(env, [&](const StateVec& s, RngStream& r) { return policy.act(s, r); }, b, 200);
  EXPECT_EQ(evaluate(envs::CartPole{}, policy, 1, a), single);
  EXPECT_THROW(evaluate(envs::CartPole{}, policy, 0, a), std::invalid_argument);
}

TEST(Train, ZeroIterationsReturnsInitialPolicy)
{
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  NpgConfig cfg;
  cfg.iterations = 0;
  const TrainResult res = train(envs::CartPole{}, map, cfg, 0);
  EXPECT_EQ(res.params.theta, Eigen::VectorXd::Zero(14));
  EXPECT_TRUE(res.records.empty());
}

TEST(Train, DeterministicExceptTiming)
{
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  NpgConfig cfg;
  cfg.iterations = 5;
  const TrainResult a = train(envs::CartPole{}, map, cfg, 11, 0.2);
  const TrainResult b = train(envs::CartPole{}, map, cfg, 11, 0.2);
  ASSERT_EQ(a.records.size(), 5u);
  EXPECT_EQ(a.params.theta, b.params.theta);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].iteration, i + 1);
    EXPECT_EQ(a.records[i].avg_return, b.records[i].avg_return);
    EXPECT_EQ(a.records[i].env_steps_used, b.records[i].env_steps_used);
    EXPECT_EQ(a.records[i].episodes_used, b.records[i].episodes_used);
    EXPECT_EQ(a.records[i].theta_norm, b.records[i].theta_norm);
    EXPECT_EQ(a.records[i].w_hat_norm, b.records[i].w_hat_norm);
    if (i > 0) {
      EXPECT_GE(a.records[i].wall_clock_s, a.records[i - 1].wall_clock_s);
      EXPECT_GT(a.records[i].env_steps_used, a.records[i - 1].env_steps_used);
    }
  }
  const TrainResult other = train(envs::CartPole{}, map, cfg, 12, 0.2);
  EXPECT_NE(other.params.theta, a.params.theta);
}

TEST(Train, RejectsInvalidConfigAndMismatchedMap)
{
  NpgConfig cfg;
  cfg.gamma = 1.0;
  EXPECT_THROW(train(envs::CartPole{}, FeatureMap(StateTransform::raw, 4, 2), cfg, 0), std::invalid_argument);
  EXPECT_THROW(train(envs::CartPole{}, FeatureMap(StateTransform::raw, 6, 3), NpgConfig{}, 0),
               std::invalid_argument);
}

TEST(Train, DivergenceAbortsWithPartialRecords)
{
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  NpgConfig cfg;
  cfg.iterations = 3;
  cfg.critic_step = 1e300;
  cfg.w_max = 1e300;
  std::size_t seen = 0;
  TrainHooks hooks;
  hooks.on_record = [&](const IterationRecord&) { ++seen; };
  EXPECT_THROW(train(envs::CartPole{}, map, cfg, 0, 0.0, hooks), DivergenceError);
  EXPECT_LT(seen, 3u);
}

// Five seeds at the CartPole hyperparameters: the last iteration beats the
// untrained (theta = 0) policy on the same evaluation protocol.
TEST(Train, CartPoleImprovesOverInitialPolicyForEverySeed)
{
  const FeatureMap map(StateTransform::cartpole_aug7, 4, 2);
  const NpgConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TrainResult res = train(envs::CartPole{}, map, cfg, seed);
    RngStream eval(seed, "eval");
    const double initial = evaluate(envs::CartPole{}, LogLinearPolicy(map, PolicyParams::zeros(map)),
                                    cfg.eval_episodes, eval);
    EXPECT_GT(res.records.back().avg_return, initial) << "seed " << seed;
  }
}
