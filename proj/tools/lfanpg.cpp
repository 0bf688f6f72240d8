// Command line front end: train, eval, sweep-noise, compare-features.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lfanpg/harness/runner.hpp"

namespace {

using namespace lfanpg;
using namespace lfanpg::harness;

constexpr int kExitRunFailed = 1;
constexpr int kExitUsage = 2;

/// Flags shared by the training verbs; every one mirrors a config key.
struct CommonFlags {
  std::string config;
  std::optional<std::string> env, transform, output, seed;
  std::optional<std::size_t> iterations, critic_steps, eval_episodes, workers;
  std::optional<double> eta, alpha, gamma, w_max, noise;

  void add_to(CLI::App* app)
  {
    app->add_option("--config", config, "config file or bundled preset (cartpole-paper, acrobot-paper)");
    app->add_option("--env", env, "cartpole | acrobot");
    app->add_option("--transform", transform, "raw | cartpole-aug7 | acrobot-aug7");
    app->add_option("--iterations", iterations, "actor iterations T");
    app->add_option("--critic-steps", critic_steps, "critic SGD iterations N");
    app->add_option("--eta", eta, "actor step size");
    app->add_option("--alpha", alpha, "critic SGD step size");
    app->add_option("--gamma", gamma, "sampler continuation probability");
    app->add_option("--w-max", w_max, "critic norm bound");
    app->add_option("--eval-episodes", eval_episodes, "evaluation episodes per iteration");
    app->add_option("--noise", noise, "observation noise level zeta");
    app->add_option("--seed", seed, "comma separated seed list");
    app->add_option("--out", output, "output directory");
    app->add_option("--workers", workers, "parallel runs");
  }

  ExperimentConfig resolve() const
  {
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
    auto set = [&](const char* key, const auto& opt) {
      if (!opt)
        return;
      if constexpr (std::is_same_v<std::decay_t<decltype(*opt)>, std::string>)
        set_key(cfg, key, *opt);
      else if constexpr (std::is_floating_point_v<std::decay_t<decltype(*opt)>>)
        set_key(cfg, key, format_double(*opt));
      else
        set_key(cfg, key, std::to_string(*opt));
    };
    set("env", env);
    // Switching env without naming a transform falls back to that env's aug7 map.
    if (env && !transform) {
      const auto t = parse_transform(cfg.transform);
      if (t && !transform_fits_env(*t, cfg.env))
        cfg.transform = cfg.env + "-aug7";
    }
    set("transform", transform);
    set("iterations", iterations);
    set("critic_steps", critic_steps);
    set("eta", eta);
    set("alpha", alpha);
    set("gamma", gamma);
    set("w_max", w_max);
    set("eval_episodes", eval_episodes);
    set("noise", noise);
    set("seed", seed);
    set("output", output);
    set("workers", workers);
    return cfg;
  }
};

int finish(const ExperimentConfig& cfg, const RunReport& report)
{
  print_summary(std::cout, cfg.env, report);
  for (const auto& r : report.runs)
    std::cout << "wrote " << r.metrics_csv.string() << "\n";
  return report.all_ok() ? 0 : kExitRunFailed;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Natural policy gradient with linear function approximation"};
  app.require_subcommand(1);

  CommonFlags train_flags, sweep_flags, compare_flags;
  auto* train_cmd = app.add_subcommand("train", "train one run per seed");
  train_flags.add_to(train_cmd);

  std::string zetas;
  auto* sweep_cmd = app.add_subcommand("sweep-noise", "train one run per (noise level, seed)");
  sweep_flags.add_to(sweep_cmd);
  sweep_cmd->add_option("--zetas", zetas, "comma separated noise levels (default 0,0.1,0.3,1,3,10)");

  std::string transforms;
  auto* compare_cmd = app.add_subcommand("compare-features", "train one run per (transform, seed)");
  compare_flags.add_to(compare_cmd);
  compare_cmd->add_option("--transforms", transforms, "comma separated transforms (default raw,<env>-aug7)");

  std::string checkpoint, eval_seed = "0";
  std::size_t episodes = 20;
  double eval_noise = 0.0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved policy checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--episodes", episodes, "number of episodes");
  eval_cmd->add_option("--seed", eval_seed, "seed");
  eval_cmd->add_option("--noise", eval_noise, "observation noise level zeta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) {
      const ExperimentConfig cfg = train_flags.resolve();
      return finish(cfg, run(cfg));
    }
    if (*sweep_cmd) {
      ExperimentConfig cfg = sweep_flags.resolve();
      if (!zetas.empty())
        set_key(cfg, "zetas", zetas);
      return finish(cfg, sweep_noise(cfg, cfg.zetas));
    }
    if (*compare_cmd) {
      ExperimentConfig cfg = compare_flags.resolve();
      if (!transforms.empty())
        set_key(cfg, "transforms", transforms);
      if (cfg.transforms.empty())
        cfg.transforms = {"raw", cfg.env + "-aug7"};
      return finish(cfg, compare_features(cfg, cfg.transforms));
    }
    if (*eval_cmd) {
      std::ifstream in(checkpoint);
      if (!in)
        throw ConfigError("checkpoint", "cannot open '" + checkpoint + "'");
      const PolicyCheckpoint ck = read_checkpoint(in);
      if (episodes < 1)
        throw ConfigError("episodes", "must be >= 1");
      if (!(eval_noise >= 0.0))
        throw ConfigError("noise", "must be >= 0");
      RngStream rng(std::stoull(eval_seed), "eval");
      const LogLinearPolicy policy(ck.feature_map(), PolicyParams{ck.theta});
      const double mean = with_env(ck.env, [&](auto env) { return evaluate(env, policy, episodes, rng, eval_noise); });
      std::cout << "mean_return=" << format_double(mean) << " episodes=" << episodes << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
