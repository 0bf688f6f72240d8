#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "lfanpg/envs/acrobot.hpp"
#include "lfanpg/envs/cartpole.hpp"
#include "lfanpg/harness/config.hpp"
#include "lfanpg/harness/csv.hpp"
#include "lfanpg/npg.hpp"

namespace lfanpg::harness {

namespace fs = std::filesystem;

/// Calls `fn` with a fresh instance of the named environment.
template <class Fn>
decltype(auto) with_env(const std::string& name, Fn&& fn)
{
  if (name == "cartpole")
    return fn(envs::CartPole{});
  if (name == "acrobot")
    return fn(envs::Acrobot{});
  throw ConfigError("env", "unknown env '" + name + "'");
}

/// One (transform, zeta, seed) training run.
struct RunSpec {
  std::string transform;
  double zeta = 0.0;
  std::uint64_t seed = 0;
};

struct RunArtifact {
  RunKey key;
  fs::path metrics_csv;
  fs::path checkpoint;
  fs::path config_echo;
  bool ok = false;
  std::string error;
  std::size_t iterations_done = 0;
  double final_return = 0.0;
  double wall_clock_s = 0.0;
};

struct RunReport {
  std::vector<RunArtifact> runs;
  bool all_ok() const
  {
    return std::all_of(runs.begin(), runs.end(), [](const RunArtifact& r) { return r.ok; });
  }
};

/// Trains one run, streaming CSV rows as iterations finish. A diverged run
/// keeps its partial CSV and is reported with ok = false.
inline RunArtifact execute_run(const ExperimentConfig& cfg, const RunSpec& spec)
{
  RunArtifact art;
  art.key = {make_run_id(cfg.env, spec.transform, spec.zeta, spec.seed), cfg.env, spec.transform, spec.seed,
             spec.zeta};
  const fs::path dir(cfg.output);
  art.metrics_csv = dir / (art.key.run_id + ".csv");
  art.checkpoint = dir / (art.key.run_id + ".ckpt");
  art.config_echo = dir / (art.key.run_id + ".cfg");

  ExperimentConfig echo = cfg;
  echo.transform = spec.transform;
  echo.noise = spec.zeta;
  echo.seeds = {spec.seed};
  {
    std::ofstream(art.config_echo, std::ios::binary) << serialize(echo);
  }

  std::ofstream csv(art.metrics_csv, std::ios::binary);
  csv << kCsvHeader << '\n';
  TrainHooks hooks;
  hooks.on_record = [&](const IterationRecord& rec) {
    write_csv_row(csv, art.key, rec);
    csv.flush();
    art.iterations_done = rec.iteration;
    art.final_return = rec.avg_return;
    art.wall_clock_s = rec.wall_clock_s;
  };

  try {
    with_env(cfg.env, [&](auto env) {
      const EnvSpec es = env.spec();
      const FeatureMap map(*parse_transform(spec.transform), es.raw_state_dim, es.action_count);
      const TrainResult res = train(env, map, cfg.npg, spec.seed, spec.zeta, hooks);
      PolicyCheckpoint ck{cfg.env, map.transform(), map.raw_dim(), map.state_dim(), map.action_count(),
                          res.params.theta};
      std::ofstream out(art.checkpoint, std::ios::binary);
      write_checkpoint(out, ck);
    });
    art.ok = true;
  } catch (const std::exception& e) {
    art.error = e.what();
  }
  return art;
}

/// Runs every spec on up to cfg.workers threads; results keep input order.
inline RunReport execute_all(const ExperimentConfig& cfg, const std::vector<RunSpec>& specs)
{
  fs::create_directories(cfg.output);
  RunReport report;
  report.runs.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++)
      report.runs[i] = execute_run(cfg, specs[i]);
  };
  const std::size_t n = std::min(cfg.workers, specs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();
  return report;
}

inline RunReport run(const ExperimentConfig& cfg)
{
  validate(cfg);
  std::vector<RunSpec> specs;
  for (auto seed : cfg.seeds)
    specs.push_back({cfg.transform, cfg.noise, seed});
  return execute_all(cfg, specs);
}

inline RunReport sweep_noise(const ExperimentConfig& cfg, const std::vector<double>& zetas)
{
  validate(cfg);
  if (zetas.empty())
    throw ConfigError("zetas", "at least one noise level is required");
  for (double z : zetas)
    if (!(z >= 0.0) || !std::isfinite(z))
      throw ConfigError("zetas", "noise levels must be finite and >= 0");
  if (std::set<double>(zetas.begin(), zetas.end()).size() != zetas.size())
    throw ConfigError("zetas", "duplicate noise level");
  std::vector<RunSpec> specs;
  for (double z : zetas)
    for (auto seed : cfg.seeds)
      specs.push_back({cfg.transform, z, seed});
  return execute_all(cfg, specs);
}

inline RunReport compare_features(const ExperimentConfig& cfg, const std::vector<std::string>& transforms)
{
  validate(cfg);
  if (transforms.empty())
    throw ConfigError("transforms", "at least one transform is required");
  for (const auto& t : transforms)
    checked_transform(t, cfg.env, "transforms");
  if (std::set<std::string>(transforms.begin(), transforms.end()).size() != transforms.size())
    throw ConfigError("transforms", "duplicate transform");
  std::vector<RunSpec> specs;
  for (const auto& t : transforms)
    for (auto seed : cfg.seeds)
      specs.push_back({t, cfg.noise, seed});
  return execute_all(cfg, specs);
}

struct GroupSummary {
  std::string transform;
  double zeta = 0.0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double median_final_return = 0.0;
  double total_wall_clock_s = 0.0;
};

/// Median final return per (transform, zeta) over the runs that completed.
inline std::vector<GroupSummary> summarize(const RunReport& report)
{
  std::map<std::tuple<std::string, double>, std::vector<const RunArtifact*>> groups;
  std::vector<std::tuple<std::string, double>> order;
  for (const auto& r : report.runs) {
    auto k = std::make_tuple(r.key.transform, r.key.zeta);
    if (!groups.count(k))
      order.push_back(k);
    groups[k].push_back(&r);
  }
  std::vector<GroupSummary> out;
  for (const auto& k : order) {
    GroupSummary g;
    std::tie(g.transform, g.zeta) = k;
    std::vector<double> finals;
    for (const RunArtifact* r : groups[k]) {
      ++g.runs;
      g.total_wall_clock_s += r->wall_clock_s;
      if (r->ok && r->iterations_done > 0)
        finals.push_back(r->final_return);
      else if (!r->ok)
        ++g.failed;
    }
    g.median_final_return = finals.empty() ? std::numeric_limits<double>::quiet_NaN() : median(finals);
    out.push_back(g);
  }
  return out;
}

inline void print_summary(std::ostream& os, const std::string& env, const RunReport& report)
{
  for (const auto& r : report.runs)
    if (!r.ok)
      os << "FAILED " << r.key.run_id << ": " << r.error << "\n";
  for (const auto& g : summarize(report)) {
    os << env << "/" << g.transform << "/zeta=" << format_double(g.zeta) << ": runs=" << g.runs
       << " failed=" << g.failed << " median_final_return=" << format_double(g.median_final_return)
       << " total_wall_clock_s=" << format_double(g.total_wall_clock_s) << "\n";
  }
}

}  // namespace lfanpg::harness
