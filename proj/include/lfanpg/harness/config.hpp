#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfanpg/features.hpp"
#include "lfanpg/npg.hpp"

namespace lfanpg::harness {

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field))
  {
  }
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string env = "cartpole";
  std::string transform = "cartpole-aug7";
  NpgConfig npg;
  double noise = 0.0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string output = "runs";
  std::size_t workers = 1;
  // Grids used by sweep-noise and compare-features.
  std::vector<double> zetas{0.0, 0.1, 0.3, 1.0, 3.0, 10.0};
  std::vector<std::string> transforms;
};

inline constexpr const char* kCartpolePaper = R"(# CartPole balancing, published hyperparameters
env = cartpole
transform = cartpole-aug7
iterations = 25
critic_steps = 150
eta = 0.1
alpha = 0.1
gamma = 0.95
w_max = 1e12
eval_episodes = 20
noise = 0
seed = 0,1,2,3,4
zetas = 0,0.1,0.3,1,3,10
transforms = raw,cartpole-aug7
output = runs/cartpole-paper
)";

inline constexpr const char* kAcrobotPaper = R"(# Acrobot swing-up, published hyperparameters
env = acrobot
transform = acrobot-aug7
iterations = 60
critic_steps = 80
eta = 1
alpha = 0.0001
gamma = 0.95
w_max = 1e12
eval_episodes = 20
noise = 0
seed = 0,1,2,3,4
zetas = 0,0.1,0.3,1,3,10
transforms = raw,acrobot-aug7
output = runs/acrobot-paper
)";

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (auto t = trim(tok); !t.empty())
      out.push_back(t);
  return out;
}

inline double to_real(const std::string& key, const std::string& v)
{
  try {
    return parse_double(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v)
{
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::out_of_range&) {
    throw ConfigError(key, "integer out of range: '" + v + "'");
  }
}

}  // namespace detail

/// Applies one `key = value` setting; unknown keys are rejected.
inline void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
  using namespace detail;
  if (key == "env") cfg.env = value;
  else if (key == "transform") cfg.transform = value;
  else if (key == "iterations") cfg.npg.iterations = to_uint(key, value);
  else if (key == "critic_steps") cfg.npg.critic_steps = to_uint(key, value);
  else if (key == "eta") cfg.npg.actor_step = to_real(key, value);
  else if (key == "alpha") cfg.npg.critic_step = to_real(key, value);
  else if (key == "gamma") cfg.npg.gamma = to_real(key, value);
  else if (key == "w_max") cfg.npg.w_max = to_real(key, value);
  else if (key == "eval_episodes") cfg.npg.eval_episodes = to_uint(key, value);
  else if (key == "noise") cfg.noise = to_real(key, value);
  else if (key == "output") cfg.output = value;
  else if (key == "workers") cfg.workers = to_uint(key, value);
  else if (key == "seed") {
    cfg.seeds.clear();
    for (const auto& s : split_list(value)) cfg.seeds.push_back(to_uint(key, s));
  } else if (key == "zetas") {
    cfg.zetas.clear();
    for (const auto& s : split_list(value)) cfg.zetas.push_back(to_real(key, s));
  } else if (key == "transforms") {
    cfg.transforms = split_list(value);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

/// Parses the flat `key = value` format ('#' starts a comment) on top of `base`.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {})
{
  std::stringstream ss(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(ss, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = detail::trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    set_key(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline std::optional<std::string> preset_text(const std::string& name)
{
  if (name == "cartpole-paper") return std::string(kCartpolePaper);
  if (name == "acrobot-paper") return std::string(kAcrobotPaper);
  return std::nullopt;
}

/// A bundled preset name or a config file path.
inline ExperimentConfig load_config(const std::string& name_or_path)
{
  if (auto text = preset_text(name_or_path))
    return parse_config(*text);
  std::ifstream in(name_or_path);
  if (!in)
    throw ConfigError("config", "cannot open '" + name_or_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline bool transform_fits_env(StateTransform t, const std::string& env)
{
  switch (t) {
    case StateTransform::raw: return true;
    case StateTransform::cartpole_aug7: return env == "cartpole";
    case StateTransform::acrobot_aug7: return env == "acrobot";
  }
  return false;
}

inline StateTransform checked_transform(const std::string& name, const std::string& env, const std::string& key)
{
  const auto t = parse_transform(name);
  if (!t)
    throw ConfigError(key, "unknown transform '" + name + "'");
  if (!transform_fits_env(*t, env))
    throw ConfigError(key, "transform '" + name + "' is not valid for env '" + env + "'");
  return *t;
}

inline void validate(const ExperimentConfig& cfg)
{
  if (cfg.env != "cartpole" && cfg.env != "acrobot")
    throw ConfigError("env", "unknown env '" + cfg.env + "' (expected cartpole or acrobot)");
  checked_transform(cfg.transform, cfg.env, "transform");
  try {
    cfg.npg.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    std::string field = msg.substr(0, msg.find(' '));
    if (field == "actor_step") field = "eta";
    if (field == "critic_step") field = "alpha";
    throw ConfigError(field, msg);
  }
  if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise))
    throw ConfigError("noise", "must be a finite value >= 0");
  if (cfg.seeds.empty())
    throw ConfigError("seed", "at least one seed is required");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
    throw ConfigError("seed", "seeds must be distinct");
  if (cfg.output.empty())
    throw ConfigError("output", "must not be empty");
  if (cfg.workers < 1)
    throw ConfigError("workers", "must be >= 1");
}

/// Fully resolved config in the same flat format; parses back to an equal config.
inline std::string serialize(const ExperimentConfig& cfg)
{
  auto join_reals = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
  };
  std::ostringstream os;
  os << "env = " << cfg.env << "\n";
  os << "transform = " << cfg.transform << "\n";
  os << "iterations = " << cfg.npg.iterations << "\n";
  os << "critic_steps = " << cfg.npg.critic_steps << "\n";
  os << "eta = " << format_double(cfg.npg.actor_step) << "\n";
  os << "alpha = " << format_double(cfg.npg.critic_step) << "\n";
  os << "gamma = " << format_double(cfg.npg.gamma) << "\n";
  os << "w_max = " << format_double(cfg.npg.w_max) << "\n";
  os << "eval_episodes = " << cfg.npg.eval_episodes << "\n";
  os << "noise = " << format_double(cfg.noise) << "\n";
  os << "seed = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? "," : "") << cfg.seeds[i];
  os << "\n";
  os << "zetas = " << join_reals(cfg.zetas) << "\n";
  os << "transforms = ";
  for (std::size_t i = 0; i < cfg.transforms.size(); ++i) os << (i ? "," : "") << cfg.transforms[i];
  os << "\n";
  os << "output = " << cfg.output << "\n";
  os << "workers = " << cfg.workers << "\n";
  return os.str();
}

}  // namespace lfanpg::harness
