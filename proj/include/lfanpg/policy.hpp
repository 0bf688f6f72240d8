#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "lfanpg/features.hpp"

namespace lfanpg {

/// Flat parameter vector theta of length action_count * d.
struct PolicyParams {
  Eigen::VectorXd theta;

  static PolicyParams zeros(const FeatureMap& map)
  {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.total_dim()))};
  }
};

/// Numerically stable softmax; rejects non-finite logits.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits)
{
  if (logits.size() == 0 || !logits.allFinite())
    throw std::invalid_argument("softmax: non-finite or empty logits");
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

/// pi_theta(. | s) = softmax over a of phi(s,a)^T theta.
inline Eigen::VectorXd action_distribution(const PolicyParams& params, const FeatureMap& map,
                                           const StateVec& psi_s)
{
  return softmax(map.logits(params.theta, psi_s));
}

/// Inverse-CDF draw using a single uniform variate.
inline ActionId sample_action(const Eigen::VectorXd& p, RngStream& rng)
{
  if (p.size() == 0 || !p.allFinite() || (p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("sample_action: not a probability vector");
  const double u = rng.uniform();
  double cdf = 0.0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    cdf += p[a];
    if (u < cdf)
      return ActionId{static_cast<std::size_t>(a)};
  }
  // u landed in the rounding gap above the accumulated sum; take the last
  // action with positive mass.
  Eigen::Index last = p.size() - 1;
  while (last > 0 && p[last] == 0.0)
    --last;
  return ActionId{static_cast<std::size_t>(last)};
}

/// Log-linear policy over raw observations.
class LogLinearPolicy {
 public:
  LogLinearPolicy(FeatureMap map, PolicyParams params) : map_(std::move(map)), params_(std::move(params))
  {
    if (static_cast<std::size_t>(params_.theta.size()) != map_.total_dim())
      throw std::invalid_argument("LogLinearPolicy: theta dimension does not match the feature map");
  }

  Eigen::VectorXd distribution(const StateVec& raw) const
  {
    return action_distribution(params_, map_, map_.psi(raw));
  }

  ActionId act(const StateVec& raw, RngStream& rng) const { return sample_action(distribution(raw), rng); }

  const FeatureMap& map() const { return map_; }
  const PolicyParams& params() const { return params_; }

 private:
  FeatureMap map_;
  PolicyParams params_;
};

// Checkpoint text format: one `name = value` per line, '#' comments.
//   format = lfanpg-policy-v1
//   env = cartpole
//   transform = cartpole-aug7
//   raw_dim = 4
//   state_dim = 7
//   action_count = 2
//   theta = <comma separated shortest round-trip doubles>

struct PolicyCheckpoint {
  std::string env;
  StateTransform transform = StateTransform::raw;
  std::size_t raw_dim = 0;
  std::size_t state_dim = 0;
  std::size_t action_count = 0;
  Eigen::VectorXd theta;

  FeatureMap feature_map() const { return FeatureMap(transform, raw_dim, action_count); }
};

inline std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s)
{
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

inline void write_checkpoint(std::ostream& os, const PolicyCheckpoint& ck)
{
  os << "format = lfanpg-policy-v1\n";
  os << "env = " << ck.env << "\n";
  os << "transform = " << to_string(ck.transform) << "\n";
  os << "raw_dim = " << ck.raw_dim << "\n";
  os << "state_dim = " << ck.state_dim << "\n";
  os << "action_count = " << ck.action_count << "\n";
  os << "theta = ";
  for (Eigen::Index i = 0; i < ck.theta.size(); ++i)
    os << (i ? "," : "") << format_double(ck.theta[i]);
  os << "\n";
}

inline PolicyCheckpoint read_checkpoint(std::istream& is)
{
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto field = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end())
      throw std::runtime_error("checkpoint: missing field '" + k + "'");
    return it->second;
  };
  if (field("format") != "lfanpg-policy-v1")
    throw std::runtime_error("checkpoint: unsupported format '" + field("format") + "'");

  PolicyCheckpoint ck;
  ck.env = field("env");
  const auto t = parse_transform(field("transform"));
  if (!t)
    throw std::runtime_error("checkpoint: unknown transform '" + field("transform") + "'");
  ck.transform = *t;
  ck.raw_dim = std::stoul(field("raw_dim"));
  ck.state_dim = std::stoul(field("state_dim"));
  ck.action_count = std::stoul(field("action_count"));

  std::vector<double> values;
  std::stringstream ss(field("theta"));
  for (std::string tok; std::getline(ss, tok, ',');)
    values.push_back(parse_double(tok));
  if (values.size() != ck.state_dim * ck.action_count)
    throw std::runtime_error("checkpoint: theta has " + std::to_string(values.size()) + " entries, expected " +
                             std::to_string(ck.state_dim * ck.action_count));
  ck.theta = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (ck.feature_map().state_dim() != ck.state_dim)
    throw std::runtime_error("checkpoint: state_dim inconsistent with transform");
  return ck;
}

}  // namespace lfanpg
