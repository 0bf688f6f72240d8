#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lfanpg/mdp.hpp"

namespace lfanpg {

enum class StateTransform { raw, cartpole_aug7, acrobot_aug7 };

inline std::string_view to_string(StateTransform t)
{
  switch (t) {
    case StateTransform::raw: return "raw";
    case StateTransform::cartpole_aug7: return "cartpole-aug7";
    case StateTransform::acrobot_aug7: return "acrobot-aug7";
  }
  return "?";
}

inline std::optional<StateTransform> parse_transform(std::string_view name)
{
  if (name == "raw") return StateTransform::raw;
  if (name == "cartpole-aug7") return StateTransform::cartpole_aug7;
  if (name == "acrobot-aug7") return StateTransform::acrobot_aug7;
  return std::nullopt;
}

namespace detail {

inline void require_finite(const StateVec& v, const char* who)
{
  if (!v.allFinite())
    throw std::invalid_argument(std::string(who) + ": non-finite input");
}

inline void require_size(const StateVec& v, Eigen::Index n, const char* who)
{
  if (v.size() != n)
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(n) + " entries, got " +
                                std::to_string(v.size()));
}

}  // namespace detail

/// (x, x_dot, theta, theta_dot) -> (x, x_dot, sin theta, cos theta, theta_dot, sin theta_dot, cos theta_dot)
inline StateVec augment_cartpole(const StateVec& raw)
{
  detail::require_size(raw, 4, "augment_cartpole");
  detail::require_finite(raw, "augment_cartpole");
  StateVec out(7);
  out << raw[0], raw[1], std::sin(raw[2]), std::cos(raw[2]), raw[3], std::sin(raw[3]), std::cos(raw[3]);
  return out;
}

/// Appends sin(omega2 - omega1) to the six acrobot observations.
inline StateVec augment_acrobot(const StateVec& raw)
{
  detail::require_size(raw, 6, "augment_acrobot");
  detail::require_finite(raw, "augment_acrobot");
  StateVec out(7);
  out.head<6>() = raw;
  out[6] = std::sin(raw[5] - raw[4]);
  return out;
}

/// Block one-hot state-action features: phi(s, a) = e_a (x) psi(s).
///
/// psi is the transformed observation of dimension d; the full feature
/// vector has D = action_count * d entries with psi written into the slice
/// [a*d, (a+1)*d).
class FeatureMap {
 public:
  FeatureMap(StateTransform transform, std::size_t raw_dim, std::size_t action_count)
      : transform_(transform), raw_dim_(raw_dim), action_count_(action_count)
  {
    switch (transform_) {
      case StateTransform::raw: state_dim_ = raw_dim; break;
      case StateTransform::cartpole_aug7:
        if (raw_dim != 4) throw std::invalid_argument("cartpole-aug7 needs a 4-dim raw state");
        state_dim_ = 7;
        break;
      case StateTransform::acrobot_aug7:
        if (raw_dim != 6) throw std::invalid_argument("acrobot-aug7 needs a 6-dim raw state");
        state_dim_ = 7;
        break;
    }
    if (action_count_ == 0 || state_dim_ == 0)
      throw std::invalid_argument("FeatureMap: empty dimensions");
  }

  StateTransform transform() const { return transform_; }
  std::size_t raw_dim() const { return raw_dim_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_count() const { return action_count_; }
  std::size_t total_dim() const { return state_dim_ * action_count_; }

  /// psi(s) for a raw observation.
  StateVec psi(const StateVec& raw) const
  {
    switch (transform_) {
      case StateTransform::cartpole_aug7: return augment_cartpole(raw);
      case StateTransform::acrobot_aug7: return augment_acrobot(raw);
      case StateTransform::raw: break;
    }
    detail::require_size(raw, static_cast<Eigen::Index>(raw_dim_), "FeatureMap::psi");
    detail::require_finite(raw, "FeatureMap::psi");
    return raw;
  }

  /// phi for an already-transformed psi(s).
  Eigen::VectorXd phi(const StateVec& psi_s, ActionId a) const
  {
    detail::require_size(psi_s, static_cast<Eigen::Index>(state_dim_), "FeatureMap::phi");
    if (a.index >= action_count_)
      throw std::invalid_argument("FeatureMap::phi: action out of range");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total_dim()));
    out.segment(block_offset(a), static_cast<Eigen::Index>(state_dim_)) = psi_s;
    return out;
  }

  /// phi(s,a)^T theta for every action, without materializing phi.
  Eigen::VectorXd logits(const Eigen::VectorXd& theta, const StateVec& psi_s) const
  {
    detail::require_size(theta, static_cast<Eigen::Index>(total_dim()), "FeatureMap::logits");
    detail::require_size(psi_s, static_cast<Eigen::Index>(state_dim_), "FeatureMap::logits");
    const auto d = static_cast<Eigen::Index>(state_dim_);
    Eigen::VectorXd out(static_cast<Eigen::Index>(action_count_));
    for (std::size_t a = 0; a < action_count_; ++a)
      out[static_cast<Eigen::Index>(a)] = theta.segment(block_offset(ActionId{a}), d).dot(psi_s);
    return out;
  }

  Eigen::Index block_offset(ActionId a) const { return static_cast<Eigen::Index>(a.index * state_dim_); }

 private:
  StateTransform transform_;
  std::size_t raw_dim_;
  std::size_t action_count_;
  std::size_t state_dim_ = 0;
};

}  // namespace lfanpg
