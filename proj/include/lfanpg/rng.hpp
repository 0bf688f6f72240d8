#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lfanpg {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic random stream identified by a root seed and a label.
///
/// The engine is mt19937_64 (fully specified by the standard) and every
/// derived variate is computed here rather than through the
/// implementation-defined std distributions, so a (seed, label) pair yields
/// the same sequence on every platform.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::string_view label)
      : seed_(seed), engine_(detail::splitmix64(seed ^ detail::splitmix64(detail::fnv1a(label))))
  {
  }

  /// Child stream; independent of the parent's draw position.
  RngStream split(std::string_view label) const
  {
    return RngStream(detail::splitmix64(seed_) ^ detail::fnv1a(label), label);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Bernoulli(p) trial.
  bool coin(double p) { return uniform() < p; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// The labeled streams a training run draws from.
struct RunStreams {
  RngStream reset;
  RngStream policy;
  RngStream coins;
  RngStream noise;
  RngStream eval;

  explicit RunStreams(std::uint64_t seed)
      : reset(seed, "reset"),
        policy(seed, "policy-sampling"),
        coins(seed, "sampler-coins"),
        noise(seed, "noise"),
        eval(seed, "eval")
  {
  }
};

}  // namespace lfanpg
