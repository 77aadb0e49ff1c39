#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

namespace ocb {

// Stream tags used to derive independent rng substreams. Every randomized
// component keys its stream with one of these plus its own identity, so
// adding or removing a component never shifts another component's draws.
namespace rtag {
inline constexpr std::uint64_t purpose = 0xA1;
inline constexpr std::uint64_t policy_pick = 0xA2;
inline constexpr std::uint64_t strat0 = 0xA3;
inline constexpr std::uint64_t strat0_initial = 0xA4;
inline constexpr std::uint64_t strat1_ix = 0xA5;
inline constexpr std::uint64_t expinf_inner = 0xA6;
inline constexpr std::uint64_t process = 0xB1;
inline constexpr std::uint64_t mechanism = 0xB2;
inline constexpr std::uint64_t rule = 0xB3;
inline constexpr std::uint64_t replication = 0xB4;
inline constexpr std::uint64_t target_draw = 0xC1;
}  // namespace rtag

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// A single deterministic random stream. All draws are produced from raw
// engine bits with fixed arithmetic, so sequences are identical across
// platforms for the same seed (std::*_distribution is not used).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return lo + static_cast<std::int64_t>(bits());  // full 2^64 range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t draw = bits();
    while (draw >= limit) draw = bits();
    return lo + static_cast<std::int64_t>(draw % range);
  }

  // Samples an index from a probability vector by cumulative scan.
  int sample_probs(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("sample_probs: empty vector");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw std::invalid_argument("sample_probs: negative entry");
      total += p;
    }
    if (!(total > 0.0)) throw std::invalid_argument("sample_probs: zero mass");
    const double u = uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
  }

 private:
  std::mt19937_64 engine_;
};

// Derives keyed substreams from a root seed via a splitmix64 chain.
struct RngFactory {
  std::uint64_t root = 0;

  std::uint64_t derive(std::initializer_list<std::uint64_t> key) const {
    std::uint64_t h = splitmix64(root ^ 0x6F63625F726E67ull);
    for (std::uint64_t part : key) h = splitmix64(h ^ part);
    return h;
  }

  RngStream stream(std::initializer_list<std::uint64_t> key) const {
    return RngStream(derive(key));
  }

  // Child factory for a nested scope (e.g. one replication of a run).
  RngFactory child(std::initializer_list<std::uint64_t> key) const {
    return RngFactory{derive(key)};
  }
};

}  // namespace ocb
