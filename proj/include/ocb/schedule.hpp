#pragma once

#include <cstdint>
#include <stdexcept>

namespace ocb::sched {

// Duplicate-depth bucket of a round: the largest p with 4^p <= occurrence
// count (the count includes the current round).
inline int category(std::int64_t occurrence_count) {
  if (occurrence_count < 1)
    throw std::invalid_argument("category: occurrence count must be >= 1");
  int p = 0;
  std::int64_t power = 1;
  while (power <= occurrence_count / 4) {
    power *= 4;
    ++p;
  }
  return p;
}

inline int floor_log2(std::int64_t v) {
  if (v < 1) throw std::invalid_argument("floor_log2: value must be >= 1");
  int k = 0;
  while (v > 1) {
    v >>= 1;
    ++k;
  }
  return k;
}

// First round of period q at depth p: writing q = k 2^p + i with
// 0 <= i < 2^p, the start is 2^k + i 2^(k-p). Valid for q >= p 2^p (so that
// k >= p and the start is an integer).
inline std::int64_t period_start(int p, std::int64_t q) {
  if (p < 0 || p > 57) throw std::invalid_argument("period_start: bad category");
  const std::int64_t chunk = std::int64_t{1} << p;
  if (q < static_cast<std::int64_t>(p) * chunk)
    throw std::invalid_argument("period_start: q below the valid range p*2^p");
  const std::int64_t k = q >> p;
  const std::int64_t i = q & (chunk - 1);
  if (k > 62) throw std::overflow_error("period_start: start exceeds int64");
  return (std::int64_t{1} << k) + i * (std::int64_t{1} << (k - p));
}

// The unique q with period_start(p, q) <= t < period_start(p, q+1).
// Requires t >= 2^p (the first valid period start).
inline std::int64_t period_of(int p, std::int64_t t) {
  if (p < 0 || p > 57) throw std::invalid_argument("period_of: bad category");
  if (t < (std::int64_t{1} << p))
    throw std::invalid_argument("period_of: t below the first period start 2^p");
  const std::int64_t k = floor_log2(t);
  const std::int64_t i = (t - (std::int64_t{1} << k)) >> (k - p);
  return k * (std::int64_t{1} << p) + i;
}

// Strategy plans at depth p are seeded (value 0) at this period index.
inline std::int64_t plan_seed_period(int p) {
  if (p < 0 || p > 52) throw std::invalid_argument("plan_seed_period: bad category");
  return static_cast<std::int64_t>(p) * (std::int64_t{1} << (p + 5));
}

// Rounds t < 2^(32p) at depth p are handled by the per-instance initial
// regime. The boundary 2^(32p) equals period_start(p, plan_seed_period(p)).
inline bool in_initial_regime(int p, std::int64_t t) {
  if (p < 0) throw std::invalid_argument("in_initial_regime: bad category");
  if (t < 1) throw std::invalid_argument("in_initial_regime: t must be >= 1");
  if (p == 0) return false;
  if (32 * static_cast<std::int64_t>(p) >= 63) return true;
  return t < (std::int64_t{1} << (32 * p));
}

// How many future periods a strategy-0 verdict covers: max(1, p 2^p).
inline std::int64_t strategy0_span(int p) {
  if (p < 0 || p > 57) throw std::invalid_argument("strategy0_span: bad category");
  const std::int64_t span = static_cast<std::int64_t>(p) * (std::int64_t{1} << p);
  return span > 1 ? span : 1;
}

}  // namespace ocb::sched
