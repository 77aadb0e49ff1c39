#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ocb {

// Outcome of one independent cross-check scenario. Each scenario recomputes
// expected behavior from first principles (closed forms, brute force, or
// Monte Carlo) and compares the library against it.
struct OracleOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Inverse-propensity estimator unbiasedness: drives the duplicate-depth rule
// through one depth-0 period on scripted fresh contexts with a deterministic
// reward table, then compares the Monte Carlo mean of each period estimator
// against its exact expectation within se_mult standard errors.
OracleOutcome oracle_ht_estimator(int draws, double se_mult);

// Depth-p period lattice: closed-form starts, power-of-two integral lengths,
// and the length sandwich 2^(-p-1) T(q+1) <= len <= 2^(-p) T(q), for all
// depths p <= max_p and periods with next start <= max_next_start; also
// walks every round t <= max_next_start checking period_of consistency.
OracleOutcome oracle_period_schedule(int max_p, std::int64_t max_next_start);

// Infinite-expert period schedule: exact cumulative-cube boundaries for
// every round t <= max_t, checked against a brute-force running boundary.
OracleOutcome oracle_expinf_schedule(std::int64_t max_t);

// Duplicate filtering and infrequent-instance mass against quadratic brute
// force on randomized traces (mixed id pools, several partitions,
// thresholds, and repeat caps).
OracleOutcome oracle_dedup_brute(int traces, std::int64_t length, std::uint64_t seed);

// Policy enumeration exhaustiveness: every map on small finite domains
// appears within the (2 |A|^n |domain-budget|) index bound, and the leading
// countable-domain policies have the documented small supports.
OracleOutcome oracle_policy_exhaustion();

// Reward mechanisms: Monte Carlo sample averages match mean() within 4
// standard errors; deterministic mechanisms match exactly; boundedness
// flags and the zero-spread anchor behave as documented.
OracleOutcome oracle_sample_mean(std::uint64_t seed);

// Scenario registry for the CLI: names in fixed order.
std::vector<std::string> oracle_scenarios();
// Runs one scenario by name at its default (fast) scale.
OracleOutcome run_oracle(const std::string& name);

}  // namespace ocb
