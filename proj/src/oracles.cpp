#include "ocb/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "ocb/bandits.hpp"
#include "ocb/core.hpp"
#include "ocb/policy_net.hpp"
#include "ocb/processes.hpp"
#include "ocb/rewards.hpp"
#include "ocb/rng.hpp"
#include "ocb/schedule.hpp"
#include "ocb/universal.hpp"

namespace ocb {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

OracleOutcome fail(std::string name, std::string detail) {
  return OracleOutcome{std::move(name), false, std::move(detail)};
}

OracleOutcome pass(std::string name, std::string detail) {
  return OracleOutcome{std::move(name), true, std::move(detail)};
}

}  // namespace

OracleOutcome oracle_ht_estimator(int draws, double se_mult) {
  const std::string name = "ht-estimator-strat0";
  if (draws < 100) return fail(name, "needs at least 100 draws");

  // Scripted drive: 63 rounds of fresh contexts (all depth 0) with a
  // deterministic reward table; the depth-0 period starting at round 32
  // fires at round 63 with 5 enumerated policies in play.
  constexpr std::int64_t kRounds = 63;
  constexpr std::int64_t kPeriodFirst = 32;
  constexpr int kPolicies = 5;
  const auto context_id = [](std::int64_t t) { return 64 - t; };
  const auto reward = [](int action, std::int64_t id) {
    return double(((action + 1) * (id + 3)) % 97) / 96.0;
  };

  // Exact expectations. A first-occurrence round contributes its exploration
  // probability times the inverse-propensity increment, which telescopes to
  // the plain reward of the probed arm/policy.
  const PolicyFamily family{PolicySpace::countable(2)};
  double expected0 = 0.0;
  std::vector<double> expected_pol(kPolicies, 0.0);
  for (std::int64_t t = kPeriodFirst; t <= kRounds; ++t) {
    const std::int64_t id = context_id(t);
    expected0 += 0.5 * (reward(0, id) + reward(1, id));
    const ContextPoint x{id, {}};
    for (int l = 1; l <= kPolicies; ++l) {
      expected_pol[l - 1] += reward(family.evaluate(std::uint64_t(l), x), id);
    }
  }

  const RngFactory root{0x68746f7261636cull};
  std::vector<double> sum(kPolicies + 1, 0.0), sumsq(kPolicies + 1, 0.0);
  for (int d = 0; d < draws; ++d) {
    UniversalOptions options;
    options.num_actions = 2;
    options.policy_space = PolicySpace::countable(2);
    UniversalFiniteRule rule(std::move(options), root.child({std::uint64_t(d)}));
    for (std::int64_t t = 1; t <= kRounds; ++t) {
      const std::int64_t id = context_id(t);
      const int action = rule.select(ContextPoint{id, {}}, t);
      rule.feed(RewardSample{reward(action, id), true});
    }
    const auto& fired = rule.last_fired_period();
    if (!fired || fired->category != 0 || fired->period != 5) {
      return fail(name, "expected the depth-0 period 5 to fire at round 63");
    }
    if (fired->estimate_policies.size() != std::size_t(kPolicies)) {
      return fail(name, "fired period should report 5 policy estimators");
    }
    sum[0] += fired->estimate_strat0;
    sumsq[0] += fired->estimate_strat0 * fired->estimate_strat0;
    for (int l = 1; l <= kPolicies; ++l) {
      const double v = fired->estimate_policies[std::size_t(l - 1)];
      sum[std::size_t(l)] += v;
      sumsq[std::size_t(l)] += v * v;
    }
  }

  double worst_z = 0.0;
  for (int j = 0; j <= kPolicies; ++j) {
    const double expected = j == 0 ? expected0 : expected_pol[std::size_t(j - 1)];
    const double mean = sum[std::size_t(j)] / double(draws);
    const double var =
        (sumsq[std::size_t(j)] - double(draws) * mean * mean) / double(draws - 1);
    const double se = std::sqrt(std::max(var, 0.0) / double(draws));
    if (!(se > 0.0)) return fail(name, "degenerate estimator spread");
    worst_z = std::max(worst_z, std::abs(mean - expected) / se);
  }
  const std::string detail =
      fmt("max |z| = %.3f over 6 estimators (limit %.1f)", worst_z, se_mult);
  return worst_z <= se_mult ? pass(name, detail) : fail(name, detail);
}

OracleOutcome oracle_period_schedule(int max_p, std::int64_t max_next_start) {
  const std::string name = "period-schedule";
  if (max_p < 0 || max_next_start < 4) return fail(name, "bad scale parameters");

  std::int64_t periods = 0;
  for (int p = 0; p <= max_p; ++p) {
    const std::int64_t chunk = std::int64_t{1} << p;
    const std::int64_t q0 = std::int64_t(p) * chunk;
    if (sched::period_start(p, q0) != chunk) {
      return fail(name, "first valid period must start at 2^p (p=" + std::to_string(p) + ")");
    }
    std::int64_t prev = sched::period_start(p, q0);
    for (std::int64_t q = q0 + 1;; ++q) {
      const std::int64_t start = sched::period_start(p, q);
      const std::int64_t diff = start - prev;
      const std::int64_t k_prev = (q - 1) >> p;
      if (diff != (std::int64_t{1} << (k_prev - p))) {
        return fail(name, "period length is not the closed-form power of two");
      }
      if ((diff & (diff - 1)) != 0) return fail(name, "period length not a power of two");
      if (diff * (chunk * 2) < start) {
        return fail(name, "length below 2^(-p-1) times the next start");
      }
      if (diff * chunk > prev) {
        return fail(name, "length above 2^(-p) times the period start");
      }
      if (sched::period_of(p, prev) != q - 1 || sched::period_of(p, start) != q) {
        return fail(name, "period_of disagrees at a period start");
      }
      ++periods;
      prev = start;
      if (start > max_next_start) break;
    }
  }

  // Every round maps to the period whose window contains it.
  for (int p = 0; p <= max_p; ++p) {
    std::int64_t q = std::int64_t(p) << p;
    std::int64_t next = sched::period_start(p, q + 1);
    for (std::int64_t t = std::int64_t{1} << p; t <= max_next_start; ++t) {
      if (t == next) {
        ++q;
        next = sched::period_start(p, q + 1);
      }
      if (sched::period_of(p, t) != q) {
        return fail(name, "period_of disagrees with the walked window");
      }
    }
  }

  if (sched::plan_seed_period(0) != 0 || sched::plan_seed_period(1) != 64) {
    return fail(name, "plan seed period formula changed");
  }
  if (sched::period_start(0, 0) != 1 || sched::period_start(1, 64) != (std::int64_t{1} << 32)) {
    return fail(name, "plan seed period does not start at 2^(32 p)");
  }
  return pass(name, std::to_string(periods) + " periods checked across depths 0.." +
                        std::to_string(max_p));
}

OracleOutcome oracle_expinf_schedule(std::int64_t max_t) {
  const std::string name = "expinf-schedule";
  if (max_t < 40) return fail(name, "needs max_t >= 40");

  const std::pair<std::int64_t, std::int64_t> frozen[] = {
      {1, 1}, {9, 2}, {10, 3}, {36, 3}, {37, 4}};
  for (const auto& [t, i] : frozen) {
    if (expinf_schedule::period_of(t) != i) {
      return fail(name, "frozen boundary value changed at t=" + std::to_string(t));
    }
  }

  std::int64_t i = 1, prev_cum = 0, cum = 1;
  for (std::int64_t t = 1; t <= max_t; ++t) {
    if (t > cum) {
      ++i;
      prev_cum = cum;
      cum += i * i * i;
      if (expinf_schedule::cumulative_cubes(i) != cum ||
          expinf_schedule::period_start(i) != prev_cum + 1 ||
          expinf_schedule::period_end(i) != cum ||
          expinf_schedule::period_length(i) != i * i * i) {
        return fail(name, "period window functions disagree at i=" + std::to_string(i));
      }
    }
    if (expinf_schedule::period_of(t) != i) {
      return fail(name, "period_of wrong at t=" + std::to_string(t));
    }
  }
  return pass(name, "all rounds t <= " + std::to_string(max_t) + " checked (" +
                        std::to_string(i) + " periods)");
}

OracleOutcome oracle_dedup_brute(int traces, std::int64_t length, std::uint64_t seed) {
  const std::string name = "dedup-brute";
  if (traces < 1 || length < 10) return fail(name, "bad scale parameters");

  const RngFactory root{seed};
  const std::int64_t caps[] = {1, 2, 3, 5};
  for (int idx = 0; idx < traces; ++idx) {
    RngStream stream = root.stream({0xD0, std::uint64_t(idx)});
    std::vector<std::int64_t> ids;
    ids.reserve(std::size_t(length));
    for (std::int64_t t = 1; t <= length; ++t) {
      const std::int64_t pick = stream.uniform_int(0, 9);
      if (pick < 5) {
        ids.push_back(stream.uniform_int(0, 4));
      } else if (pick < 8) {
        ids.push_back(stream.uniform_int(-3, 3));
      } else {
        ids.push_back(1000 + t);
      }
    }
    const Trace trace{ids};

    for (const std::int64_t cap : caps) {
      const auto lib = dedup_times(trace, cap);
      std::vector<std::int64_t> brute;
      for (std::int64_t t = 1; t <= length; ++t) {
        std::int64_t count = 0;
        for (std::int64_t u = 1; u <= t; ++u) {
          if (ids[std::size_t(u - 1)] == ids[std::size_t(t - 1)]) ++count;
        }
        if (count <= cap) brute.push_back(t);
      }
      if (lib != brute) {
        return fail(name, "dedup mismatch (trace " + std::to_string(idx) +
                              ", cap " + std::to_string(cap) + ")");
      }
    }

    const Partition partition = idx % 3 == 0   ? Partition::singleton()
                                : idx % 3 == 1 ? Partition::modulo(3)
                                               : Partition::modulo(2);
    InfrequentThresholds thresholds;
    thresholds.default_threshold = 1 + idx % 3;
    if (idx % 2 == 0) thresholds.per_cell[0] = 2;

    const double lib_mass = infrequent_mass(trace, partition, thresholds);
    std::int64_t infrequent = 0;
    std::map<std::int64_t, std::set<std::int64_t>> seen;
    for (std::int64_t t = 1; t <= length; ++t) {
      const std::int64_t id = ids[std::size_t(t - 1)];
      const std::int64_t cell = partition.cell(id);
      std::set<std::int64_t> distinct;
      for (std::int64_t u = 1; u < t; ++u) {
        const std::int64_t prev = ids[std::size_t(u - 1)];
        if (partition.cell(prev) == cell) distinct.insert(prev);
      }
      if (std::int64_t(distinct.size()) < thresholds.at(cell)) ++infrequent;
    }
    const double brute_mass = double(infrequent) / double(length);
    if (std::abs(lib_mass - brute_mass) > 1e-12) {
      return fail(name, fmt("infrequent mass mismatch: lib %.6f vs brute %.6f",
                            lib_mass, brute_mass));
    }

    const auto grid = geometric_grid(length);
    const auto curve = distinct_cell_curve(trace, partition, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::set<std::int64_t> cells;
      for (std::int64_t t = 1; t <= grid[g]; ++t) {
        cells.insert(partition.cell(ids[std::size_t(t - 1)]));
      }
      if (curve[g].cells != std::int64_t(cells.size()) ||
          std::abs(curve[g].ratio - double(cells.size()) / double(grid[g])) > 1e-12) {
        return fail(name, "distinct cell curve mismatch at a grid point");
      }
    }
  }
  return pass(name, std::to_string(traces) + " traces x " + std::to_string(length) +
                        " rounds against quadratic recount");
}

OracleOutcome oracle_policy_exhaustion() {
  const std::string name = "policy-exhaustion";

  const auto coverage = [](const std::vector<std::int64_t>& ids, int num_actions,
                           std::uint64_t bound, std::uint64_t& first_complete) {
    const PolicyFamily family{PolicySpace::finite(ids, num_actions)};
    std::set<std::vector<int>> seen;
    std::size_t total = 1;
    for (std::size_t i = 0; i < ids.size(); ++i) total *= std::size_t(num_actions);
    first_complete = 0;
    for (std::uint64_t idx = 1; idx <= bound; ++idx) {
      std::vector<int> assignment;
      assignment.reserve(ids.size());
      for (const std::int64_t id : ids) {
        assignment.push_back(family.evaluate(idx, ContextPoint{id, {}}));
      }
      seen.insert(std::move(assignment));
      if (seen.size() == total && first_complete == 0) first_complete = idx;
    }
    return seen.size() == total;
  };

  std::uint64_t complete2 = 0, complete3 = 0;
  if (!coverage({11, 42}, 2, 12, complete2)) {
    return fail(name, "2-context binary domain not exhausted within 12 indices");
  }
  if (!coverage({1, 2, 3}, 2, 24, complete3)) {
    return fail(name, "3-context binary domain not exhausted within 24 indices");
  }

  const PolicyFamily countable{PolicySpace::countable(3)};
  for (std::uint64_t l = 1; l <= 4; ++l) {
    for (std::int64_t id = 1; id <= 50; ++id) {
      if (countable.evaluate(l, ContextPoint{id, {}}) != 0) {
        return fail(name, "leading countable policies must play the default action");
      }
    }
  }
  for (std::uint64_t l = 1; l <= 17; ++l) {
    for (std::int64_t id = 5; id <= 60; ++id) {
      if (countable.evaluate(l, ContextPoint{id, {}}) != 0) {
        return fail(name, "countable policy below index 18 has support beyond 4");
      }
    }
  }
  return pass(name, "exhausted at indices " + std::to_string(complete2) + " and " +
                        std::to_string(complete3) + "; countable prefixes check out");
}

OracleOutcome oracle_sample_mean(std::uint64_t seed) {
  const std::string name = "sample-mean";
  const RngFactory root{seed};
  constexpr int kDraws = 20000;
  double worst_z = 0.0;

  const auto mc_check = [&](const Mechanism& mech, int action, const ContextPoint& x,
                            RngStream& stream, double spread) -> bool {
    const double mu = mech.mean(action, x);
    double total = 0.0;
    for (int i = 0; i < kDraws; ++i) total += mech.sample(action, x, stream).value;
    const double avg = total / double(kDraws);
    if (spread <= 0.0) return avg == mu;  // deterministic mechanisms match exactly
    const double se = spread / std::sqrt(double(kDraws));
    worst_z = std::max(worst_z, std::abs(avg - mu) / se);
    return std::abs(avg - mu) <= 4.0 * se;
  };
  const auto bernoulli_spread = [](double p) { return std::sqrt(p * (1.0 - p)); };

  {
    std::map<std::int64_t, std::vector<double>> means{{0, {0.3, 0.7}}, {1, {0.5, 0.9}}};
    const BernoulliTableMechanism mech(ActionSpace::finite(2), Partition::modulo(2), means);
    RngStream stream = root.stream({1});
    for (std::int64_t id = 0; id <= 1; ++id) {
      for (int a = 0; a < 2; ++a) {
        const ContextPoint x{id, {}};
        if (!mc_check(mech, a, x, stream, bernoulli_spread(mech.mean(a, x)))) {
          return fail(name, "bernoulli table average strayed past 4 SE");
        }
      }
    }
    if (!mech.bounded()) return fail(name, "bernoulli table must be bounded");
  }

  const ActionSpace line =
      ActionSpace::metric_candidates({{0.0}, {0.25}, {0.75}, {1.0}});
  {
    const NeedleMechanism mech(line, Partition::singleton(),
                               TargetMap::explicit_targets({{0, 2}}));
    RngStream stream = root.stream({2});
    const ContextPoint x{0, {}};
    for (int a = 0; a < 4; ++a) {
      if (!mc_check(mech, a, x, stream, 0.0)) {
        return fail(name, "needle samples must equal the indicator mean");
      }
    }
    if (mech.mean(2, x) != 1.0 || mech.mean(0, x) != 0.0) {
      return fail(name, "needle mean is not the target indicator");
    }
  }
  {
    const TentMechanism mech(line, Partition::singleton(),
                             TargetMap::explicit_targets({{0, 3}}), {0, 3});
    RngStream stream = root.stream({3});
    const ContextPoint x{0, {}};
    for (int a = 0; a < 4; ++a) {
      if (!mc_check(mech, a, x, stream, 0.0)) {
        return fail(name, "tent samples must equal the hat mean");
      }
    }
    if (mech.mean(3, x) != 1.0 || std::abs(mech.mean(2, x) - 0.5) > 1e-15 ||
        mech.mean(1, x) != 0.0 || mech.mean(0, x) != 0.0) {
      return fail(name, "tent mean profile is off");
    }
  }
  {
    const ZeroMeanUnboundedMechanism mech(line, Partition::singleton(),
                                          {{0, 2.5}}, std::nullopt, 0, 3);
    RngStream stream = root.stream({4});
    const ContextPoint x{0, {}};
    if (mech.bounded()) return fail(name, "two-point mechanism must be unbounded");
    for (int i = 0; i < 100; ++i) {
      if (mech.sample(0, x, stream).value != 2.5) {
        return fail(name, "zero-spread anchor must sample its magnitude exactly");
      }
    }
    for (int a = 1; a < 4; ++a) {
      const double s = std::min(line.distance(a, 0), line.distance(0, 3)) /
                       line.distance(0, 3);
      if (std::abs(mech.mean(a, x) - 2.5) > 1e-15) {
        return fail(name, "two-point mean must equal the magnitude at every action");
      }
      if (!mc_check(mech, a, x, stream, 2.5 * s)) {
        return fail(name, "two-point sample average strayed past 4 SE");
      }
    }
  }
  {
    const LipschitzUCMechanism mech(line, Partition::singleton(),
                                    TargetMap::explicit_targets({{0, 3}}), 2.0);
    RngStream stream = root.stream({5});
    const ContextPoint x{0, {}};
    for (int a = 0; a < 4; ++a) {
      if (!mc_check(mech, a, x, stream, bernoulli_spread(mech.mean(a, x)))) {
        return fail(name, "lipschitz sample average strayed past 4 SE");
      }
    }
    if (std::abs(mech.mean(2, x) - 0.5) > 1e-15) {
      return fail(name, "lipschitz mean slope is off");
    }
  }
  return pass(name, fmt("max |z| = %.3f across stochastic checks", worst_z));
}

std::vector<std::string> oracle_scenarios() {
  return {"ht-estimator-strat0", "period-schedule", "expinf-schedule",
          "dedup-brute",         "policy-exhaustion", "sample-mean"};
}

OracleOutcome run_oracle(const std::string& name) {
  if (name == "ht-estimator-strat0") return oracle_ht_estimator(20000, 4.0);
  if (name == "period-schedule") return oracle_period_schedule(6, std::int64_t{1} << 20);
  if (name == "expinf-schedule") return oracle_expinf_schedule(200000);
  if (name == "dedup-brute") return oracle_dedup_brute(20, 150, 0xDEDull);
  if (name == "policy-exhaustion") return oracle_policy_exhaustion();
  if (name == "sample-mean") return oracle_sample_mean(0x5EEDull);
  throw std::invalid_argument("unknown oracle scenario: " + name);
}

}  // namespace ocb
