#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ocb/bandits.hpp"
#include "ocb/core.hpp"
#include "ocb/policy_net.hpp"
#include "ocb/rng.hpp"
#include "ocb/schedule.hpp"

namespace ocb {

// First-occurrence exploration probability p_t = 1 / (2 t^(1/4)).
double exploration_probability(std::int64_t t);
// Inverse-propensity estimator increments.
double explore0_increment(double reward, double p_first);
double explore1_increment(int policy_count, double p_first, double reward);
// Strategy comparison margin eta_p = 10 sqrt(n ln n) / 2^(p/4) for the
// category's strategy-0 arm count n.
double strategy_margin(int category, int arm_count);

struct UniversalOptions {
  int num_actions = 0;
  PolicySpace policy_space;
  // Optional per-category restriction of the strategy-0 arm set (indices
  // into the action universe); empty means all actions at every category.
  std::function<std::vector<int>(int)> category_arms;
  // Reported rule name; variants reusing this machinery override it.
  std::string label = "universal_finite";
};

// Contextual rule for finite action sets that splits rounds by duplicate
// depth (category p), runs per-instance bandits inside doubling periods, and
// uses inverse-propensity estimates to switch each depth between
// per-instance learning (strategy 0) and a dense finite-support policy
// family (strategy 1).
class UniversalFiniteRule final : public Learner {
 public:
  UniversalFiniteRule(UniversalOptions options, RngFactory rng);

  std::string name() const override { return options_.label; }
  RoundMeta last_meta() const override { return meta_; }

  const RoundTypeCounts& counts() const { return counts_; }
  const PolicyFamily& family() const { return family_; }

  // Planned strategy for period (p, q); nullopt when not (yet) defined.
  std::optional<int> planned_strategy(int category, std::int64_t period) const;

  // Final estimator values of the most recently completed period, kept for
  // diagnostics after the period's working state is dropped.
  struct FiredPeriod {
    int category = -1;
    std::int64_t period = -1;
    int chosen_strategy = -1;
    double estimate_strat0 = 0.0;
    std::vector<double> estimate_policies;
  };
  const std::optional<FiredPeriod>& last_fired_period() const { return last_fired_; }

  struct StateFootprint {
    std::size_t purpose_groups = 0;
    std::size_t strat0_groups = 0;
    std::size_t strat1_groups = 0;
    std::size_t estimator_groups = 0;
    std::size_t plan_entries = 0;
    std::size_t initial_learners = 0;
  };
  StateFootprint footprint() const;

 private:
  enum class PendingKind { none, initial, explore0, explore1, exploit0, exploit1 };
  struct PurposeMemo {
    int purpose = 2;
    double p_first = 0.0;
  };
  struct Estimators {
    double strat0 = 0.0;
    std::vector<double> policies;  // sized to the period's policy count on first touch
  };
  using PeriodKey = std::pair<int, std::int64_t>;

  int do_select(const ContextPoint& x, std::int64_t t) override;
  void do_feed(const RewardSample& reward) override;

  const std::vector<int>& arms_for(int category);
  int select_strat0_arm(int category, std::int64_t period, std::int64_t ctx,
                        PendingKind kind);
  int plan_value(int category, std::int64_t period) const;
  void plan_put(int category, std::int64_t period, int strategy);
  void run_select_strategy(int category, std::int64_t period);
  void fire_period_boundaries(std::int64_t t);
  int checked_policy_action(std::uint64_t policy, const ContextPoint& x) const;

  UniversalOptions options_;
  PolicyFamily family_;
  RngFactory rng_;
  RngStream purpose_stream_;
  RngStream policy_pick_stream_;

  std::unordered_map<std::int64_t, std::int64_t> occurrences_;
  std::vector<std::vector<int>> arms_cache_;
  std::map<PeriodKey, std::unordered_map<std::int64_t, PurposeMemo>> purposes_;
  std::map<PeriodKey, std::unordered_map<std::int64_t, Exp3>> strat0_;
  std::map<PeriodKey, Exp3Ix> strat1_;
  std::map<PeriodKey, Estimators> estimators_;
  std::map<PeriodKey, int> plan_;
  std::map<std::pair<int, std::int64_t>, Exp3> initial_;

  struct Pending {
    PendingKind kind = PendingKind::none;
    int category = -1;
    std::int64_t period = -1;
    std::int64_t ctx = 0;
    int arm = -1;
    int policy_count = 0;
    std::uint64_t policy = 0;
    double p_first = 0.0;
    std::int64_t t = 0;
  };
  Pending pending_;
  RoundMeta meta_;
  RoundTypeCounts counts_;
  std::optional<FiredPeriod> last_fired_;
};

}  // namespace ocb
