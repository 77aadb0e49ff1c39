#include "ocb/universal.hpp"

#include <cmath>
#include <stdexcept>

namespace ocb {

double exploration_probability(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("exploration_probability: t must be >= 1");
  return 0.5 / std::pow(static_cast<double>(t), 0.25);
}

double explore0_increment(double reward, double p_first) {
  if (!(p_first > 0.0)) throw std::invalid_argument("explore0_increment: bad probability");
  return reward / p_first;
}

double explore1_increment(int policy_count, double p_first, double reward) {
  if (policy_count < 1) throw std::invalid_argument("explore1_increment: no policies");
  if (!(p_first > 0.0)) throw std::invalid_argument("explore1_increment: bad probability");
  return static_cast<double>(policy_count) / p_first * reward;
}

double strategy_margin(int category, int arm_count) {
  if (category < 0 || arm_count < 1)
    throw std::invalid_argument("strategy_margin: bad arguments");
  const double n = static_cast<double>(arm_count);
  return 10.0 * std::sqrt(n * std::log(n)) /
         std::pow(2.0, static_cast<double>(category) / 4.0);
}

UniversalFiniteRule::UniversalFiniteRule(UniversalOptions options, RngFactory rng)
    : options_(std::move(options)),
      family_(options_.policy_space),
      rng_(rng),
      purpose_stream_(rng.stream({rtag::purpose})),
      policy_pick_stream_(rng.stream({rtag::policy_pick})) {
  if (options_.num_actions < 2)
    throw std::invalid_argument("UniversalFiniteRule: need at least 2 actions");
  if (options_.policy_space.num_actions != options_.num_actions)
    throw std::invalid_argument("UniversalFiniteRule: policy space action count mismatch");
}

const std::vector<int>& UniversalFiniteRule::arms_for(int category) {
  if (static_cast<std::size_t>(category) >= arms_cache_.size())
    arms_cache_.resize(category + 1);
  auto& arms = arms_cache_[category];
  if (arms.empty()) {
    if (options_.category_arms) {
      arms = options_.category_arms(category);
      if (arms.empty())
        throw std::logic_error("UniversalFiniteRule: empty category arm set");
      std::vector<bool> seen(options_.num_actions, false);
      for (int a : arms) {
        if (a < 0 || a >= options_.num_actions)
          throw std::logic_error("UniversalFiniteRule: category arm out of range");
        if (seen[a]) throw std::logic_error("UniversalFiniteRule: duplicate category arm");
        seen[a] = true;
      }
    } else {
      arms.resize(options_.num_actions);
      for (int a = 0; a < options_.num_actions; ++a) arms[a] = a;
    }
  }
  return arms;
}

int UniversalFiniteRule::checked_policy_action(std::uint64_t policy,
                                               const ContextPoint& x) const {
  const int action = family_.evaluate(policy, x);
  if (action < 0 || action >= options_.num_actions)
    throw std::logic_error("UniversalFiniteRule: policy produced an invalid action");
  return action;
}

int UniversalFiniteRule::select_strat0_arm(int category, std::int64_t period,
                                           std::int64_t ctx, PendingKind kind) {
  auto& learners = strat0_[{category, period}];
  auto it = learners.find(ctx);
  if (it == learners.end()) {
    const auto& arms = arms_for(category);
    it = learners
             .emplace(ctx, Exp3(static_cast<int>(arms.size()),
                                rng_.stream({rtag::strat0, static_cast<std::uint64_t>(category),
                                             static_cast<std::uint64_t>(period),
                                             static_cast<std::uint64_t>(ctx)})))
             .first;
  }
  const int arm = it->second.select();
  pending_.kind = kind;
  pending_.arm = arm;
  return arms_for(category)[arm];
}

int UniversalFiniteRule::plan_value(int category, std::int64_t period) const {
  const std::int64_t seed = sched::plan_seed_period(category);
  if (period == seed) return 0;
  if (period < seed)
    throw std::logic_error("UniversalFiniteRule: plan consulted below its seed period");
  const auto it = plan_.find({category, period});
  if (it == plan_.end())
    throw std::logic_error("UniversalFiniteRule: plan consulted before being defined");
  return it->second;
}

void UniversalFiniteRule::plan_put(int category, std::int64_t period, int strategy) {
  const auto [it, fresh] = plan_.emplace(PeriodKey{category, period}, strategy);
  (void)it;
  if (!fresh) throw std::logic_error("UniversalFiniteRule: plan overwrite");
}

std::optional<int> UniversalFiniteRule::planned_strategy(int category,
                                                         std::int64_t period) const {
  if (period == sched::plan_seed_period(category)) return 0;
  const auto it = plan_.find({category, period});
  if (it == plan_.end()) return std::nullopt;
  return it->second;
}

int UniversalFiniteRule::do_select(const ContextPoint& x, std::int64_t t) {
  const std::int64_t count = ++occurrences_[x.id];
  const int p = sched::category(count);

  meta_ = RoundMeta{};
  meta_.category = p;
  pending_ = Pending{};
  pending_.category = p;
  pending_.ctx = x.id;
  pending_.t = t;

  if (sched::in_initial_regime(p, t)) {
    meta_.regime = "initial";
    const std::pair<int, std::int64_t> key{p, x.id};
    auto it = initial_.find(key);
    if (it == initial_.end()) {
      const auto& arms = arms_for(p);
      it = initial_
               .emplace(key,
                        Exp3(static_cast<int>(arms.size()),
                             rng_.stream({rtag::strat0_initial, static_cast<std::uint64_t>(p),
                                          static_cast<std::uint64_t>(x.id)})))
               .first;
    }
    const int arm = it->second.select();
    pending_.kind = PendingKind::initial;
    pending_.arm = arm;
    return arms_for(p)[arm];
  }

  const std::int64_t q = sched::period_of(p, t);
  meta_.regime = "periodic";
  meta_.period = q;
  pending_.period = q;

  auto& memos = purposes_[{p, q}];
  auto memo_it = memos.find(x.id);
  if (memo_it == memos.end()) {
    const double pt = exploration_probability(t);
    const double u = purpose_stream_.uniform01();
    const int purpose = u <= pt ? 0 : (u <= 2.0 * pt ? 1 : 2);
    memo_it = memos.emplace(x.id, PurposeMemo{purpose, pt}).first;
  }
  const PurposeMemo memo = memo_it->second;
  meta_.purpose = memo.purpose;
  pending_.p_first = memo.p_first;

  if (memo.purpose == 0) return select_strat0_arm(p, q, x.id, PendingKind::explore0);

  if (memo.purpose == 1) {
    const int k = sched::floor_log2(t);
    pending_.kind = PendingKind::explore1;
    pending_.policy_count = k;
    if (k == 0) {
      // Round t = 1: no enumerated policies are available yet, so play the
      // first policy without an estimator contribution.
      pending_.policy = 1;
      return checked_policy_action(1, x);
    }
    const std::uint64_t policy =
        1 + static_cast<std::uint64_t>(policy_pick_stream_.uniform_int(0, k - 1));
    pending_.policy = policy;
    return checked_policy_action(policy, x);
  }

  const int strategy = plan_value(p, q);
  meta_.strategy = strategy;
  if (strategy == 0) return select_strat0_arm(p, q, x.id, PendingKind::exploit0);

  const int k = sched::floor_log2(sched::period_start(p, q));
  if (k < 1) throw std::logic_error("UniversalFiniteRule: strategy 1 with no policies");
  auto it = strat1_.find({p, q});
  if (it == strat1_.end()) {
    it = strat1_
             .emplace(PeriodKey{p, q},
                      Exp3Ix(k, rng_.stream({rtag::strat1_ix, static_cast<std::uint64_t>(p),
                                             static_cast<std::uint64_t>(q)})))
             .first;
  }
  const int expert = it->second.select();
  pending_.kind = PendingKind::exploit1;
  pending_.arm = expert;
  pending_.policy = static_cast<std::uint64_t>(expert) + 1;
  return checked_policy_action(pending_.policy, x);
}

void UniversalFiniteRule::do_feed(const RewardSample& reward) {
  if (!reward.bounded)
    throw std::invalid_argument("UniversalFiniteRule: rewards must be bounded in [0,1]");
  const double r = reward.value;
  const int p = pending_.category;
  const std::int64_t q = pending_.period;

  switch (pending_.kind) {
    case PendingKind::initial:
      initial_.at({p, pending_.ctx}).update(pending_.arm, r);
      ++counts_.initial;
      break;
    case PendingKind::explore0:
      strat0_.at({p, q}).at(pending_.ctx).update(pending_.arm, r);
      estimators_[{p, q}].strat0 += explore0_increment(r, pending_.p_first);
      ++counts_.explore0;
      break;
    case PendingKind::explore1:
      if (pending_.policy_count >= 1) {
        auto& est = estimators_[{p, q}];
        if (est.policies.size() < static_cast<std::size_t>(pending_.policy_count))
          est.policies.resize(pending_.policy_count, 0.0);
        est.policies[pending_.policy - 1] +=
            explore1_increment(pending_.policy_count, pending_.p_first, r);
      }
      ++counts_.explore1;
      break;
    case PendingKind::exploit0:
      strat0_.at({p, q}).at(pending_.ctx).update(pending_.arm, r);
      ++counts_.exploit_strat0;
      break;
    case PendingKind::exploit1:
      strat1_.at({p, q}).update(pending_.arm, r);
      ++counts_.exploit_strat1;
      break;
    case PendingKind::none:
      throw std::logic_error("UniversalFiniteRule: feed with no pending round");
  }

  fire_period_boundaries(pending_.t);
  pending_.kind = PendingKind::none;
}

void UniversalFiniteRule::fire_period_boundaries(std::int64_t t) {
  // Period (p, q) ends at t = period_start(p, q+1) - 1. The boundary t+1 is a
  // period start at depth p iff its low floor_log2(t+1) - p bits are zero, so
  // only depths in [k - trailing_zeros, k] can fire.
  const std::int64_t boundary = t + 1;
  const int k = sched::floor_log2(boundary);
  int trailing = 0;
  while (trailing < k && ((boundary >> trailing) & 1) == 0) ++trailing;
  for (int p = k - trailing; p <= k; ++p) {
    if (32 * static_cast<std::int64_t>(p) >= 63) break;  // seed period start beyond int64
    const std::int64_t q_next = sched::period_of(p, boundary);
    if (sched::period_start(p, q_next) != boundary)
      throw std::logic_error("UniversalFiniteRule: boundary arithmetic mismatch");
    const std::int64_t q = q_next - 1;
    if (q < sched::plan_seed_period(p)) continue;
    run_select_strategy(p, q);
    purposes_.erase({p, q});
    strat0_.erase({p, q});
    strat1_.erase({p, q});
    estimators_.erase({p, q});
  }
}

void UniversalFiniteRule::run_select_strategy(int p, std::int64_t q) {
  const int k = sched::floor_log2(sched::period_start(p, q));
  const auto est_it = estimators_.find({p, q});
  const double strat0_estimate = est_it == estimators_.end() ? 0.0 : est_it->second.strat0;

  double best_policy_estimate = 0.0;  // untouched estimators are zero
  if (est_it != estimators_.end()) {
    for (double v : est_it->second.policies)
      if (v > best_policy_estimate) best_policy_estimate = v;
  }

  FiredPeriod fired;
  fired.category = p;
  fired.period = q;
  fired.estimate_strat0 = strat0_estimate;
  fired.estimate_policies.assign(static_cast<std::size_t>(k), 0.0);
  if (est_it != estimators_.end()) {
    for (std::size_t l = 0; l < est_it->second.policies.size() && l < fired.estimate_policies.size(); ++l)
      fired.estimate_policies[l] = est_it->second.policies[l];
  }

  if (plan_.count({p, q + 1})) {
    fired.chosen_strategy = plan_.at({p, q + 1});
    last_fired_ = std::move(fired);
    return;
  }

  const double margin = strategy_margin(p, static_cast<int>(arms_for(p).size()));
  const std::int64_t length = sched::period_start(p, q + 1) - sched::period_start(p, q);
  const double strat0_lower = strat0_estimate - margin * static_cast<double>(length);
  const bool keep_strat0 = k < 1 || strat0_lower >= best_policy_estimate;

  if (keep_strat0) {
    const std::int64_t span = sched::strategy0_span(p);
    for (std::int64_t q2 = q + 1; q2 <= q + span; ++q2) plan_put(p, q2, 0);
    fired.chosen_strategy = 0;
  } else {
    plan_put(p, q + 1, 1);
    fired.chosen_strategy = 1;
  }
  last_fired_ = std::move(fired);
}

UniversalFiniteRule::StateFootprint UniversalFiniteRule::footprint() const {
  StateFootprint f;
  f.purpose_groups = purposes_.size();
  f.strat0_groups = strat0_.size();
  f.strat1_groups = strat1_.size();
  f.estimator_groups = estimators_.size();
  f.plan_entries = plan_.size();
  f.initial_learners = initial_.size();
  return f;
}

}  // namespace ocb
