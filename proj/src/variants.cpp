#include "ocb/variants.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ocb {

namespace {

double diameter(const ActionSpace& candidates) {
  double d = 0.0;
  for (int i = 0; i < candidates.size(); ++i) {
    for (int j = i + 1; j < candidates.size(); ++j) {
      d = std::max(d, candidates.distance(i, j));
    }
  }
  return d;
}

double net_cost(int n) { return n <= 1 ? 0.0 : n * std::log(double(n)); }

}  // namespace

NetParams covering_net(const ActionSpace& candidates, int category,
                       std::optional<double> delta_override) {
  if (candidates.kind() != ActionSpaceKind::metric_candidates) {
    throw std::invalid_argument("covering_net: needs metric candidates");
  }
  if (category < 0) throw std::invalid_argument("covering_net: category < 0");
  auto dist = [&](int i, int j) { return candidates.distance(i, j); };
  if (delta_override) {
    if (*delta_override <= 0.0) {
      throw std::invalid_argument("covering_net: delta override must be > 0");
    }
    return NetParams{*delta_override,
                     greedy_net(candidates.size(), *delta_override, dist)};
  }
  const double budget = std::pow(2.0, category / 4.0);
  // Coarsest power of two >= diameter; net size is 1 there, cost 0 <= budget.
  int exponent = 0;
  const double diam = diameter(candidates);
  while (std::ldexp(1.0, exponent) < diam) ++exponent;
  NetParams best{std::ldexp(1.0, exponent),
                 greedy_net(candidates.size(), std::ldexp(1.0, exponent), dist)};
  for (int e = exponent; e >= exponent - 80; --e) {
    const double delta = std::ldexp(1.0, e);
    auto net = greedy_net(candidates.size(), delta, dist);
    if (net_cost(int(net.size())) > budget) break;
    best = NetParams{delta, std::move(net)};
    if (int(best.net.size()) == candidates.size()) break;
  }
  return best;
}

double covering_accuracy(int category, int net_size) {
  if (net_size < 1) throw std::invalid_argument("covering_accuracy: empty net");
  const double n = double(net_size);
  return 2.0 * std::sqrt(n * std::max(std::log(n), 0.0)) /
         std::pow(2.0, category / 4.0);
}

std::unique_ptr<UniversalFiniteRule> make_uc_net_rule(
    const ActionSpace& candidates, PolicySpace policy_space,
    std::optional<double> delta_override, RngFactory rng) {
  if (candidates.kind() != ActionSpaceKind::metric_candidates) {
    throw std::invalid_argument("uc_net_rule: needs metric candidates");
  }
  UniversalOptions opts;
  opts.num_actions = candidates.size();
  opts.policy_space = std::move(policy_space);
  opts.label = "uc_net_rule";
  ActionSpace cands = candidates;
  std::optional<double> over = delta_override;
  opts.category_arms = [cands, over](int category) {
    return covering_net(cands, category, over).net;
  };
  return std::make_unique<UniversalFiniteRule>(std::move(opts), std::move(rng));
}

PolicyExpInfRule::PolicyExpInfRule(PolicySpace space, RngFactory rng,
                                   std::string label)
    : family_(std::move(space)),
      core_(rng, 0x706f6c),
      label_(std::move(label)) {}

int PolicyExpInfRule::do_select(const ContextPoint& x, std::int64_t) {
  const int expert = core_.select_expert();
  const int action = family_.evaluate(std::uint64_t(expert) + 1, x);
  if (action < 0 || action >= family_.space().num_actions) {
    throw std::logic_error("policy rule: action out of range");
  }
  return action;
}

void PolicyExpInfRule::do_feed(const RewardSample& reward) {
  if (!reward.bounded) {
    throw std::invalid_argument(label_ + ": needs rewards in [0,1]");
  }
  core_.update(reward.value);
}

PerContextExpInfRule::PerContextExpInfRule(int num_actions, double fixed_bound,
                                           RngFactory rng)
    : num_actions_(num_actions), fixed_bound_(fixed_bound), rng_(rng) {
  if (num_actions < 1) {
    throw std::invalid_argument("unbounded_rule: needs >= 1 action");
  }
}

int PerContextExpInfRule::do_select(const ContextPoint& x, std::int64_t) {
  auto it = cells_.find(x.id);
  if (it == cells_.end()) {
    it = cells_
             .emplace(x.id,
                      Cell{ExpInf(rng_, std::uint64_t(x.id)), 1.0, 0.0})
             .first;
  }
  pending_cell_ = &it->second;
  const int expert = it->second.core.select_expert();
  return expert % num_actions_;
}

void PerContextExpInfRule::do_feed(const RewardSample& reward) {
  if (pending_cell_ == nullptr) {
    throw std::logic_error("unbounded_rule: feed without select");
  }
  Cell& cell = *pending_cell_;
  pending_cell_ = nullptr;
  const double raw = reward.value;
  double scaled = 0.0;
  if (fixed_bound_ > 0.0) {
    if (raw > fixed_bound_ * (1.0 + 1e-12)) {
      throw std::invalid_argument("unbounded_rule: reward exceeds bound");
    }
    scaled = std::min(1.0, raw / fixed_bound_);
  } else {
    cell.pending_peak = std::max(cell.pending_peak, raw);
    scaled = std::min(1.0, raw / cell.scale);
    // Rescale only when this context's schedule is about to restart, so a
    // period never mixes scales.
    const std::int64_t done = cell.core.round();
    if (expinf_schedule::period_of(done + 1) != cell.core.period()) {
      cell.scale = std::max(cell.scale, cell.pending_peak);
    }
  }
  cell.core.update(scaled);
}

}  // namespace ocb
