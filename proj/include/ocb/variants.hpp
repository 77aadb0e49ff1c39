#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>

#include "ocb/bandits.hpp"
#include "ocb/core.hpp"
#include "ocb/policy_net.hpp"
#include "ocb/rng.hpp"
#include "ocb/universal.hpp"

namespace ocb {

// Covering net for one category: the finest power-of-two radius delta whose
// greedy net n still satisfies n ln n <= 2^(p/4). The scan starts at the
// coarsest power of two covering the candidate diameter (net size 1, always
// affordable) and halves delta while the budget holds, stopping early once
// the net saturates at the full candidate list.
struct NetParams {
  double delta = 0.0;
  std::vector<int> net;
};

NetParams covering_net(const ActionSpace& candidates, int category,
                       std::optional<double> delta_override = std::nullopt);

// Accuracy guarantee of the category net: 2 sqrt(n ln n) / 2^(p/4).
double covering_accuracy(int category, int net_size);

// Universal rule over a metric candidate list with per-category strategy-0
// arm sets restricted to covering nets (margins recomputed from net sizes).
std::unique_ptr<UniversalFiniteRule> make_uc_net_rule(
    const ActionSpace& candidates, PolicySpace policy_space,
    std::optional<double> delta_override, RngFactory rng);

// Process-agnostic learner: one infinite-expert bandit whose expert l plays
// the l-th enumerated finite-support policy on the current context.
class PolicyExpInfRule final : public Learner {
 public:
  PolicyExpInfRule(PolicySpace space, RngFactory rng, std::string label);

  std::string name() const override { return label_; }

 private:
  int do_select(const ContextPoint& x, std::int64_t t) override;
  void do_feed(const RewardSample& reward) override;

  PolicyFamily family_;
  ExpInf core_;
  std::string label_;
};

// Learner for nonnegative (possibly unbounded) rewards: an independent
// infinite-expert bandit per distinct context, experts cycling through the
// action list, rewards rescaled into [0,1]. With a fixed bound B, rewards
// above B are config errors; in adaptive mode the scale is the running peak,
// applied only when the per-context schedule restarts a period.
class PerContextExpInfRule final : public Learner {
 public:
  // fixed_bound <= 0 selects adaptive scaling.
  PerContextExpInfRule(int num_actions, double fixed_bound, RngFactory rng);

  std::string name() const override { return "unbounded_rule"; }

 private:
  struct Cell {
    ExpInf core;
    double scale = 1.0;
    double pending_peak = 0.0;
  };

  int do_select(const ContextPoint& x, std::int64_t t) override;
  void do_feed(const RewardSample& reward) override;

  int num_actions_;
  double fixed_bound_;
  RngFactory rng_;
  std::unordered_map<std::int64_t, Cell> cells_;
  Cell* pending_cell_ = nullptr;
};

}  // namespace ocb
