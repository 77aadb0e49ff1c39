#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocb/core.hpp"
#include "ocb/processes.hpp"
#include "ocb/rng.hpp"

namespace ocb {

// Per-cell target actions: either an explicit cell -> action table or a
// seeded hash over a pool of `pool` choices (stable across runs, independent
// of every learner and sampling stream).
class TargetMap {
 public:
  static TargetMap explicit_targets(std::map<std::int64_t, int> targets);
  static TargetMap hashed(std::uint64_t seed, int pool);

  // Explicit mode returns the tabled action (missing cell is an error);
  // hashed mode returns an index in [0, pool).
  int at(std::int64_t cell) const;
  bool hashed_mode() const { return hashed_; }
  int pool() const { return pool_; }
  const std::map<std::int64_t, int>& table() const { return table_; }

 private:
  TargetMap() = default;
  bool hashed_ = false;
  std::uint64_t seed_ = 0;
  int pool_ = 0;
  std::map<std::int64_t, int> table_;
};

// Conditional reward law r | (a, x): exact mean oracle plus i.i.d. sampling.
// Mechanisms are immutable; sampling draws only from the caller's stream.
class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual double mean(int action, const ContextPoint& x) const = 0;
  virtual RewardSample sample(int action, const ContextPoint& x, RngStream& rng) const = 0;
  virtual bool bounded() const = 0;
  virtual std::string kind() const = 0;
  virtual int num_actions() const = 0;
};

// Finite table of Bernoulli means per (cell, action).
class BernoulliTableMechanism final : public Mechanism {
 public:
  BernoulliTableMechanism(ActionSpace actions, Partition cells,
                          std::map<std::int64_t, std::vector<double>> means);
  double mean(int action, const ContextPoint& x) const override;
  RewardSample sample(int action, const ContextPoint& x, RngStream& rng) const override;
  bool bounded() const override { return true; }
  std::string kind() const override { return "bernoulli_table"; }
  int num_actions() const override { return actions_.size(); }

 private:
  ActionSpace actions_;
  Partition cells_;
  std::map<std::int64_t, std::vector<double>> means_;
};

// Deterministic indicator reward: 1 exactly on the cell's target action.
class NeedleMechanism final : public Mechanism {
 public:
  NeedleMechanism(ActionSpace actions, Partition cells, TargetMap targets);
  double mean(int action, const ContextPoint& x) const override;
  RewardSample sample(int action, const ContextPoint& x, RngStream& rng) const override;
  bool bounded() const override { return true; }
  std::string kind() const override { return "needle"; }
  int num_actions() const override { return actions_.size(); }
  int target(std::int64_t cell) const;

 private:
  ActionSpace actions_;
  Partition cells_;
  TargetMap targets_;
};

// Deterministic tent of unit height over a metric candidate list: the mean
// peaks at 1 on the cell's target and falls off linearly, hitting 0 at half
// the minimum pairwise distance of the shared needle set, so tents centered
// on distinct needle points never overlap.
class TentMechanism final : public Mechanism {
 public:
  TentMechanism(ActionSpace actions, Partition cells, TargetMap targets,
                std::vector<int> needle_set);
  double mean(int action, const ContextPoint& x) const override;
  RewardSample sample(int action, const ContextPoint& x, RngStream& rng) const override;
  bool bounded() const override { return true; }
  std::string kind() const override { return "tent"; }
  int num_actions() const override { return actions_.size(); }
  int target(std::int64_t cell) const;
  double width() const { return width_; }

 private:
  ActionSpace actions_;
  Partition cells_;
  TargetMap targets_;
  std::vector<int> needle_set_;
  double width_ = 0.0;
};

// Symmetric two-point law M_i (1 +- s(a)) with s(a) =
// min(d(a, anchor0), d(anchor0, anchor1)) / d(anchor0, anchor1), each sign
// with probability 1/2. The shift term has mean zero, so the exact mean is
// the cell magnitude M_i at every action; at anchor0 the reward is
// deterministically M_i.
class ZeroMeanUnboundedMechanism final : public Mechanism {
 public:
  ZeroMeanUnboundedMechanism(ActionSpace actions, Partition cells,
                             std::map<std::int64_t, double> magnitudes,
                             std::optional<double> default_magnitude, int anchor0,
                             int anchor1);
  double mean(int action, const ContextPoint& x) const override;
  RewardSample sample(int action, const ContextPoint& x, RngStream& rng) const override;
  bool bounded() const override { return false; }
  std::string kind() const override { return "zero_mean_unbounded"; }
  int num_actions() const override { return actions_.size(); }

  // M_1 = 2 T_1, M_{i+1} = 2 T_{i+1} + 4 T_{i+1} sum_{j<=i} M_j; throws
  // overflow_error once values leave the finite double range.
  static std::vector<double> magnitude_recursion(const std::vector<double>& t_sequence);

 private:
  double magnitude(std::int64_t cell) const;
  double shift(int action) const;

  ActionSpace actions_;
  Partition cells_;
  std::map<std::int64_t, double> magnitudes_;
  std::optional<double> default_magnitude_;
  int anchor0_;
  int anchor1_;
  double anchor_gap_;
};

// Bernoulli rewards whose mean max(0, 1 - L d(a, target)) is L-Lipschitz in
// the action over a metric candidate list.
class LipschitzUCMechanism final : public Mechanism {
 public:
  LipschitzUCMechanism(ActionSpace actions, Partition cells, TargetMap targets,
                       double modulus);
  double mean(int action, const ContextPoint& x) const override;
  RewardSample sample(int action, const ContextPoint& x, RngStream& rng) const override;
  bool bounded() const override { return true; }
  std::string kind() const override { return "lipschitz_uc"; }
  int num_actions() const override { return actions_.size(); }
  int target(std::int64_t cell) const;

 private:
  ActionSpace actions_;
  Partition cells_;
  TargetMap targets_;
  double modulus_;
};

// Best action per context under the exact mean oracle, ties to the smaller
// action index.
std::vector<int> optimal_policy(const Mechanism& mech,
                                const std::vector<ContextPoint>& contexts,
                                int num_actions);

}  // namespace ocb
