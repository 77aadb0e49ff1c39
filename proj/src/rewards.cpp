#include "ocb/rewards.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ocb {

namespace {

void check_action(const ActionSpace& actions, int a) {
  if (a < 0) throw std::out_of_range("mechanism: negative action");
  if (actions.kind() == ActionSpaceKind::countable_prefix) return;
  if (a >= actions.size()) throw std::out_of_range("mechanism: action outside space");
}

void check_metric(const ActionSpace& actions, const char* what) {
  if (!actions.metric()) {
    throw std::invalid_argument(std::string(what) + ": needs metric candidates");
  }
}

}  // namespace

TargetMap TargetMap::explicit_targets(std::map<std::int64_t, int> targets) {
  if (targets.empty()) throw std::invalid_argument("targets: empty table");
  TargetMap m;
  m.table_ = std::move(targets);
  return m;
}

TargetMap TargetMap::hashed(std::uint64_t seed, int pool) {
  if (pool < 1) throw std::invalid_argument("targets: pool must be >= 1");
  TargetMap m;
  m.hashed_ = true;
  m.seed_ = seed;
  m.pool_ = pool;
  return m;
}

int TargetMap::at(std::int64_t cell) const {
  if (hashed_) {
    return int(splitmix64(seed_ ^ std::uint64_t(cell)) % std::uint64_t(pool_));
  }
  const auto it = table_.find(cell);
  if (it == table_.end()) {
    throw std::invalid_argument("targets: cell " + std::to_string(cell) +
                                " has no target");
  }
  return it->second;
}

BernoulliTableMechanism::BernoulliTableMechanism(
    ActionSpace actions, Partition cells,
    std::map<std::int64_t, std::vector<double>> means)
    : actions_(std::move(actions)), cells_(std::move(cells)), means_(std::move(means)) {
  if (means_.empty()) throw std::invalid_argument("bernoulli_table: empty mean table");
  for (const auto& [cell, row] : means_) {
    if (int(row.size()) != actions_.size()) {
      throw std::invalid_argument("bernoulli_table: cell " + std::to_string(cell) +
                                  " row length differs from action count");
    }
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bernoulli_table: means must lie in [0,1]");
      }
    }
  }
}

double BernoulliTableMechanism::mean(int action, const ContextPoint& x) const {
  check_action(actions_, action);
  const std::int64_t cell = cells_.cell(x.id);
  const auto it = means_.find(cell);
  if (it == means_.end()) {
    throw std::out_of_range("bernoulli_table: cell " + std::to_string(cell) +
                            " outside mean table");
  }
  if (action >= int(it->second.size())) {
    throw std::out_of_range("bernoulli_table: action outside mean table row");
  }
  return it->second[std::size_t(action)];
}

RewardSample BernoulliTableMechanism::sample(int action, const ContextPoint& x,
                                             RngStream& rng) const {
  return RewardSample{rng.bernoulli(mean(action, x)) ? 1.0 : 0.0, true};
}

NeedleMechanism::NeedleMechanism(ActionSpace actions, Partition cells, TargetMap targets)
    : actions_(std::move(actions)), cells_(std::move(cells)), targets_(std::move(targets)) {
  if (targets_.hashed_mode()) {
    if (actions_.kind() != ActionSpaceKind::countable_prefix &&
        targets_.pool() > actions_.size()) {
      throw std::invalid_argument("needle: target pool larger than action space");
    }
  } else {
    for (const auto& [cell, a] : targets_.table()) {
      (void)cell;
      check_action(actions_, a);
    }
  }
}

int NeedleMechanism::target(std::int64_t cell) const { return targets_.at(cell); }

double NeedleMechanism::mean(int action, const ContextPoint& x) const {
  check_action(actions_, action);
  return action == target(cells_.cell(x.id)) ? 1.0 : 0.0;
}

RewardSample NeedleMechanism::sample(int action, const ContextPoint& x,
                                     RngStream&) const {
  return RewardSample{mean(action, x), true};
}

TentMechanism::TentMechanism(ActionSpace actions, Partition cells, TargetMap targets,
                             std::vector<int> needle_set)
    : actions_(std::move(actions)),
      cells_(std::move(cells)),
      targets_(std::move(targets)),
      needle_set_(std::move(needle_set)) {
  check_metric(actions_, "tent");
  if (needle_set_.size() < 2) {
    throw std::invalid_argument("tent: needle set needs >= 2 actions");
  }
  for (int a : needle_set_) check_action(actions_, a);
  double eps = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < needle_set_.size(); ++i) {
    for (std::size_t j = i + 1; j < needle_set_.size(); ++j) {
      eps = std::min(eps, actions_.distance(needle_set_[i], needle_set_[j]));
    }
  }
  width_ = eps;
  if (!(width_ > 0.0)) throw std::invalid_argument("tent: needle set has repeated points");
  if (!targets_.hashed_mode()) {
    for (const auto& [cell, a] : targets_.table()) {
      bool member = false;
      for (int b : needle_set_) member = member || (a == b);
      if (!member) {
        throw std::invalid_argument("tent: target for cell " + std::to_string(cell) +
                                    " is not in the needle set");
      }
    }
  } else if (targets_.pool() != int(needle_set_.size())) {
    throw std::invalid_argument("tent: hashed target pool must equal needle set size");
  }
}

int TentMechanism::target(std::int64_t cell) const {
  const int raw = targets_.at(cell);
  return targets_.hashed_mode() ? needle_set_[std::size_t(raw)] : raw;
}

double TentMechanism::mean(int action, const ContextPoint& x) const {
  check_action(actions_, action);
  const double d = actions_.distance(action, target(cells_.cell(x.id)));
  return std::max(0.0, 1.0 - 2.0 * d / width_);
}

RewardSample TentMechanism::sample(int action, const ContextPoint& x,
                                   RngStream&) const {
  return RewardSample{mean(action, x), true};
}

ZeroMeanUnboundedMechanism::ZeroMeanUnboundedMechanism(
    ActionSpace actions, Partition cells, std::map<std::int64_t, double> magnitudes,
    std::optional<double> default_magnitude, int anchor0, int anchor1)
    : actions_(std::move(actions)),
      cells_(std::move(cells)),
      magnitudes_(std::move(magnitudes)),
      default_magnitude_(default_magnitude),
      anchor0_(anchor0),
      anchor1_(anchor1) {
  check_metric(actions_, "zero_mean_unbounded");
  check_action(actions_, anchor0_);
  check_action(actions_, anchor1_);
  if (anchor0_ == anchor1_) {
    throw std::invalid_argument("zero_mean_unbounded: anchors must differ");
  }
  anchor_gap_ = actions_.distance(anchor0_, anchor1_);
  auto check_mag = [](double m) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument("zero_mean_unbounded: magnitudes must be finite and >= 0");
    }
  };
  for (const auto& [cell, m] : magnitudes_) {
    (void)cell;
    check_mag(m);
  }
  if (default_magnitude_) check_mag(*default_magnitude_);
  if (magnitudes_.empty() && !default_magnitude_) {
    throw std::invalid_argument("zero_mean_unbounded: no magnitudes given");
  }
}

double ZeroMeanUnboundedMechanism::magnitude(std::int64_t cell) const {
  const auto it = magnitudes_.find(cell);
  if (it != magnitudes_.end()) return it->second;
  if (default_magnitude_) return *default_magnitude_;
  throw std::out_of_range("zero_mean_unbounded: cell " + std::to_string(cell) +
                          " has no magnitude");
}

double ZeroMeanUnboundedMechanism::shift(int action) const {
  return std::min(actions_.distance(action, anchor0_), anchor_gap_) / anchor_gap_;
}

double ZeroMeanUnboundedMechanism::mean(int action, const ContextPoint& x) const {
  check_action(actions_, action);
  return magnitude(cells_.cell(x.id));
}

RewardSample ZeroMeanUnboundedMechanism::sample(int action, const ContextPoint& x,
                                                RngStream& rng) const {
  check_action(actions_, action);
  const double m = magnitude(cells_.cell(x.id));
  const double s = shift(action);
  const double value = rng.bernoulli(0.5) ? m * (1.0 + s) : m * (1.0 - s);
  return RewardSample{value, false};
}

std::vector<double> ZeroMeanUnboundedMechanism::magnitude_recursion(
    const std::vector<double>& t_sequence) {
  std::vector<double> m;
  m.reserve(t_sequence.size());
  double running = 0.0;
  for (double t : t_sequence) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("magnitude_recursion: sequence must be finite and > 0");
    }
    const double next = m.empty() ? 2.0 * t : 2.0 * t + 4.0 * t * running;
    if (!std::isfinite(next)) {
      throw std::overflow_error("magnitude_recursion: magnitude exceeds double range");
    }
    m.push_back(next);
    running += next;
    if (!std::isfinite(running)) {
      throw std::overflow_error("magnitude_recursion: magnitude sum exceeds double range");
    }
  }
  return m;
}

LipschitzUCMechanism::LipschitzUCMechanism(ActionSpace actions, Partition cells,
                                           TargetMap targets, double modulus)
    : actions_(std::move(actions)),
      cells_(std::move(cells)),
      targets_(std::move(targets)),
      modulus_(modulus) {
  check_metric(actions_, "lipschitz_uc");
  if (!(modulus_ > 0.0) || !std::isfinite(modulus_)) {
    throw std::invalid_argument("lipschitz_uc: modulus must be finite and > 0");
  }
  if (targets_.hashed_mode()) {
    if (targets_.pool() > actions_.size()) {
      throw std::invalid_argument("lipschitz_uc: target pool larger than action space");
    }
  } else {
    for (const auto& [cell, a] : targets_.table()) {
      (void)cell;
      check_action(actions_, a);
    }
  }
}

int LipschitzUCMechanism::target(std::int64_t cell) const { return targets_.at(cell); }

double LipschitzUCMechanism::mean(int action, const ContextPoint& x) const {
  check_action(actions_, action);
  const double d = actions_.distance(action, target(cells_.cell(x.id)));
  return std::max(0.0, 1.0 - modulus_ * d);
}

RewardSample LipschitzUCMechanism::sample(int action, const ContextPoint& x,
                                          RngStream& rng) const {
  return RewardSample{rng.bernoulli(mean(action, x)) ? 1.0 : 0.0, true};
}

std::vector<int> optimal_policy(const Mechanism& mech,
                                const std::vector<ContextPoint>& contexts,
                                int num_actions) {
  if (num_actions < 1) throw std::invalid_argument("optimal_policy: needs >= 1 action");
  std::vector<std::int64_t> ids(static_cast<std::size_t>(num_actions));
  for (int a = 0; a < num_actions; ++a) ids[std::size_t(a)] = a;
  std::vector<int> table;
  table.reserve(contexts.size());
  for (const ContextPoint& x : contexts) {
    std::vector<double> means(static_cast<std::size_t>(num_actions));
    for (int a = 0; a < num_actions; ++a) means[std::size_t(a)] = mech.mean(a, x);
    table.push_back(int(lex_argmax(means, ids)));
  }
  return table;
}

}  // namespace ocb
