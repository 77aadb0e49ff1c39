#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ocb/core.hpp"

namespace ocb {

// Context/action domain a policy family is built over. Contexts are either
// an explicit ordered id list (finite domains) or the countable id sequence
// 1, 2, 3, ... (fresh-id and walk processes). Actions are the first
// num_actions entries of the run's action universe.
struct PolicySpace {
  bool countable_contexts = false;
  std::vector<std::int64_t> context_ids;  // used when countable_contexts is false
  int num_actions = 0;

  static PolicySpace finite(std::vector<std::int64_t> ids, int num_actions);
  static PolicySpace countable(int num_actions);
};

// Decoded shape of one enumerated policy: an assignment of actions from the
// first `arity` actions to the first `support` context ids, defaulting to
// action 0 elsewhere.
struct PolicyCode {
  std::int64_t support = 0;
  std::int64_t arity = 1;
  std::uint64_t assignment = 0;
};

// Deterministic enumeration of all finite-support policies, ordered by
// increasing support + arity budget, then by support, then by assignment
// code. Index 1 is the constant default-action policy. The enumeration is a
// total function of the index; on fully finite domains indices cycle through
// the finite code table.
class PolicyFamily {
 public:
  explicit PolicyFamily(PolicySpace space);

  const PolicySpace& space() const { return space_; }

  PolicyCode decode(std::uint64_t index) const;
  // Action index chosen by policy `index` on context x.
  int evaluate(std::uint64_t index, const ContextPoint& x) const;

  // Minimum over policy indices 1..n of the fraction of trace rounds where
  // the policy disagrees with the target action.
  double density_gap(const std::vector<ContextPoint>& trace,
                     const std::vector<int>& target_actions, std::uint64_t n) const;

 private:
  // Position (1-based) of x among the domain's context ordering, or 0 when
  // x is outside it.
  std::int64_t position_of(const ContextPoint& x) const;

  PolicySpace space_;
  std::unordered_map<std::int64_t, std::int64_t> finite_positions_;
  std::uint64_t total_codes_ = 0;  // 0 means unbounded (countable contexts)
};

}  // namespace ocb
