#include "ocb/policy_net.hpp"

#include <stdexcept>

namespace ocb {
namespace {

constexpr std::uint64_t kSaturate = std::uint64_t{1} << 62;

// m^s with saturation; indices handled by the enumeration stay far below
// the saturation point, so a saturated count only means "not this level yet".
std::uint64_t pow_saturating(std::uint64_t m, std::int64_t s) {
  std::uint64_t acc = 1;
  for (std::int64_t i = 0; i < s; ++i) {
    if (acc > kSaturate / m) return kSaturate;
    acc *= m;
  }
  return acc;
}

}  // namespace

PolicySpace PolicySpace::finite(std::vector<std::int64_t> ids, int num_actions) {
  if (ids.empty()) throw std::invalid_argument("PolicySpace::finite: empty context list");
  if (num_actions < 1) throw std::invalid_argument("PolicySpace: num_actions must be >= 1");
  PolicySpace s;
  s.countable_contexts = false;
  s.context_ids = std::move(ids);
  s.num_actions = num_actions;
  return s;
}

PolicySpace PolicySpace::countable(int num_actions) {
  if (num_actions < 1) throw std::invalid_argument("PolicySpace: num_actions must be >= 1");
  PolicySpace s;
  s.countable_contexts = true;
  s.num_actions = num_actions;
  return s;
}

PolicyFamily::PolicyFamily(PolicySpace space) : space_(std::move(space)) {
  if (!space_.countable_contexts) {
    for (std::size_t i = 0; i < space_.context_ids.size(); ++i) {
      const auto [it, fresh] =
          finite_positions_.emplace(space_.context_ids[i], static_cast<std::int64_t>(i) + 1);
      (void)it;
      if (!fresh) throw std::invalid_argument("PolicyFamily: duplicate context id");
    }
    // Finite domain and finite action prefix: the code table is finite, so
    // indices beyond it wrap around to keep the enumeration total.
    std::uint64_t total = 0;
    const auto n = static_cast<std::int64_t>(space_.context_ids.size());
    for (std::int64_t s = 0; s <= n; ++s) {
      for (std::int64_t m = 1; m <= space_.num_actions; ++m) {
        const std::uint64_t c = pow_saturating(static_cast<std::uint64_t>(m), s);
        if (c >= kSaturate - total) {
          total = kSaturate;
          break;
        }
        total += c;
      }
      if (total == kSaturate) break;
    }
    total_codes_ = total;
  }
}

PolicyCode PolicyFamily::decode(std::uint64_t index) const {
  if (index < 1) throw std::invalid_argument("PolicyFamily::decode: index must be >= 1");
  std::uint64_t offset = index - 1;
  if (total_codes_ > 0 && total_codes_ < kSaturate) offset %= total_codes_;

  const std::int64_t max_support = space_.countable_contexts
                                       ? std::int64_t{1} << 40
                                       : static_cast<std::int64_t>(space_.context_ids.size());
  for (std::int64_t budget = 1;; ++budget) {
    if (budget > (std::int64_t{1} << 40))
      throw std::runtime_error("PolicyFamily::decode: index out of enumerable range");
    for (std::int64_t support = 0; support < budget; ++support) {
      if (support > max_support) break;
      const std::int64_t arity = budget - support;
      if (arity > space_.num_actions) continue;
      const std::uint64_t count = pow_saturating(static_cast<std::uint64_t>(arity), support);
      if (offset < count)
        return PolicyCode{support, arity, offset};
      offset -= count;
    }
  }
}

std::int64_t PolicyFamily::position_of(const ContextPoint& x) const {
  if (space_.countable_contexts) return x.id >= 1 ? x.id : 0;
  const auto it = finite_positions_.find(x.id);
  return it == finite_positions_.end() ? 0 : it->second;
}

int PolicyFamily::evaluate(std::uint64_t index, const ContextPoint& x) const {
  const PolicyCode code = decode(index);
  const std::int64_t pos = position_of(x);
  if (pos < 1 || pos > code.support) return 0;
  // Digit `pos` of the assignment in base `arity`; the first supported
  // context is the least significant digit.
  std::uint64_t digits = code.assignment;
  for (std::int64_t i = 1; i < pos; ++i) digits /= static_cast<std::uint64_t>(code.arity);
  return static_cast<int>(digits % static_cast<std::uint64_t>(code.arity));
}

double PolicyFamily::density_gap(const std::vector<ContextPoint>& trace,
                                 const std::vector<int>& target_actions,
                                 std::uint64_t n) const {
  if (trace.empty()) throw std::invalid_argument("density_gap: empty trace");
  if (trace.size() != target_actions.size())
    throw std::invalid_argument("density_gap: trace/target size mismatch");
  if (n < 1) throw std::invalid_argument("density_gap: need at least one policy");
  double best = 1.0;
  for (std::uint64_t l = 1; l <= n; ++l) {
    std::int64_t disagreements = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (evaluate(l, trace[i]) != target_actions[i]) ++disagreements;
    }
    const double gap = static_cast<double>(disagreements) / static_cast<double>(trace.size());
    if (gap < best) best = gap;
    if (best == 0.0) break;
  }
  return best;
}

}  // namespace ocb
