#include "ocb/core.hpp"

#include <cmath>

namespace ocb {

ActionSpace ActionSpace::finite(int size) {
  if (size < 2) throw std::invalid_argument("ActionSpace::finite: size must be >= 2");
  ActionSpace s;
  s.kind_ = ActionSpaceKind::finite;
  s.size_ = size;
  return s;
}

ActionSpace ActionSpace::countable_prefix(int materialized_size) {
  if (materialized_size < 1)
    throw std::invalid_argument("ActionSpace::countable_prefix: size must be >= 1");
  ActionSpace s;
  s.kind_ = ActionSpaceKind::countable_prefix;
  s.size_ = materialized_size;
  return s;
}

ActionSpace ActionSpace::metric_candidates(std::vector<std::vector<double>> coords) {
  if (coords.empty())
    throw std::invalid_argument("ActionSpace::metric_candidates: no candidates");
  const std::size_t dim = coords.front().size();
  if (dim == 0) throw std::invalid_argument("ActionSpace::metric_candidates: empty coords");
  for (const auto& c : coords) {
    if (c.size() != dim)
      throw std::invalid_argument("ActionSpace::metric_candidates: inconsistent dimensions");
    for (double v : c) {
      if (!std::isfinite(v))
        throw std::invalid_argument("ActionSpace::metric_candidates: non-finite coordinate");
    }
  }
  ActionSpace s;
  s.kind_ = ActionSpaceKind::metric_candidates;
  s.size_ = static_cast<int>(coords.size());
  s.coords_ = std::move(coords);
  // Exhaustive metric sanity check: distances symmetric, nonnegative, and
  // zero only on the diagonal (candidates must be pairwise distinct points).
  for (int a = 0; a < s.size_; ++a) {
    for (int b = a + 1; b < s.size_; ++b) {
      if (s.distance(a, b) <= 0.0)
        throw std::invalid_argument("ActionSpace::metric_candidates: duplicate candidate points");
    }
  }
  return s;
}

double ActionSpace::distance(int a, int b) const {
  if (kind_ != ActionSpaceKind::metric_candidates)
    throw std::logic_error("ActionSpace::distance: not a metric candidate space");
  if (a < 0 || a >= size_ || b < 0 || b >= size_)
    throw std::out_of_range("ActionSpace::distance: action index out of range");
  double sq = 0.0;
  for (std::size_t i = 0; i < coords_[a].size(); ++i) {
    const double d = coords_[a][i] - coords_[b][i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

const std::vector<double>& ActionSpace::coords_of(int a) const {
  if (kind_ != ActionSpaceKind::metric_candidates)
    throw std::logic_error("ActionSpace::coords_of: not a metric candidate space");
  if (a < 0 || a >= size_)
    throw std::out_of_range("ActionSpace::coords_of: action index out of range");
  return coords_[a];
}

std::int64_t lex_argmax(const std::vector<double>& values,
                        const std::vector<std::int64_t>& ids) {
  if (values.empty()) throw std::invalid_argument("lex_argmax: empty values");
  if (values.size() != ids.size())
    throw std::invalid_argument("lex_argmax: values/ids size mismatch");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best] ||
        (values[i] == values[best] && ids[i] < ids[best])) {
      best = i;
    }
  }
  return ids[best];
}

std::vector<int> greedy_net(int count, double delta,
                            const std::function<double(int, int)>& distance) {
  if (count < 0) throw std::invalid_argument("greedy_net: negative count");
  if (!(delta >= 0.0)) throw std::invalid_argument("greedy_net: delta must be >= 0");
  std::vector<int> kept;
  for (int i = 0; i < count; ++i) {
    bool covered = false;
    for (int j : kept) {
      if (distance(i, j) <= delta) {
        covered = true;
        break;
      }
    }
    if (!covered) kept.push_back(i);
  }
  return kept;
}

}  // namespace ocb
