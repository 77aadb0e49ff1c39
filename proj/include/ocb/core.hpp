#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocb {

// A context observation. Identity is the stable integer id; coords are
// optional embedding coordinates carried for diagnostics.
struct ContextPoint {
  std::int64_t id = 0;
  std::vector<double> coords;
};

enum class ActionSpaceKind { finite, countable_prefix, metric_candidates };

// The action universe a run works over. Actions are referred to by index
// (0-based). Metric candidate spaces carry coordinates and expose pairwise
// Euclidean distances; pairwise distinctness is checked at construction.
class ActionSpace {
 public:
  static ActionSpace finite(int size);
  static ActionSpace countable_prefix(int materialized_size);
  static ActionSpace metric_candidates(std::vector<std::vector<double>> coords);

  ActionSpaceKind kind() const { return kind_; }
  int size() const { return size_; }
  bool metric() const { return kind_ == ActionSpaceKind::metric_candidates; }
  double distance(int a, int b) const;
  const std::vector<double>& coords_of(int a) const;

 private:
  ActionSpace() = default;
  ActionSpaceKind kind_ = ActionSpaceKind::finite;
  int size_ = 0;
  std::vector<std::vector<double>> coords_;
};

// One observed reward. Bounded samples live in [0, 1]; unbounded samples are
// nonnegative reals.
struct RewardSample {
  double value = 0.0;
  bool bounded = true;

  RewardSample() = default;
  RewardSample(double v, bool b) : value(v), bounded(b) {
    if (bounded) {
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("RewardSample: bounded value outside [0,1]");
    } else if (!(v >= 0.0)) {
      throw std::invalid_argument("RewardSample: unbounded value negative");
    }
  }
};

// Per-round metadata a learning rule can expose for tracing. Fields are -1
// (or "flat") when the rule has no such notion.
struct RoundMeta {
  int category = -1;
  std::int64_t period = -1;
  int purpose = -1;
  int strategy = -1;
  std::string regime = "flat";
};

struct RoundTypeCounts {
  std::int64_t initial = 0;
  std::int64_t explore0 = 0;
  std::int64_t explore1 = 0;
  std::int64_t exploit_strat0 = 0;
  std::int64_t exploit_strat1 = 0;
  std::int64_t flat = 0;

  std::int64_t total() const {
    return initial + explore0 + explore1 + exploit_strat0 + exploit_strat1 + flat;
  }
};

// Online learning rule contract. Rounds are t = 1, 2, ...; each select(x, t)
// must be followed by exactly one feed(reward) before the next select.
class Learner {
 public:
  virtual ~Learner() = default;

  int select(const ContextPoint& x, std::int64_t t) {
    if (awaiting_feed_) throw std::logic_error("Learner: select called twice without feed");
    if (t != next_t_) throw std::invalid_argument("Learner: rounds must advance t = 1, 2, ...");
    const int action = do_select(x, t);
    awaiting_feed_ = true;
    return action;
  }

  void feed(const RewardSample& reward) {
    if (!awaiting_feed_) throw std::logic_error("Learner: feed without a pending select");
    do_feed(reward);
    awaiting_feed_ = false;
    ++next_t_;
  }

  virtual std::string name() const = 0;
  virtual RoundMeta last_meta() const { return RoundMeta{}; }

 protected:
  virtual int do_select(const ContextPoint& x, std::int64_t t) = 0;
  virtual void do_feed(const RewardSample& reward) = 0;

 private:
  bool awaiting_feed_ = false;
  std::int64_t next_t_ = 1;
};

// Index of the maximal value; ties broken by the smallest id. Returns the id.
std::int64_t lex_argmax(const std::vector<double>& values,
                        const std::vector<std::int64_t>& ids);

// Greedy covering net: scan points in input order, keep a point iff its
// distance to every kept point exceeds delta. Returns kept indices.
std::vector<int> greedy_net(int count, double delta,
                            const std::function<double(int, int)>& distance);

}  // namespace ocb
