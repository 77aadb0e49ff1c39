#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocb/core.hpp"
#include "ocb/rng.hpp"

namespace ocb {

// A recorded context sequence; ids[t-1] is the context id at round t.
struct Trace {
  std::vector<std::int64_t> ids;

  std::int64_t length() const { return static_cast<std::int64_t>(ids.size()); }
};

// Plain-text trace format: one "t id" pair per line, t consecutive from 1,
// '#' starts a comment line.
void write_trace(const Trace& trace, std::ostream& out);
Trace read_trace(std::istream& in);
void write_trace_file(const Trace& trace, const std::string& path);
Trace read_trace_file(const std::string& path);

// Context generator. next() emits the context for the following round; all
// randomness comes from the caller's stream so replays are exact.
class Process {
 public:
  virtual ~Process() = default;
  virtual ContextPoint next(RngStream& rng) = 0;
  virtual std::string kind() const = 0;
  // Ids the process can ever emit; empty means unbounded support.
  virtual std::vector<std::int64_t> support_ids() const = 0;
  bool finite_support() const { return !support_ids().empty(); }
};

// Iid draws over ids 0..n-1 with the given weights (normalized internally).
class IidFiniteProcess final : public Process {
 public:
  explicit IidFiniteProcess(std::vector<double> weights);
  ContextPoint next(RngStream& rng) override;
  std::string kind() const override { return "iid_finite"; }
  std::vector<std::int64_t> support_ids() const override;

 private:
  std::vector<double> probs_;
};

// Emits a never-before-seen id every round: 1, 2, 3, ...
class IidFreshProcess final : public Process {
 public:
  ContextPoint next(RngStream& rng) override;
  std::string kind() const override { return "iid_fresh"; }
  std::vector<std::int64_t> support_ids() const override { return {}; }

 private:
  std::int64_t t_ = 0;
};

// Finite-state chain over ids 0..n-1; the first emitted context is state 0,
// later rounds follow the row-stochastic transition matrix.
class MarkovChainProcess final : public Process {
 public:
  explicit MarkovChainProcess(std::vector<std::vector<double>> transition);
  ContextPoint next(RngStream& rng) override;
  std::string kind() const override { return "markov_chain"; }
  std::vector<std::int64_t> support_ids() const override;

 private:
  std::vector<std::vector<double>> rows_;
  std::int64_t state_ = 0;
  bool started_ = false;
};

// Finite-support process with an explicit id list, either iid with weights
// or deterministically cycling through the list.
class FiniteSupportProcess final : public Process {
 public:
  enum class Law { iid, cycle };
  FiniteSupportProcess(std::vector<std::int64_t> ids, std::vector<double> weights,
                       Law law);
  ContextPoint next(RngStream& rng) override;
  std::string kind() const override { return "finite_support_c3"; }
  std::vector<std::int64_t> support_ids() const override { return ids_; }

 private:
  std::vector<std::int64_t> ids_;
  std::vector<double> probs_;
  Law law_;
  std::size_t cursor_ = 0;
};

// Deterministic id sequence 1, 2, 3, ... (never repeats a context).
class DeterministicWalkProcess final : public Process {
 public:
  ContextPoint next(RngStream& rng) override;
  std::string kind() const override { return "deterministic_walk"; }
  std::vector<std::int64_t> support_ids() const override { return {}; }

 private:
  std::int64_t t_ = 0;
};

// Replays a recorded trace; reading past the end is an error.
class TraceProcess final : public Process {
 public:
  explicit TraceProcess(Trace trace);
  ContextPoint next(RngStream& rng) override;
  std::string kind() const override { return "trace"; }
  std::vector<std::int64_t> support_ids() const override;

 private:
  Trace trace_;
  std::size_t cursor_ = 0;
};

Trace generate_trace(Process& process, std::int64_t horizon, RngStream& rng);

// Grouping of context ids into cells.
class Partition {
 public:
  static Partition singleton();
  static Partition modulo(std::int64_t m);
  static Partition explicit_map(std::unordered_map<std::int64_t, std::int64_t> map);

  std::int64_t cell(std::int64_t id) const;
  const std::string& kind() const { return kind_; }

 private:
  Partition(std::string kind, std::int64_t m,
            std::unordered_map<std::int64_t, std::int64_t> map);

  std::string kind_;
  std::int64_t modulus_ = 0;
  std::unordered_map<std::int64_t, std::int64_t> map_;
};

// Rounds t whose context id has appeared at most max_repeats times in rounds
// 1..t (counting the occurrence at t itself); 1-based round indices.
std::vector<std::int64_t> dedup_times(const Trace& trace, std::int64_t max_repeats);

// Powers of two up to horizon, with horizon appended when not a power of two.
std::vector<std::int64_t> geometric_grid(std::int64_t horizon);

struct CellCurvePoint {
  std::int64_t horizon = 0;
  std::int64_t cells = 0;
  double ratio = 0.0;
};

// Distinct cells visited by rounds 1..g and the ratio cells/g per grid point.
std::vector<CellCurvePoint> distinct_cell_curve(const Trace& trace,
                                                const Partition& partition,
                                                const std::vector<std::int64_t>& grid);

// Max over horizons T' in `window` of the fraction of rounds 1..T' whose id
// lies in `ids`; a finite-horizon stand-in for the limit superior frequency.
double empirical_submeasure(const Trace& trace, const std::vector<std::int64_t>& ids,
                            const std::vector<std::int64_t>& window);

// Fraction of rounds 1..g whose id lies in `ids`, per grid point.
std::vector<double> indicator_average_curve(const Trace& trace,
                                            const std::vector<std::int64_t>& ids,
                                            const std::vector<std::int64_t>& grid);

// Per-cell distinct-context thresholds for the infrequent-cell statistic.
// A cell without an explicit entry falls back to the default; a cell with
// neither is an error.
struct InfrequentThresholds {
  std::optional<std::int64_t> default_threshold = 1;
  std::unordered_map<std::int64_t, std::int64_t> per_cell;

  std::int64_t at(std::int64_t cell) const;
};

// Fraction of rounds t in 1..T whose cell had seen strictly fewer distinct
// context ids than its threshold before round t (the id at t itself does not
// count). Single value at the final horizon.
double infrequent_mass(const Trace& trace, const Partition& partition,
                       const InfrequentThresholds& thresholds);

// The same statistic evaluated at each grid point (prefix averages).
std::vector<double> infrequent_mass_curve(const Trace& trace, const Partition& partition,
                                          const InfrequentThresholds& thresholds,
                                          const std::vector<std::int64_t>& grid);

}  // namespace ocb
