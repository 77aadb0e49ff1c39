#include "ocb/processes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace ocb {

namespace {

std::vector<double> normalized(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("process weights: empty");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("process weights: entries must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("process weights: total must be > 0");
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace

void write_trace(const Trace& trace, std::ostream& out) {
  out << "# context trace, lines: round id\n";
  for (std::int64_t t = 1; t <= trace.length(); ++t) {
    out << t << ' ' << trace.ids[std::size_t(t - 1)] << '\n';
  }
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::int64_t expected = 1;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::int64_t t = 0, id = 0;
    if (!(row >> t >> id)) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                  ": expected two integers");
    }
    std::string extra;
    if (row >> extra) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                  ": trailing tokens");
    }
    if (t != expected) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                  ": rounds must be consecutive from 1");
    }
    trace.ids.push_back(id);
    ++expected;
  }
  return trace;
}

void write_trace_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  write_trace(trace, out);
  if (!out.good()) throw std::runtime_error("failed writing trace file: " + path);
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return read_trace(in);
}

IidFiniteProcess::IidFiniteProcess(std::vector<double> weights)
    : probs_(normalized(std::move(weights))) {}

ContextPoint IidFiniteProcess::next(RngStream& rng) {
  return ContextPoint{rng.sample_probs(probs_), {}};
}

std::vector<std::int64_t> IidFiniteProcess::support_ids() const {
  std::vector<std::int64_t> ids(probs_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::int64_t(i);
  return ids;
}

ContextPoint IidFreshProcess::next(RngStream&) { return ContextPoint{++t_, {}}; }

MarkovChainProcess::MarkovChainProcess(std::vector<std::vector<double>> transition)
    : rows_(std::move(transition)) {
  if (rows_.empty()) throw std::invalid_argument("markov chain: empty matrix");
  for (auto& row : rows_) {
    if (row.size() != rows_.size()) {
      throw std::invalid_argument("markov chain: matrix must be square");
    }
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("markov chain: entries must be finite and >= 0");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("markov chain: rows must sum to 1");
    }
  }
}

ContextPoint MarkovChainProcess::next(RngStream& rng) {
  if (!started_) {
    started_ = true;
    return ContextPoint{state_, {}};
  }
  state_ = rng.sample_probs(rows_[std::size_t(state_)]);
  return ContextPoint{state_, {}};
}

std::vector<std::int64_t> MarkovChainProcess::support_ids() const {
  std::vector<std::int64_t> ids(rows_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::int64_t(i);
  return ids;
}

FiniteSupportProcess::FiniteSupportProcess(std::vector<std::int64_t> ids,
                                           std::vector<double> weights, Law law)
    : ids_(std::move(ids)), law_(law) {
  if (ids_.empty()) throw std::invalid_argument("finite support: empty id list");
  std::unordered_set<std::int64_t> seen(ids_.begin(), ids_.end());
  if (seen.size() != ids_.size()) {
    throw std::invalid_argument("finite support: duplicate ids");
  }
  if (law_ == Law::iid) {
    if (weights.empty()) weights.assign(ids_.size(), 1.0);
    if (weights.size() != ids_.size()) {
      throw std::invalid_argument("finite support: weights length mismatch");
    }
    probs_ = normalized(std::move(weights));
  } else if (!weights.empty()) {
    throw std::invalid_argument("finite support: cycle law takes no weights");
  }
}

ContextPoint FiniteSupportProcess::next(RngStream& rng) {
  if (law_ == Law::iid) {
    return ContextPoint{ids_[std::size_t(rng.sample_probs(probs_))], {}};
  }
  const ContextPoint x{ids_[cursor_], {}};
  cursor_ = (cursor_ + 1) % ids_.size();
  return x;
}

ContextPoint DeterministicWalkProcess::next(RngStream&) {
  return ContextPoint{++t_, {}};
}

TraceProcess::TraceProcess(Trace trace) : trace_(std::move(trace)) {
  if (trace_.ids.empty()) throw std::invalid_argument("trace process: empty trace");
}

ContextPoint TraceProcess::next(RngStream&) {
  if (cursor_ >= trace_.ids.size()) {
    throw std::out_of_range("trace process: trace exhausted");
  }
  return ContextPoint{trace_.ids[cursor_++], {}};
}

std::vector<std::int64_t> TraceProcess::support_ids() const {
  std::set<std::int64_t> distinct(trace_.ids.begin(), trace_.ids.end());
  return std::vector<std::int64_t>(distinct.begin(), distinct.end());
}

Trace generate_trace(Process& process, std::int64_t horizon, RngStream& rng) {
  if (horizon < 1) throw std::invalid_argument("generate_trace: horizon must be >= 1");
  Trace trace;
  trace.ids.reserve(std::size_t(horizon));
  for (std::int64_t t = 0; t < horizon; ++t) trace.ids.push_back(process.next(rng).id);
  return trace;
}

Partition::Partition(std::string kind, std::int64_t m,
                     std::unordered_map<std::int64_t, std::int64_t> map)
    : kind_(std::move(kind)), modulus_(m), map_(std::move(map)) {}

Partition Partition::singleton() { return Partition("singleton", 0, {}); }

Partition Partition::modulo(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("partition: modulus must be >= 1");
  return Partition("mod", m, {});
}

Partition Partition::explicit_map(std::unordered_map<std::int64_t, std::int64_t> map) {
  if (map.empty()) throw std::invalid_argument("partition: empty explicit map");
  return Partition("explicit", 0, std::move(map));
}

std::int64_t Partition::cell(std::int64_t id) const {
  if (kind_ == "singleton") return id;
  if (kind_ == "mod") {
    const std::int64_t r = id % modulus_;
    return r < 0 ? r + modulus_ : r;
  }
  const auto it = map_.find(id);
  if (it == map_.end()) {
    throw std::invalid_argument("partition: context id " + std::to_string(id) +
                                " has no cell");
  }
  return it->second;
}

std::vector<std::int64_t> dedup_times(const Trace& trace, std::int64_t max_repeats) {
  if (max_repeats < 1) throw std::invalid_argument("dedup_times: max_repeats must be >= 1");
  std::vector<std::int64_t> kept;
  std::unordered_map<std::int64_t, std::int64_t> occurrences;
  for (std::int64_t t = 1; t <= trace.length(); ++t) {
    if (++occurrences[trace.ids[std::size_t(t - 1)]] <= max_repeats) kept.push_back(t);
  }
  return kept;
}

std::vector<std::int64_t> geometric_grid(std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("geometric_grid: horizon must be >= 1");
  std::vector<std::int64_t> grid;
  for (std::int64_t g = 1; g <= horizon && g > 0; g *= 2) grid.push_back(g);
  if (grid.back() != horizon) grid.push_back(horizon);
  return grid;
}

namespace {

void check_grid(const std::vector<std::int64_t>& grid, std::int64_t horizon,
                const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + ": empty grid");
  std::int64_t prev = 0;
  for (std::int64_t g : grid) {
    if (g <= prev || g > horizon) {
      throw std::invalid_argument(std::string(what) +
                                  ": grid must be increasing within [1, T]");
    }
    prev = g;
  }
}

}  // namespace

std::vector<CellCurvePoint> distinct_cell_curve(const Trace& trace,
                                                const Partition& partition,
                                                const std::vector<std::int64_t>& grid) {
  check_grid(grid, trace.length(), "distinct_cell_curve");
  std::vector<CellCurvePoint> curve;
  curve.reserve(grid.size());
  std::unordered_set<std::int64_t> cells;
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= trace.length() && next < grid.size(); ++t) {
    cells.insert(partition.cell(trace.ids[std::size_t(t - 1)]));
    if (t == grid[next]) {
      curve.push_back(CellCurvePoint{t, std::int64_t(cells.size()),
                                     double(cells.size()) / double(t)});
      ++next;
    }
  }
  return curve;
}

double empirical_submeasure(const Trace& trace, const std::vector<std::int64_t>& ids,
                            const std::vector<std::int64_t>& window) {
  if (window.empty()) throw std::invalid_argument("empirical_submeasure: empty window");
  for (std::int64_t w : window) {
    if (w < 1 || w > trace.length()) {
      throw std::invalid_argument("empirical_submeasure: window point outside [1, T]");
    }
  }
  std::vector<std::int64_t> sorted(window);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::unordered_set<std::int64_t> in_set(ids.begin(), ids.end());
  double best = 0.0;
  std::int64_t hits = 0;
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= trace.length() && next < sorted.size(); ++t) {
    hits += in_set.count(trace.ids[std::size_t(t - 1)]) ? 1 : 0;
    if (t == sorted[next]) {
      best = std::max(best, double(hits) / double(t));
      ++next;
    }
  }
  return best;
}

std::vector<double> indicator_average_curve(const Trace& trace,
                                            const std::vector<std::int64_t>& ids,
                                            const std::vector<std::int64_t>& grid) {
  check_grid(grid, trace.length(), "indicator_average_curve");
  const std::unordered_set<std::int64_t> in_set(ids.begin(), ids.end());
  std::vector<double> curve;
  curve.reserve(grid.size());
  std::int64_t hits = 0;
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= trace.length() && next < grid.size(); ++t) {
    hits += in_set.count(trace.ids[std::size_t(t - 1)]) ? 1 : 0;
    if (t == grid[next]) {
      curve.push_back(double(hits) / double(t));
      ++next;
    }
  }
  return curve;
}

std::int64_t InfrequentThresholds::at(std::int64_t cell) const {
  const auto it = per_cell.find(cell);
  if (it != per_cell.end()) return it->second;
  if (default_threshold) return *default_threshold;
  throw std::invalid_argument("infrequent thresholds: cell " + std::to_string(cell) +
                              " has no threshold");
}

std::vector<double> infrequent_mass_curve(const Trace& trace, const Partition& partition,
                                          const InfrequentThresholds& thresholds,
                                          const std::vector<std::int64_t>& grid) {
  check_grid(grid, trace.length(), "infrequent_mass");
  std::unordered_map<std::int64_t, std::unordered_set<std::int64_t>> seen_by_cell;
  std::vector<double> curve;
  curve.reserve(grid.size());
  std::int64_t hits = 0;
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= trace.length() && next < grid.size(); ++t) {
    const std::int64_t id = trace.ids[std::size_t(t - 1)];
    const std::int64_t cell = partition.cell(id);
    auto& seen = seen_by_cell[cell];
    if (std::int64_t(seen.size()) < thresholds.at(cell)) ++hits;
    seen.insert(id);
    if (t == grid[next]) {
      curve.push_back(double(hits) / double(t));
      ++next;
    }
  }
  return curve;
}

double infrequent_mass(const Trace& trace, const Partition& partition,
                       const InfrequentThresholds& thresholds) {
  if (trace.length() < 1) throw std::invalid_argument("infrequent_mass: empty trace");
  return infrequent_mass_curve(trace, partition, thresholds, {trace.length()}).back();
}

}  // namespace ocb
