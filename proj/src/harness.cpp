#include "ocb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "ocb/bandits.hpp"
#include "ocb/schedule.hpp"
#include "ocb/universal.hpp"
#include "ocb/variants.hpp"

namespace ocb {

namespace {

// ---------------------------------------------------------------------------
// JSON access helpers. Every reader carries its config path so errors name
// the offending key.

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const Json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  require_object(j, where);
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || (item.key() == k);
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

const Json& need(const Json& j, const std::string& where, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

std::int64_t as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ConfigError(where + ": expected an integer");
  }
  return j.get<std::int64_t>();
}

std::uint64_t as_uint(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return std::uint64_t(j.get<std::int64_t>());
  }
  throw ConfigError(where + ": expected a nonnegative integer");
}

double as_double(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

bool as_bool(const Json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected a boolean");
  return j.get<bool>();
}

std::vector<double> as_double_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_double(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::int64_t> as_int_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<std::int64_t> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_int(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::int64_t key_as_int(const std::string& key, const std::string& where) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": key '" + key + "' is not an integer");
  }
}

// ---------------------------------------------------------------------------
// Spec parsing.

PartitionSpec parse_partition(const Json& j, const std::string& where) {
  check_keys(j, where, {"kind", "modulus", "map"});
  PartitionSpec spec;
  spec.kind = as_string(need(j, where, "kind"), where + ".kind");
  if (spec.kind == "singleton") {
    if (j.contains("modulus") || j.contains("map")) {
      throw ConfigError(where + ": singleton partition takes no parameters");
    }
  } else if (spec.kind == "mod") {
    spec.modulus = as_int(need(j, where, "modulus"), where + ".modulus");
  } else if (spec.kind == "explicit") {
    const Json& m = need(j, where, "map");
    require_object(m, where + ".map");
    for (const auto& item : m.items()) {
      spec.map[key_as_int(item.key(), where + ".map")] =
          as_int(item.value(), where + ".map." + item.key());
    }
  } else {
    throw ConfigError(where + ".kind: unknown partition kind '" + spec.kind + "'");
  }
  return spec;
}

ProcessSpec parse_process(const Json& j, const std::string& where) {
  ProcessSpec spec;
  spec.kind = as_string(need(j, where, "kind"), where + ".kind");
  if (spec.kind == "iid_finite") {
    check_keys(j, where, {"kind", "weights"});
    spec.weights = as_double_array(need(j, where, "weights"), where + ".weights");
  } else if (spec.kind == "iid_fresh" || spec.kind == "deterministic_walk") {
    check_keys(j, where, {"kind"});
  } else if (spec.kind == "markov_chain") {
    check_keys(j, where, {"kind", "transition"});
    const Json& m = need(j, where, "transition");
    if (!m.is_array()) throw ConfigError(where + ".transition: expected an array");
    for (std::size_t i = 0; i < m.size(); ++i) {
      spec.transition.push_back(
          as_double_array(m[i], where + ".transition[" + std::to_string(i) + "]"));
    }
  } else if (spec.kind == "finite_support_c3") {
    check_keys(j, where, {"kind", "ids", "weights", "law"});
    spec.ids = as_int_array(need(j, where, "ids"), where + ".ids");
    if (j.contains("weights")) {
      spec.weights = as_double_array(j["weights"], where + ".weights");
    }
    if (j.contains("law")) spec.law = as_string(j["law"], where + ".law");
    if (spec.law != "iid" && spec.law != "cycle") {
      throw ConfigError(where + ".law: expected 'iid' or 'cycle'");
    }
  } else if (spec.kind == "trace_file") {
    check_keys(j, where, {"kind", "path"});
    spec.trace_path = as_string(need(j, where, "path"), where + ".path");
  } else {
    throw ConfigError(where + ".kind: unknown process kind '" + spec.kind + "'");
  }
  return spec;
}

ActionSpec parse_actions(const Json& j, const std::string& where) {
  ActionSpec spec;
  spec.kind = as_string(need(j, where, "kind"), where + ".kind");
  if (spec.kind == "finite" || spec.kind == "countable_prefix") {
    check_keys(j, where, {"kind", "size"});
    spec.size = int(as_int(need(j, where, "size"), where + ".size"));
  } else if (spec.kind == "metric_candidates") {
    check_keys(j, where, {"kind", "coords"});
    const Json& c = need(j, where, "coords");
    if (!c.is_array()) throw ConfigError(where + ".coords: expected an array");
    for (std::size_t i = 0; i < c.size(); ++i) {
      spec.coords.push_back(
          as_double_array(c[i], where + ".coords[" + std::to_string(i) + "]"));
    }
  } else {
    throw ConfigError(where + ".kind: unknown action kind '" + spec.kind + "'");
  }
  return spec;
}

MechanismSpec parse_mechanism(const Json& j, const std::string& where) {
  MechanismSpec spec;
  spec.kind = as_string(need(j, where, "kind"), where + ".kind");
  const auto parse_cells = [&]() {
    spec.cells = parse_partition(need(j, where, "cells"), where + ".cells");
  };
  const auto parse_targets = [&](bool required) {
    const bool has_explicit = j.contains("targets");
    const bool has_fresh = j.contains("fresh_targets");
    if (has_explicit && has_fresh) {
      throw ConfigError(where + ": give either 'targets' or 'fresh_targets'");
    }
    if (!has_explicit && !has_fresh) {
      if (required) throw ConfigError(where + ": missing 'targets' or 'fresh_targets'");
      return;
    }
    if (has_fresh) {
      spec.fresh_targets = as_bool(j["fresh_targets"], where + ".fresh_targets");
      if (!spec.fresh_targets) {
        throw ConfigError(where + ".fresh_targets: must be true when present");
      }
      if (j.contains("target_pool")) {
        spec.target_pool = int(as_int(j["target_pool"], where + ".target_pool"));
      }
    } else {
      const Json& t = j["targets"];
      require_object(t, where + ".targets");
      for (const auto& item : t.items()) {
        spec.targets[key_as_int(item.key(), where + ".targets")] =
            int(as_int(item.value(), where + ".targets." + item.key()));
      }
    }
  };
  if (spec.kind == "bernoulli_table") {
    check_keys(j, where, {"kind", "cells", "means"});
    parse_cells();
    const Json& m = need(j, where, "means");
    require_object(m, where + ".means");
    for (const auto& item : m.items()) {
      spec.means[key_as_int(item.key(), where + ".means")] =
          as_double_array(item.value(), where + ".means." + item.key());
    }
  } else if (spec.kind == "needle") {
    check_keys(j, where, {"kind", "cells", "targets", "fresh_targets", "target_pool"});
    parse_cells();
    parse_targets(true);
  } else if (spec.kind == "tent") {
    check_keys(j, where,
               {"kind", "cells", "targets", "fresh_targets", "needle_set"});
    parse_cells();
    if (j.contains("needle_set")) {
      for (std::int64_t a : as_int_array(j["needle_set"], where + ".needle_set")) {
        spec.needle_set.push_back(int(a));
      }
    }
    parse_targets(true);
  } else if (spec.kind == "zero_mean_unbounded") {
    check_keys(j, where,
               {"kind", "cells", "magnitudes", "default_magnitude", "anchors",
                "magnitude_recursion"});
    parse_cells();
    if (j.contains("magnitudes")) {
      const Json& m = j["magnitudes"];
      require_object(m, where + ".magnitudes");
      for (const auto& item : m.items()) {
        spec.magnitudes[key_as_int(item.key(), where + ".magnitudes")] =
            as_double(item.value(), where + ".magnitudes." + item.key());
      }
    }
    if (j.contains("default_magnitude")) {
      spec.default_magnitude = as_double(j["default_magnitude"], where + ".default_magnitude");
    }
    if (j.contains("magnitude_recursion")) {
      const Json& r = j["magnitude_recursion"];
      check_keys(r, where + ".magnitude_recursion", {"t_sequence", "cells"});
      spec.recursion_t_sequence = as_double_array(
          need(r, where + ".magnitude_recursion", "t_sequence"),
          where + ".magnitude_recursion.t_sequence");
      spec.recursion_cells =
          as_int_array(need(r, where + ".magnitude_recursion", "cells"),
                       where + ".magnitude_recursion.cells");
      if (spec.recursion_t_sequence.size() != spec.recursion_cells.size()) {
        throw ConfigError(where + ".magnitude_recursion: t_sequence and cells "
                                  "must have equal length");
      }
      if (!spec.magnitudes.empty()) {
        throw ConfigError(where + ": give either 'magnitudes' or 'magnitude_recursion'");
      }
    }
    const Json& anchors = need(j, where, "anchors");
    if (!anchors.is_array() || anchors.size() != 2) {
      throw ConfigError(where + ".anchors: expected [anchor0, anchor1]");
    }
    spec.anchor0 = int(as_int(anchors[0], where + ".anchors[0]"));
    spec.anchor1 = int(as_int(anchors[1], where + ".anchors[1]"));
  } else if (spec.kind == "lipschitz_uc") {
    check_keys(j, where,
               {"kind", "cells", "modulus", "targets", "fresh_targets", "target_pool"});
    parse_cells();
    spec.modulus = as_double(need(j, where, "modulus"), where + ".modulus");
    parse_targets(true);
  } else {
    throw ConfigError(where + ".kind: unknown mechanism kind '" + spec.kind + "'");
  }
  return spec;
}

RuleSpec parse_rule(const Json& j, const std::string& where) {
  RuleSpec spec;
  spec.kind = as_string(need(j, where, "kind"), where + ".kind");
  const bool known =
      spec.kind == "exp3" || spec.kind == "exp3ix" || spec.kind == "expinf" ||
      spec.kind == "universal_finite" || spec.kind == "countable_rule" ||
      spec.kind == "continuous_rule" || spec.kind == "uc_net_rule" ||
      spec.kind == "unbounded_rule" || spec.kind == "oracle";
  if (!known) throw ConfigError(where + ".kind: unknown rule kind '" + spec.kind + "'");
  if (spec.kind == "uc_net_rule") {
    check_keys(j, where, {"kind", "delta_override"});
    if (j.contains("delta_override")) {
      spec.delta_override = as_double(j["delta_override"], where + ".delta_override");
    }
  } else if (spec.kind == "unbounded_rule") {
    check_keys(j, where, {"kind", "bound", "adaptive"});
    if (j.contains("bound")) spec.bound = as_double(j["bound"], where + ".bound");
    if (j.contains("adaptive")) spec.adaptive = as_bool(j["adaptive"], where + ".adaptive");
    if (j.contains("bound") && spec.adaptive) {
      throw ConfigError(where + ": give either 'bound' or 'adaptive'");
    }
    if (!spec.adaptive && !(spec.bound > 0.0)) {
      throw ConfigError(where + ".bound: must be > 0");
    }
  } else {
    check_keys(j, where, {"kind"});
  }
  return spec;
}

OutputSpec parse_outputs(const Json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  OutputSpec spec;
  check_keys(j, where, allowed);
  if (j.contains("summary")) spec.summary = as_string(j["summary"], where + ".summary");
  if (j.contains("trace_csv")) {
    spec.trace_csv = as_string(j["trace_csv"], where + ".trace_csv");
  }
  if (j.contains("report")) spec.report = as_string(j["report"], where + ".report");
  return spec;
}

// ---------------------------------------------------------------------------
// Flat (context-ignoring) rule adapters and the testing oracle.

class FlatExp3Rule final : public Learner {
 public:
  FlatExp3Rule(int arms, RngStream rng) : core_(arms, rng) {}
  std::string name() const override { return "exp3"; }

 private:
  int do_select(const ContextPoint&, std::int64_t) override {
    return arm_ = core_.select();
  }
  void do_feed(const RewardSample& reward) override {
    if (!reward.bounded) throw std::invalid_argument("exp3: needs rewards in [0,1]");
    core_.update(arm_, reward.value);
  }
  Exp3 core_;
  int arm_ = -1;
};

class FlatExp3IxRule final : public Learner {
 public:
  FlatExp3IxRule(int arms, RngStream rng) : core_(arms, rng) {}
  std::string name() const override { return "exp3ix"; }

 private:
  int do_select(const ContextPoint&, std::int64_t) override {
    return arm_ = core_.select();
  }
  void do_feed(const RewardSample& reward) override {
    if (!reward.bounded) throw std::invalid_argument("exp3ix: needs rewards in [0,1]");
    core_.update(arm_, reward.value);
  }
  Exp3Ix core_;
  int arm_ = -1;
};

class ExpInfActionRule final : public Learner {
 public:
  ExpInfActionRule(int arms, const RngFactory& rng) : arms_(arms), core_(rng, 0) {}
  std::string name() const override { return "expinf"; }

 private:
  int do_select(const ContextPoint&, std::int64_t) override {
    return core_.select_expert() % arms_;
  }
  void do_feed(const RewardSample& reward) override {
    if (!reward.bounded) throw std::invalid_argument("expinf: needs rewards in [0,1]");
    core_.update(reward.value);
  }
  int arms_;
  ExpInf core_;
};

class OracleRule final : public Learner {
 public:
  OracleRule(std::shared_ptr<const Mechanism> mech, int arms)
      : mech_(std::move(mech)), arms_(arms) {}
  std::string name() const override { return "oracle"; }

 private:
  int do_select(const ContextPoint& x, std::int64_t) override {
    const auto it = best_.find(x.id);
    if (it != best_.end()) return it->second;
    std::vector<double> means(static_cast<std::size_t>(arms_));
    std::vector<std::int64_t> ids(static_cast<std::size_t>(arms_));
    for (int a = 0; a < arms_; ++a) {
      means[std::size_t(a)] = mech_->mean(a, x);
      ids[std::size_t(a)] = a;
    }
    const int a = int(lex_argmax(means, ids));
    best_.emplace(x.id, a);
    return a;
  }
  void do_feed(const RewardSample&) override {}
  std::shared_ptr<const Mechanism> mech_;
  int arms_;
  std::unordered_map<std::int64_t, int> best_;
};

// ---------------------------------------------------------------------------
// Per-replication execution.

struct RepResult {
  std::vector<double> cum_pseudo;
  std::vector<double> cum_realized;
  double final_pseudo = 0.0;
  double final_realized = 0.0;
  RoundTypeCounts counts;
  std::map<int, std::int64_t> category_rounds;
  std::string trace_csv;
};

struct MeanRow {
  std::vector<double> means;
  double best = 0.0;
};

class MeanCache {
 public:
  MeanCache(const Mechanism& mech, int arms) : mech_(mech), arms_(arms) {}

  const MeanRow& row(const ContextPoint& x) {
    const auto it = rows_.find(x.id);
    if (it != rows_.end()) return it->second;
    MeanRow r;
    r.means.resize(std::size_t(arms_));
    for (int a = 0; a < arms_; ++a) r.means[std::size_t(a)] = mech_.mean(a, x);
    r.best = *std::max_element(r.means.begin(), r.means.end());
    return rows_.emplace(x.id, std::move(r)).first->second;
  }

 private:
  const Mechanism& mech_;
  int arms_;
  std::unordered_map<std::int64_t, MeanRow> rows_;
};

void classify_round(const RoundMeta& meta, RoundTypeCounts& counts) {
  if (meta.regime == "initial") {
    ++counts.initial;
  } else if (meta.purpose == 0) {
    ++counts.explore0;
  } else if (meta.purpose == 1) {
    ++counts.explore1;
  } else if (meta.purpose == 2 && meta.strategy == 0) {
    ++counts.exploit_strat0;
  } else if (meta.purpose == 2 && meta.strategy == 1) {
    ++counts.exploit_strat1;
  } else {
    ++counts.flat;
  }
}

void append_csv_row(std::string& csv, std::int64_t t, std::int64_t ctx, int category,
                    const RoundMeta& meta, int action, double reward, double cum) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%lld,%lld,%d,%lld,%d,%s,%d,%d,%.17g,%.17g\n",
                static_cast<long long>(t), static_cast<long long>(ctx), category,
                static_cast<long long>(meta.period), meta.purpose,
                meta.regime.c_str(), meta.strategy, action, reward, cum);
  csv += buf;
}

RepResult run_replication(const RunConfig& cfg, const ActionSpace& actions, int rep,
                          bool want_trace) {
  const RngFactory rep_rng =
      RngFactory{cfg.seed}.child({rtag::replication, std::uint64_t(rep)});
  auto process = cfg.process.build();
  auto mechanism = cfg.mechanism.build(actions, rep_rng.derive({rtag::target_draw}));
  auto rule = build_rule(cfg, actions, mechanism, rep_rng);
  RngStream process_stream = rep_rng.stream({rtag::process});
  RngStream mech_stream = rep_rng.stream({rtag::mechanism});
  const int arms = actions.size();
  const bool realized = cfg.regret_mode == "realized";

  MeanCache cache(*mechanism, arms);
  RepResult out;
  out.cum_pseudo.resize(cfg.grid.size(), 0.0);
  if (realized) out.cum_realized.resize(cfg.grid.size(), 0.0);
  if (want_trace) {
    out.trace_csv =
        "t,context_id,category,period,purpose,regime,strategy,action_id,reward,"
        "cum_pseudo_regret\n";
  }

  std::unordered_map<std::int64_t, std::int64_t> occurrences;
  std::vector<double> arm_sums(std::size_t(arms), 0.0);
  double chosen_sum = 0.0;
  double cum_regret = 0.0;
  std::size_t next_grid = 0;

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const ContextPoint x = process->next(process_stream);
    const int category = sched::category(++occurrences[x.id]);
    const int action = rule->select(x, t);
    const RoundMeta meta = rule->last_meta();
    if (meta.category >= 0 && meta.category != category) {
      throw std::logic_error("harness: rule category disagrees with occurrence count");
    }
    RewardSample sample{0.0, mechanism->bounded()};
    if (realized) {
      double chosen_value = 0.0;
      for (int a = 0; a < arms; ++a) {
        const double v = mechanism->sample(a, x, mech_stream).value;
        arm_sums[std::size_t(a)] += v;
        if (a == action) chosen_value = v;
      }
      chosen_sum += chosen_value;
      sample = RewardSample{chosen_value, mechanism->bounded()};
    } else {
      sample = mechanism->sample(action, x, mech_stream);
    }
    rule->feed(sample);

    const MeanRow& row = cache.row(x);
    if (action < 0 || action >= arms) {
      throw std::logic_error("harness: rule played an action outside the space");
    }
    cum_regret += row.best - row.means[std::size_t(action)];
    classify_round(meta, out.counts);
    ++out.category_rounds[category];
    if (want_trace) {
      append_csv_row(out.trace_csv, t, x.id, category, meta, action, sample.value,
                     cum_regret);
    }
    if (next_grid < cfg.grid.size() && t == cfg.grid[next_grid]) {
      out.cum_pseudo[next_grid] = cum_regret;
      if (realized) {
        const double best_arm = *std::max_element(arm_sums.begin(), arm_sums.end());
        out.cum_realized[next_grid] = best_arm - chosen_sum;
      }
      ++next_grid;
    }
  }
  if (out.counts.total() != cfg.horizon) {
    throw std::logic_error("harness: round-type counts do not partition the horizon");
  }
  out.final_pseudo = out.cum_pseudo.back();
  if (realized) out.final_realized = out.cum_realized.back();
  return out;
}

Json round_type_json(const std::vector<RepResult>& reps) {
  auto mean_of = [&](std::int64_t RoundTypeCounts::*field) {
    double total = 0.0;
    for (const RepResult& r : reps) total += double(r.counts.*field);
    return total / double(reps.size());
  };
  Json j;
  j["initial"] = mean_of(&RoundTypeCounts::initial);
  j["explore0"] = mean_of(&RoundTypeCounts::explore0);
  j["explore1"] = mean_of(&RoundTypeCounts::explore1);
  j["exploit_strat0"] = mean_of(&RoundTypeCounts::exploit_strat0);
  j["exploit_strat1"] = mean_of(&RoundTypeCounts::exploit_strat1);
  j["flat"] = mean_of(&RoundTypeCounts::flat);
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec builders.

Partition PartitionSpec::build() const {
  if (kind == "singleton") return Partition::singleton();
  if (kind == "mod") return Partition::modulo(modulus);
  if (kind == "explicit") return Partition::explicit_map(map);
  throw ConfigError("partition: unknown kind '" + kind + "'");
}

std::unique_ptr<Process> ProcessSpec::build() const {
  if (kind == "iid_finite") return std::make_unique<IidFiniteProcess>(weights);
  if (kind == "iid_fresh") return std::make_unique<IidFreshProcess>();
  if (kind == "markov_chain") return std::make_unique<MarkovChainProcess>(transition);
  if (kind == "finite_support_c3") {
    const auto which = law == "cycle" ? FiniteSupportProcess::Law::cycle
                                      : FiniteSupportProcess::Law::iid;
    return std::make_unique<FiniteSupportProcess>(ids, weights, which);
  }
  if (kind == "deterministic_walk") return std::make_unique<DeterministicWalkProcess>();
  if (kind == "trace_file") return std::make_unique<TraceProcess>(read_trace_file(trace_path));
  throw ConfigError("process: unknown kind '" + kind + "'");
}

ActionSpace ActionSpec::build() const {
  if (kind == "finite") return ActionSpace::finite(size);
  if (kind == "countable_prefix") return ActionSpace::countable_prefix(size);
  if (kind == "metric_candidates") return ActionSpace::metric_candidates(coords);
  throw ConfigError("actions: unknown kind '" + kind + "'");
}

std::shared_ptr<const Mechanism> MechanismSpec::build(const ActionSpace& actions,
                                                      std::uint64_t target_seed) const {
  const Partition partition = cells.build();
  const auto make_targets = [&](int default_pool) {
    if (fresh_targets) {
      return TargetMap::hashed(target_seed,
                               target_pool > 0 ? target_pool : default_pool);
    }
    return TargetMap::explicit_targets(targets);
  };
  if (kind == "bernoulli_table") {
    return std::make_shared<BernoulliTableMechanism>(actions, partition, means);
  }
  if (kind == "needle") {
    return std::make_shared<NeedleMechanism>(actions, partition,
                                             make_targets(actions.size()));
  }
  if (kind == "tent") {
    std::vector<int> set = needle_set;
    if (set.empty()) {
      set.resize(std::size_t(actions.size()));
      for (int a = 0; a < actions.size(); ++a) set[std::size_t(a)] = a;
    }
    return std::make_shared<TentMechanism>(actions, partition,
                                           make_targets(int(set.size())), set);
  }
  if (kind == "zero_mean_unbounded") {
    std::map<std::int64_t, double> mags = magnitudes;
    if (!recursion_t_sequence.empty()) {
      const auto ms = ZeroMeanUnboundedMechanism::magnitude_recursion(recursion_t_sequence);
      for (std::size_t i = 0; i < ms.size(); ++i) mags[recursion_cells[i]] = ms[i];
    }
    return std::make_shared<ZeroMeanUnboundedMechanism>(
        actions, partition, std::move(mags), default_magnitude, anchor0, anchor1);
  }
  if (kind == "lipschitz_uc") {
    return std::make_shared<LipschitzUCMechanism>(actions, partition,
                                                  make_targets(actions.size()), modulus);
  }
  throw ConfigError("mechanism: unknown kind '" + kind + "'");
}

PolicySpace derive_policy_space(const RunConfig& config, const ActionSpace& actions) {
  const auto process = config.process.build();
  const auto support = process->support_ids();
  if (!support.empty()) return PolicySpace::finite(support, actions.size());
  return PolicySpace::countable(actions.size());
}

std::unique_ptr<Learner> build_rule(const RunConfig& config, const ActionSpace& actions,
                                    std::shared_ptr<const Mechanism> mechanism,
                                    const RngFactory& replication_rng) {
  const std::string& kind = config.rule.kind;
  const int arms = actions.size();
  try {
    if (kind == "exp3") {
      return std::make_unique<FlatExp3Rule>(arms, replication_rng.stream({rtag::rule, 1}));
    }
    if (kind == "exp3ix") {
      return std::make_unique<FlatExp3IxRule>(arms, replication_rng.stream({rtag::rule, 2}));
    }
    if (kind == "expinf") {
      return std::make_unique<ExpInfActionRule>(arms, replication_rng.child({rtag::rule}));
    }
    if (kind == "universal_finite") {
      if (actions.kind() == ActionSpaceKind::countable_prefix) {
        throw ConfigError("rule: universal_finite needs a finite action set");
      }
      UniversalOptions options;
      options.num_actions = arms;
      options.policy_space = derive_policy_space(config, actions);
      return std::make_unique<UniversalFiniteRule>(std::move(options),
                                                   replication_rng.child({rtag::rule}));
    }
    if (kind == "uc_net_rule") {
      return make_uc_net_rule(actions, derive_policy_space(config, actions),
                              config.rule.delta_override,
                              replication_rng.child({rtag::rule}));
    }
    if (kind == "countable_rule" || kind == "continuous_rule") {
      if (kind == "continuous_rule" && !actions.metric()) {
        throw ConfigError("rule: continuous_rule needs metric candidates");
      }
      return std::make_unique<PolicyExpInfRule>(derive_policy_space(config, actions),
                                                replication_rng.child({rtag::rule}), kind);
    }
    if (kind == "unbounded_rule") {
      const double bound = config.rule.adaptive ? 0.0 : config.rule.bound;
      return std::make_unique<PerContextExpInfRule>(arms, bound,
                                                    replication_rng.child({rtag::rule}));
    }
    if (kind == "oracle") {
      return std::make_unique<OracleRule>(std::move(mechanism), arms);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rule: ") + e.what());
  }
  throw ConfigError("rule: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Config parsing entry points.

RunConfig parse_run_config(const Json& doc) {
  check_keys(doc, "config",
             {"version", "seed", "horizon", "replications", "threads", "regret", "grid",
              "actions", "process", "mechanism", "rule", "outputs"});
  if (as_int(need(doc, "config", "version"), "config.version") != 1) {
    throw ConfigError("config.version: expected 1");
  }
  RunConfig cfg;
  cfg.seed = as_uint(need(doc, "config", "seed"), "config.seed");
  cfg.horizon = as_int(need(doc, "config", "horizon"), "config.horizon");
  if (cfg.horizon < 1) throw ConfigError("config.horizon: must be >= 1");
  cfg.replications =
      int(as_int(need(doc, "config", "replications"), "config.replications"));
  if (cfg.replications < 1) throw ConfigError("config.replications: must be >= 1");
  if (doc.contains("threads")) {
    cfg.threads = int(as_int(doc["threads"], "config.threads"));
    if (cfg.threads < 1) throw ConfigError("config.threads: must be >= 1");
  }
  if (doc.contains("regret")) {
    cfg.regret_mode = as_string(doc["regret"], "config.regret");
    if (cfg.regret_mode != "pseudo" && cfg.regret_mode != "realized") {
      throw ConfigError("config.regret: expected 'pseudo' or 'realized'");
    }
  }
  cfg.actions = parse_actions(need(doc, "config", "actions"), "config.actions");
  cfg.process = parse_process(need(doc, "config", "process"), "config.process");
  cfg.mechanism = parse_mechanism(need(doc, "config", "mechanism"), "config.mechanism");
  cfg.rule = parse_rule(need(doc, "config", "rule"), "config.rule");
  if (doc.contains("grid")) {
    cfg.grid = as_int_array(doc["grid"], "config.grid");
    if (cfg.grid.empty()) throw ConfigError("config.grid: must not be empty");
    std::int64_t prev = 0;
    for (std::int64_t g : cfg.grid) {
      if (g <= prev || g > cfg.horizon) {
        throw ConfigError("config.grid: must be strictly increasing within [1, horizon]");
      }
      prev = g;
    }
    if (cfg.grid.back() != cfg.horizon) cfg.grid.push_back(cfg.horizon);
  } else {
    cfg.grid = geometric_grid(cfg.horizon);
  }
  if (doc.contains("outputs")) {
    cfg.outputs = parse_outputs(doc["outputs"], "config.outputs", {"summary", "trace_csv"});
  }

  // Validate the run pieces by constructing them once.
  try {
    const ActionSpace actions = cfg.actions.build();
    if (actions.size() < 2) throw ConfigError("config.actions: need at least 2 actions");
    auto process = cfg.process.build();
    if (cfg.process.kind == "trace_file") {
      const auto support = process->support_ids();
      Trace probe = read_trace_file(cfg.process.trace_path);
      if (cfg.horizon > probe.length()) {
        throw ConfigError("config.horizon: exceeds trace length");
      }
    }
    auto mech = cfg.mechanism.build(actions, 0);
    if (!mech->bounded() && cfg.rule.kind != "unbounded_rule" &&
        cfg.rule.kind != "oracle") {
      throw ConfigError("config.rule: mechanism emits unbounded rewards; use "
                        "unbounded_rule or oracle");
    }
    (void)build_rule(cfg, actions, mech, RngFactory{cfg.seed});
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  return parse_run_config(doc);
}

// ---------------------------------------------------------------------------
// Experiment driver.

RunResult run_experiment(const RunConfig& cfg) {
  const ActionSpace actions = cfg.actions.build();
  const int reps = cfg.replications;
  std::vector<RepResult> results(static_cast<std::size_t>(reps));
  const bool realized = cfg.regret_mode == "realized";
  const bool want_trace = !cfg.outputs.trace_csv.empty();

  if (cfg.threads <= 1 || reps == 1) {
    for (int rep = 0; rep < reps; ++rep) {
      results[std::size_t(rep)] =
          run_replication(cfg, actions, rep, want_trace && rep == 0);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int workers = std::min(cfg.threads, reps);
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1)) {
          try {
            results[std::size_t(rep)] =
                run_replication(cfg, actions, rep, want_trace && rep == 0);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  // Deterministic reduction in replication index order.
  const std::size_t points = cfg.grid.size();
  std::vector<double> mean(points, 0.0), stdev(points, 0.0), per_round(points, 0.0);
  std::vector<double> realized_mean(points, 0.0);
  for (const RepResult& r : results) {
    for (std::size_t g = 0; g < points; ++g) {
      mean[g] += r.cum_pseudo[g];
      if (realized) realized_mean[g] += r.cum_realized[g];
    }
  }
  for (std::size_t g = 0; g < points; ++g) {
    mean[g] /= double(reps);
    if (realized) realized_mean[g] /= double(reps);
  }
  if (reps > 1) {
    for (const RepResult& r : results) {
      for (std::size_t g = 0; g < points; ++g) {
        const double d = r.cum_pseudo[g] - mean[g];
        stdev[g] += d * d;
      }
    }
    for (std::size_t g = 0; g < points; ++g) {
      stdev[g] = std::sqrt(stdev[g] / double(reps - 1));
    }
  }
  for (std::size_t g = 0; g < points; ++g) {
    per_round[g] = mean[g] / double(cfg.grid[g]);
  }

  Json summary;
  summary["schema_version"] = 1;
  summary["kind"] = "run_summary";
  summary["rule"] = cfg.rule.kind;
  summary["process"] = cfg.process.kind;
  summary["mechanism"] = cfg.mechanism.kind;
  summary["horizon"] = cfg.horizon;
  summary["replications"] = reps;
  summary["seed"] = cfg.seed;
  summary["regret_mode"] = cfg.regret_mode;
  summary["grid"] = cfg.grid;
  summary["pseudo_regret_mean"] = mean;
  summary["pseudo_regret_std"] = stdev;
  summary["per_round_pseudo_regret_mean"] = per_round;
  {
    std::vector<double> finals;
    finals.reserve(std::size_t(reps));
    for (const RepResult& r : results) finals.push_back(r.final_pseudo);
    summary["pseudo_regret_final_per_rep"] = finals;
  }
  if (realized) {
    summary["realized_regret_mean"] = realized_mean;
    std::vector<double> finals;
    finals.reserve(std::size_t(reps));
    for (const RepResult& r : results) finals.push_back(r.final_realized);
    summary["realized_regret_final_per_rep"] = finals;
  }
  summary["round_type_counts_mean"] = round_type_json(results);
  {
    std::map<int, double> agg;
    for (const RepResult& r : results) {
      for (const auto& [cat, n] : r.category_rounds) agg[cat] += double(n);
    }
    Json cats;
    for (const auto& [cat, total] : agg) {
      cats[std::to_string(cat)] = total / double(reps);
    }
    summary["category_rounds_mean"] = std::move(cats);
  }

  RunResult out;
  out.summary = std::move(summary);
  out.trace_csv = std::move(results.front().trace_csv);
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics driver.

DiagnoseConfig parse_diagnose_config(const Json& doc) {
  check_keys(doc, "config",
             {"version", "seed", "horizon", "process", "partition", "thresholds",
              "indicator", "outputs"});
  if (as_int(need(doc, "config", "version"), "config.version") != 1) {
    throw ConfigError("config.version: expected 1");
  }
  DiagnoseConfig cfg;
  if (doc.contains("seed")) cfg.seed = as_uint(doc["seed"], "config.seed");
  cfg.process = parse_process(need(doc, "config", "process"), "config.process");
  if (doc.contains("horizon")) {
    cfg.horizon = as_int(doc["horizon"], "config.horizon");
    if (cfg.horizon < 1) throw ConfigError("config.horizon: must be >= 1");
  } else if (cfg.process.kind != "trace_file") {
    throw ConfigError("config.horizon: required unless replaying a trace file");
  }
  if (doc.contains("partition")) {
    cfg.partition = parse_partition(doc["partition"], "config.partition");
  }
  if (doc.contains("thresholds")) {
    const Json& t = doc["thresholds"];
    check_keys(t, "config.thresholds", {"default", "per_cell"});
    if (t.contains("default")) {
      if (t["default"].is_null()) {
        cfg.thresholds.default_threshold.reset();
      } else {
        cfg.thresholds.default_threshold =
            as_int(t["default"], "config.thresholds.default");
      }
    }
    if (t.contains("per_cell")) {
      const Json& pc = t["per_cell"];
      require_object(pc, "config.thresholds.per_cell");
      for (const auto& item : pc.items()) {
        cfg.thresholds.per_cell[key_as_int(item.key(), "config.thresholds.per_cell")] =
            as_int(item.value(), "config.thresholds.per_cell." + item.key());
      }
    }
  }
  if (doc.contains("indicator")) {
    cfg.indicator_ids = as_int_array(doc["indicator"], "config.indicator");
  }
  if (doc.contains("outputs")) {
    cfg.outputs = parse_outputs(doc["outputs"], "config.outputs", {"report"});
  }
  try {
    (void)cfg.partition.build();
    auto probe = cfg.process.build();
    if (cfg.process.kind == "trace_file") {
      const std::int64_t len = read_trace_file(cfg.process.trace_path).length();
      if (cfg.horizon == 0) cfg.horizon = len;
      if (cfg.horizon > len) throw ConfigError("config.horizon: exceeds trace length");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

DiagnoseConfig load_diagnose_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  return parse_diagnose_config(doc);
}

Json run_diagnose(const DiagnoseConfig& cfg) {
  auto process = cfg.process.build();
  RngStream stream = RngFactory{cfg.seed}.stream({rtag::process});
  const Trace trace = generate_trace(*process, cfg.horizon, stream);
  const Partition partition = cfg.partition.build();
  const auto grid = geometric_grid(cfg.horizon);

  Json report;
  report["schema_version"] = 1;
  report["kind"] = "diagnose_report";
  report["process"] = cfg.process.kind;
  report["horizon"] = cfg.horizon;
  report["seed"] = cfg.seed;
  report["grid"] = grid;

  {
    Json dedup = Json::array();
    for (std::int64_t m = 1;; m *= 2) {
      const std::int64_t kept = std::int64_t(dedup_times(trace, m).size());
      Json row;
      row["max_repeats"] = m;
      row["kept"] = kept;
      dedup.push_back(std::move(row));
      if (kept == trace.length()) break;
    }
    report["dedup_sizes"] = std::move(dedup);
  }
  {
    const auto curve = distinct_cell_curve(trace, partition, grid);
    Json counts = Json::array(), ratios = Json::array();
    for (const CellCurvePoint& p : curve) {
      counts.push_back(p.cells);
      ratios.push_back(p.ratio);
    }
    Json cells;
    cells["counts"] = std::move(counts);
    cells["ratios"] = std::move(ratios);
    report["distinct_cells"] = std::move(cells);
  }
  {
    const auto curve = infrequent_mass_curve(trace, partition, cfg.thresholds, grid);
    double tail_max = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (grid[g] * 2 >= cfg.horizon) tail_max = std::max(tail_max, curve[g]);
    }
    Json mass;
    mass["curve"] = curve;
    mass["final"] = curve.back();
    mass["tail_max"] = tail_max;
    report["infrequent_mass"] = std::move(mass);
  }
  if (cfg.indicator_ids) {
    const auto curve = indicator_average_curve(trace, *cfg.indicator_ids, grid);
    double tail_max = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (grid[g] * 2 >= cfg.horizon) tail_max = std::max(tail_max, curve[g]);
    }
    Json ind;
    ind["ids"] = *cfg.indicator_ids;
    ind["curve"] = curve;
    ind["max"] = empirical_submeasure(trace, *cfg.indicator_ids, grid);
    ind["tail_max"] = tail_max;
    report["indicator"] = std::move(ind);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output plumbing.

std::string resolve_output_path(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("OCB_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
      p = fs::path(dir) / p;
    }
  }
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p.string();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out.good()) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace ocb
