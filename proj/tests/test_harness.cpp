#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ocb/harness.hpp"

using namespace ocb;

namespace {

Json base_config() {
  return Json::parse(R"({
    "version": 1,
    "seed": 5,
    "horizon": 256,
    "replications": 2,
    "regret": "pseudo",
    "actions": {"kind": "finite", "size": 2},
    "process": {"kind": "iid_finite", "weights": [0.5, 0.5]},
    "mechanism": {
      "kind": "bernoulli_table",
      "cells": {"kind": "singleton"},
      "means": {"0": [0.2, 0.8], "1": [0.9, 0.1]}
    },
    "rule": {"kind": "exp3"}
  })");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig cfg = parse_run_config(base_config());
  CHECK(cfg.horizon == 256);
  CHECK(cfg.replications == 2);
  CHECK(cfg.threads == 1);
  CHECK(cfg.regret_mode == "pseudo");
  // Default grid: powers of two up to the horizon.
  CHECK(cfg.grid.front() == 1);
  CHECK(cfg.grid.back() == 256);
}

TEST_CASE("config parse errors carry the offending key") {
  Json bad = base_config();
  bad["unexpected_key"] = 1;
  CHECK_THROWS_WITH_AS(parse_run_config(bad), doctest::Contains("unexpected_key"),
                       ConfigError);

  Json ver = base_config();
  ver["version"] = 2;
  CHECK_THROWS_AS(parse_run_config(ver), ConfigError);

  Json no_rule = base_config();
  no_rule.erase("rule");
  CHECK_THROWS_AS(parse_run_config(no_rule), ConfigError);

  Json horizon = base_config();
  horizon["horizon"] = 0;
  CHECK_THROWS_AS(parse_run_config(horizon), ConfigError);

  Json mode = base_config();
  mode["regret"] = "banana";
  CHECK_THROWS_AS(parse_run_config(mode), ConfigError);

  Json nested = base_config();
  nested["mechanism"]["means"]["0"] = Json::array({0.2});  // row too short
  CHECK_THROWS_AS(parse_run_config(nested), ConfigError);

  Json rule = base_config();
  rule["rule"]["kind"] = "made_up_rule";
  CHECK_THROWS_AS(parse_run_config(rule), ConfigError);
}

TEST_CASE("grid validation") {
  Json cfg = base_config();
  cfg["grid"] = Json::array({10, 10, 20});
  CHECK_THROWS_AS(parse_run_config(cfg), ConfigError);
  cfg["grid"] = Json::array({10, 500});
  CHECK_THROWS_AS(parse_run_config(cfg), ConfigError);  // beyond horizon
  cfg["grid"] = Json::array({0, 10});
  CHECK_THROWS_AS(parse_run_config(cfg), ConfigError);
  // A valid grid gains the horizon when missing.
  cfg["grid"] = Json::array({10, 100});
  const RunConfig parsed = parse_run_config(cfg);
  CHECK(parsed.grid == std::vector<std::int64_t>{10, 100, 256});
}

TEST_CASE("incompatible rule and mechanism combinations are config errors") {
  // Unbounded mechanism with a bounded-only rule.
  Json cfg = base_config();
  cfg["actions"] = Json{{"kind", "metric_candidates"},
                        {"coords", Json::array({Json::array({0.0}), Json::array({1.0})})}};
  cfg["mechanism"] = Json{{"kind", "zero_mean_unbounded"},
                          {"cells", Json{{"kind", "singleton"}}},
                          {"magnitudes", Json{{"0", 2.0}}},
                          {"default_magnitude", 1.0},
                          {"anchors", Json::array({0, 1})}};
  CHECK_THROWS_AS(parse_run_config(cfg), ConfigError);
  // The unbounded rule accepts it.
  cfg["rule"] = Json{{"kind", "unbounded_rule"}, {"adaptive", true}};
  CHECK_NOTHROW(parse_run_config(cfg));

  // The finite universal rule refuses countable action prefixes.
  Json countable = base_config();
  countable["actions"] = Json{{"kind", "countable_prefix"}, {"size", 3}};
  countable["mechanism"]["means"]["0"] = Json::array({0.2, 0.8, 0.5});
  countable["mechanism"]["means"]["1"] = Json::array({0.9, 0.1, 0.5});
  countable["rule"]["kind"] = "universal_finite";
  CHECK_THROWS_AS(parse_run_config(countable), ConfigError);
  countable["rule"]["kind"] = "countable_rule";
  CHECK_NOTHROW(parse_run_config(countable));

  // Rules needing geometry refuse plain finite spaces.
  Json cont = base_config();
  cont["rule"]["kind"] = "continuous_rule";
  CHECK_THROWS_AS(parse_run_config(cont), ConfigError);
}

TEST_CASE("policy space derivation follows the process support") {
  const RunConfig finite_cfg = parse_run_config(base_config());
  const ActionSpace actions = finite_cfg.actions.build();
  const PolicySpace fin = derive_policy_space(finite_cfg, actions);
  CHECK_FALSE(fin.countable_contexts);
  CHECK(fin.context_ids == std::vector<std::int64_t>{0, 1});
  CHECK(fin.num_actions == 2);

  Json walk = base_config();
  walk["process"] = Json{{"kind", "deterministic_walk"}};
  const RunConfig walk_cfg = parse_run_config(walk);
  const PolicySpace cnt = derive_policy_space(walk_cfg, actions);
  CHECK(cnt.countable_contexts);
}

TEST_CASE("experiments replay byte-identically and ignore thread count") {
  Json doc = base_config();
  doc["rule"]["kind"] = "universal_finite";
  const RunResult a = run_experiment(parse_run_config(doc));
  const RunResult b = run_experiment(parse_run_config(doc));
  CHECK(a.summary.dump() == b.summary.dump());

  Json threaded = doc;
  threaded["threads"] = 3;
  const RunResult c = run_experiment(parse_run_config(threaded));
  CHECK(a.summary.dump() == c.summary.dump());

  CHECK(a.summary["kind"] == "run_summary");
  CHECK(a.summary["rule"] == "universal_finite");
  CHECK(a.summary["pseudo_regret_mean"].size() == a.summary["grid"].size());
  CHECK(a.summary["pseudo_regret_final_per_rep"].size() == 2);
  // Round classifications partition the horizon.
  double total = 0.0;
  for (const auto& [key, value] : a.summary["round_type_counts_mean"].items()) {
    (void)key;
    total += value.get<double>();
  }
  CHECK(total == doctest::Approx(256.0));
}

TEST_CASE("the clairvoyant reference rule has zero pseudo-regret") {
  Json doc = base_config();
  doc["rule"]["kind"] = "oracle";
  const RunResult res = run_experiment(parse_run_config(doc));
  for (const auto& v : res.summary["pseudo_regret_mean"]) {
    CHECK(v.get<double>() == doctest::Approx(0.0));
  }
}

TEST_CASE("equal means across actions mean zero pseudo-regret for any rule") {
  Json doc = base_config();
  doc["mechanism"]["means"] = Json{{"0", Json::array({0.6, 0.6})},
                                   {"1", Json::array({0.6, 0.6})}};
  const RunResult res = run_experiment(parse_run_config(doc));
  for (const auto& v : res.summary["pseudo_regret_mean"]) {
    CHECK(v.get<double>() == doctest::Approx(0.0));
  }
}

TEST_CASE("realized regret mode adds realized statistics") {
  Json doc = base_config();
  doc["regret"] = "realized";
  const RunResult res = run_experiment(parse_run_config(doc));
  REQUIRE(res.summary.contains("realized_regret_mean"));
  CHECK(res.summary["realized_regret_mean"].size() == res.summary["grid"].size());
  CHECK(res.summary["realized_regret_final_per_rep"].size() == 2);
}

TEST_CASE("trace csv covers every round with the documented header") {
  Json doc = base_config();
  doc["rule"]["kind"] = "universal_finite";
  doc["outputs"] = Json{{"trace_csv", "unused.csv"}};
  RunConfig cfg = parse_run_config(doc);
  cfg.outputs.trace_csv = "requested";  // request the in-memory trace only
  const RunResult res = run_experiment(cfg);
  const auto lines = split_lines(res.trace_csv);
  REQUIRE(lines.size() == 257);  // header + one row per round
  CHECK(lines[0] ==
        "t,context_id,category,period,purpose,regime,strategy,action_id,reward,"
        "cum_pseudo_regret");
  // The final cumulative pseudo-regret matches replication 0's reported final.
  const auto last_comma = lines.back().rfind(',');
  const double last_cum = std::stod(lines.back().substr(last_comma + 1));
  const double rep0_final = res.summary["pseudo_regret_final_per_rep"][0].get<double>();
  CHECK(last_cum == doctest::Approx(rep0_final).epsilon(1e-9));
  // First column counts rounds 1..T.
  CHECK(lines[1].rfind("1,", 0) == 0);
  CHECK(lines[256].rfind("256,", 0) == 0);
}

TEST_CASE("diagnose reports the expected statistics for a fresh-context walk") {
  const Json doc = Json::parse(R"({
    "version": 1,
    "seed": 3,
    "horizon": 64,
    "process": {"kind": "deterministic_walk"},
    "partition": {"kind": "singleton"},
    "thresholds": {"default": 1}
  })");
  const Json report = run_diagnose(parse_diagnose_config(doc));
  CHECK(report["kind"] == "diagnose_report");
  CHECK(report["process"] == "deterministic_walk");
  // Every context is fresh: all ratios 1, full infrequent mass, and the
  // dedup pass keeps everything already at one repeat.
  for (const auto& r : report["distinct_cells"]["ratios"]) {
    CHECK(r.get<double>() == doctest::Approx(1.0));
  }
  CHECK(report["infrequent_mass"]["final"].get<double>() == doctest::Approx(1.0));
  CHECK(report["infrequent_mass"]["tail_max"].get<double>() == doctest::Approx(1.0));
  REQUIRE(report["dedup_sizes"].size() == 1);
  CHECK(report["dedup_sizes"][0]["max_repeats"] == 1);
  CHECK(report["dedup_sizes"][0]["kept"] == 64);
  CHECK_FALSE(report.contains("indicator"));

  // Indicator statistics appear when ids are supplied.
  Json with_ind = doc;
  with_ind["indicator"] = Json::array({1, 2});
  const Json rep2 = run_diagnose(parse_diagnose_config(with_ind));
  REQUIRE(rep2.contains("indicator"));
  CHECK(rep2["indicator"]["max"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("diagnose on a heavily repeating process shows vanishing ratios") {
  const Json doc = Json::parse(R"({
    "version": 1,
    "seed": 9,
    "horizon": 4096,
    "process": {"kind": "iid_finite", "weights": [0.2, 0.2, 0.2, 0.2, 0.2]},
    "partition": {"kind": "singleton"},
    "thresholds": {"default": 1}
  })");
  const Json report = run_diagnose(parse_diagnose_config(doc));
  const auto& ratios = report["distinct_cells"]["ratios"];
  CHECK(ratios[ratios.size() - 1].get<double>() <= 5.0 / 4096.0 + 1e-12);
  CHECK(report["infrequent_mass"]["tail_max"].get<double>() < 0.01);
}

TEST_CASE("output paths honor the directory override") {
  const std::string dir = "/tmp/ocb_harness_test_out";
  std::filesystem::remove_all(dir);
  setenv("OCB_OUTPUT_DIR", dir.c_str(), 1);
  const std::string resolved = resolve_output_path("sub/file.json");
  CHECK(resolved == dir + "/sub/file.json");
  CHECK(std::filesystem::exists(dir + "/sub"));
  // Absolute paths are left alone.
  CHECK(resolve_output_path("/tmp/ocb_harness_test_out/abs.json") ==
        "/tmp/ocb_harness_test_out/abs.json");
  write_text_file(resolved, "content\n");
  CHECK(std::filesystem::exists(dir + "/sub/file.json"));
  unsetenv("OCB_OUTPUT_DIR");
  std::filesystem::remove_all(dir);
}
