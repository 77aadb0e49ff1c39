#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ocb/harness.hpp"
#include "ocb/oracles.hpp"

namespace {

using ocb::Json;

void emit_error(const std::string& type, const std::string& message) {
  Json record;
  record["error"]["type"] = type;
  record["error"]["message"] = message;
  std::cerr << record.dump() << "\n";
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

void deliver(const Json& doc, const std::string& configured_path, const char* what) {
  if (configured_path.empty()) {
    std::cout << json_text(doc);
    return;
  }
  const std::string path = ocb::resolve_output_path(configured_path);
  ocb::write_text_file(path, json_text(doc));
  std::cout << what << " written to " << path << "\n";
}

int cmd_run(const std::string& config_path) {
  const ocb::RunConfig cfg = ocb::load_run_config(config_path);
  ocb::RunResult result = ocb::run_experiment(cfg);
  deliver(result.summary, cfg.outputs.summary, "summary");
  if (!cfg.outputs.trace_csv.empty()) {
    const std::string path = ocb::resolve_output_path(cfg.outputs.trace_csv);
    ocb::write_text_file(path, result.trace_csv);
    std::cout << "trace written to " << path << "\n";
  }
  const auto& finals = result.summary["pseudo_regret_final_per_rep"];
  double total = 0.0;
  for (const auto& v : finals) total += v.get<double>();
  std::printf("final mean pseudo-regret: %.6g over %zu replications\n",
              total / double(finals.size()), finals.size());
  return 0;
}

int cmd_diagnose(const std::string& config_path) {
  const ocb::DiagnoseConfig cfg = ocb::load_diagnose_config(config_path);
  const Json report = ocb::run_diagnose(cfg);
  deliver(report, cfg.outputs.report, "report");
  return 0;
}

int cmd_oracle_check(const std::string& scenario) {
  std::vector<std::string> names;
  if (scenario == "all") {
    names = ocb::oracle_scenarios();
  } else {
    names.push_back(scenario);
  }
  bool all_pass = true;
  for (const std::string& name : names) {
    const ocb::OracleOutcome outcome = ocb::run_oracle(name);
    std::printf("[%s] %s: %s\n", outcome.pass ? "PASS" : "FAIL", outcome.name.c_str(),
                outcome.detail.c_str());
    all_pass = all_pass && outcome.pass;
  }
  if (!all_pass) {
    emit_error("oracle", "one or more oracle scenarios failed");
    return 1;
  }
  return 0;
}

Json parse_sweep_value(const std::string& text) {
  Json v = Json::parse(text, nullptr, false);
  if (v.is_discarded()) return Json(text);
  return v;
}

std::string sweep_output_path(const std::string& base, std::size_t index) {
  const std::size_t dot = base.rfind('.');
  const std::string suffix = ".sweep" + std::to_string(index);
  if (dot == std::string::npos || base.find('/', dot) != std::string::npos) {
    return base + suffix;
  }
  return base.substr(0, dot) + suffix + base.substr(dot);
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<std::string>& values) {
  std::ifstream in(config_path);
  if (!in) throw ocb::ConfigError("cannot open config file: " + config_path);
  Json base;
  try {
    base = Json::parse(in);
  } catch (const std::exception& e) {
    throw ocb::ConfigError(std::string("config parse: ") + e.what());
  }
  std::string pointer_text = param;
  if (pointer_text.empty()) throw ocb::ConfigError("sweep: empty --param");
  if (pointer_text[0] != '/') {
    for (char& c : pointer_text) {
      if (c == '.') c = '/';
    }
    pointer_text = "/" + pointer_text;
  }
  const Json::json_pointer pointer(pointer_text);

  for (std::size_t i = 0; i < values.size(); ++i) {
    Json doc = base;
    const Json value = parse_sweep_value(values[i]);
    doc[pointer] = value;
    const ocb::RunConfig cfg = ocb::parse_run_config(doc);
    ocb::RunResult result = ocb::run_experiment(cfg);
    result.summary["swept_param"] = param;
    result.summary["swept_value"] = value;
    if (!cfg.outputs.summary.empty()) {
      const std::string path =
          ocb::resolve_output_path(sweep_output_path(cfg.outputs.summary, i));
      ocb::write_text_file(path, json_text(result.summary));
    }
    const auto& finals = result.summary["pseudo_regret_final_per_rep"];
    double total = 0.0;
    for (const auto& v : finals) total += v.get<double>();
    std::printf("%s = %s: final mean pseudo-regret %.6g\n", param.c_str(),
                value.dump().c_str(), total / double(finals.size()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandit simulation harness"};
  app.require_subcommand(1);

  std::string run_config, diagnose_config, scenario, sweep_config, sweep_param;
  std::vector<std::string> sweep_values;

  CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("config", run_config, "JSON config path")->required();

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "Process-class diagnostics on a trace");
  diagnose->add_option("config", diagnose_config, "JSON config path")->required();

  CLI::App* oracle =
      app.add_subcommand("oracle-check", "Run independent cross-check scenarios");
  oracle->add_option("scenario", scenario, "Scenario name or 'all'")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sweep->add_option("config", sweep_config, "JSON config path")->required();
  sweep->add_option("--param", sweep_param, "Config key to vary (dots or JSON pointer)")
      ->required();
  sweep->add_option("--values", sweep_values, "Values to sweep over")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (diagnose->parsed()) return cmd_diagnose(diagnose_config);
    if (oracle->parsed()) return cmd_oracle_check(scenario);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_param, sweep_values);
  } catch (const ocb::ConfigError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 1;
  }
  emit_error("usage", "no subcommand selected");
  return 1;
}
