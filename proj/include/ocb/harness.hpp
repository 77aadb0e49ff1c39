#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ocb/core.hpp"
#include "ocb/policy_net.hpp"
#include "ocb/processes.hpp"
#include "ocb/rewards.hpp"
#include "ocb/rng.hpp"

namespace ocb {

using Json = nlohmann::ordered_json;

// Invalid or inconsistent configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PartitionSpec {
  std::string kind = "singleton";
  std::int64_t modulus = 1;
  std::unordered_map<std::int64_t, std::int64_t> map;

  Partition build() const;
};

struct ProcessSpec {
  std::string kind;
  std::vector<double> weights;
  std::vector<std::vector<double>> transition;
  std::vector<std::int64_t> ids;
  std::string law = "iid";
  std::string trace_path;

  std::unique_ptr<Process> build() const;
};

struct ActionSpec {
  std::string kind = "finite";
  int size = 2;
  std::vector<std::vector<double>> coords;

  ActionSpace build() const;
};

struct MechanismSpec {
  std::string kind;
  PartitionSpec cells;
  std::map<std::int64_t, std::vector<double>> means;
  std::map<std::int64_t, int> targets;
  bool fresh_targets = false;
  int target_pool = 0;  // 0: defaults to the action count / needle set size
  std::vector<int> needle_set;
  std::map<std::int64_t, double> magnitudes;
  std::optional<double> default_magnitude;
  std::vector<double> recursion_t_sequence;
  std::vector<std::int64_t> recursion_cells;
  int anchor0 = 0;
  int anchor1 = 1;
  double modulus = 1.0;

  std::shared_ptr<const Mechanism> build(const ActionSpace& actions,
                                         std::uint64_t target_seed) const;
};

struct RuleSpec {
  std::string kind;
  std::optional<double> delta_override;
  double bound = 1.0;
  bool adaptive = false;
};

struct OutputSpec {
  std::string summary;
  std::string trace_csv;
  std::string report;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::int64_t horizon = 1;
  int replications = 1;
  int threads = 1;
  std::string regret_mode = "pseudo";
  std::vector<std::int64_t> grid;
  ActionSpec actions;
  ProcessSpec process;
  MechanismSpec mechanism;
  RuleSpec rule;
  OutputSpec outputs;
};

RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::string& path);

// Policy domain the universal rules enumerate over: the process support when
// finite, the countable id family otherwise.
PolicySpace derive_policy_space(const RunConfig& config, const ActionSpace& actions);

std::unique_ptr<Learner> build_rule(const RunConfig& config, const ActionSpace& actions,
                                    std::shared_ptr<const Mechanism> mechanism,
                                    const RngFactory& replication_rng);

struct RunResult {
  Json summary;
  std::string trace_csv;  // empty unless requested; replication 0 only
};

RunResult run_experiment(const RunConfig& config);

struct DiagnoseConfig {
  std::uint64_t seed = 1;
  std::int64_t horizon = 0;  // 0: full trace length (trace processes only)
  ProcessSpec process;
  PartitionSpec partition;
  InfrequentThresholds thresholds;
  std::optional<std::vector<std::int64_t>> indicator_ids;
  OutputSpec outputs;
};

DiagnoseConfig parse_diagnose_config(const Json& doc);
DiagnoseConfig load_diagnose_config(const std::string& path);
Json run_diagnose(const DiagnoseConfig& config);

// Applies the output-directory override (OCB_OUTPUT_DIR) to relative paths
// and creates parent directories.
std::string resolve_output_path(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ocb
