#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlsis/config.hpp"
#include "nlsis/dynamics.hpp"
#include "nlsis/equilibria.hpp"

namespace nlsis {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunRecord {
  ScenarioConfig config;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;
  std::vector<CheckResult> checks;
  bool ok = false;  // true when every requested check passed
};

// Environment variable that overrides the configured worker count.
inline constexpr const char* kWorkersEnv = "NLSIS_WORKERS";

// Worker count for concurrent sweeps: env override, then config, then 1.
int resolve_workers(const ScenarioConfig& config);

ModelParams make_params(const ScenarioConfig& config);

// Initial state for the simulate task. Total mass equals N.
State make_initial(const ScenarioConfig& config, const Mesh& mesh);

// Runs the configured task, writes its outputs plus run_record.json into
// out_dir and returns the record. Task failures propagate as Error.
RunRecord run(const ScenarioConfig& config, const std::filesystem::path& out_dir);

std::string run_record_json(const RunRecord& record);

}  // namespace nlsis
