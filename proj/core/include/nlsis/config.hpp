#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlsis/mesh.hpp"

namespace nlsis {

// Rate profiles on the mesh. Every spec must evaluate to a strictly positive field.
struct ConstantRate {
  double value = 1.0;
  bool operator==(const ConstantRate&) const = default;
};

// base + amplitude * cos(frequency * pi * x)
struct CosineRate {
  double base = 1.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  bool operator==(const CosineRate&) const = default;
};

// base + height * exp(-((x - center) / width)^2)
struct GaussianBumpRate {
  double base = 1.0;
  double height = 0.0;
  double width = 1.0;
  double center = 0.0;
  bool operator==(const GaussianBumpRate&) const = default;
};

// Tabulated values, linearly interpolated onto the mesh nodes. Without
// explicit positions the values sit on equally spaced points spanning [a, b].
struct TableRate {
  std::vector<double> values;
  std::vector<double> x;
  bool operator==(const TableRate&) const = default;
};

using RateSpec = std::variant<ConstantRate, CosineRate, GaussianBumpRate, TableRate>;

Field evaluate_rate(const RateSpec& spec, const Mesh& mesh, const char* name);

enum class Task { spectrum, equilibrium, simulate, sweep, limits };

const char* to_string(Task task);

// Either an explicit list or logspace(lo_exp, hi_exp, count).
struct GridSpec {
  std::vector<double> values;
  std::optional<std::array<double, 3>> logspace;
  bool operator==(const GridSpec&) const = default;

  std::vector<double> resolve() const;
};

struct SweepOptions {
  std::string parameter = "d_I";  // "d_I" (spectral rows) or "d_S" (equilibrium rows)
  GridSpec grid;
  bool operator==(const SweepOptions&) const = default;
};

struct InitialSpec {
  std::string type = "random";  // random | constant | bump
  std::uint64_t seed = 1;
  double infected_fraction = 0.5;  // share of N carried by I at t = 0
  double center = 0.0;             // bump only
  double width = 0.2;              // bump only
  bool operator==(const InitialSpec&) const = default;
};

struct SimulateOptions {
  double t_end = 100.0;
  std::optional<double> dt;  // defaults to the stability bound
  InitialSpec initial;
  bool snapshots = false;
  bool operator==(const SimulateOptions&) const = default;
};

struct LimitsOptions {
  std::vector<double> diffusivities = {10.0, 100.0, 1000.0};
  bool operator==(const LimitsOptions&) const = default;
};

struct ScenarioConfig {
  double a = -1.0;
  double b = 1.0;
  int n = 400;
  KernelSpec kernel = TriangleKernel{0.5};
  RateSpec beta = ConstantRate{2.0};
  RateSpec gamma = ConstantRate{1.0};
  double d_S = 1.0;
  double d_I = 1.0;
  double N = 2.0;
  Task task = Task::spectrum;
  SweepOptions sweep;
  SimulateOptions simulate;
  LimitsOptions limits;
  std::vector<std::string> checks;
  std::optional<int> workers;

  bool operator==(const ScenarioConfig&) const = default;
};

// Known names for ScenarioConfig::checks.
const std::vector<std::string>& known_checks();

/// Parses the JSON scenario format. Throws Error{config_invalid} with a
/// message naming the offending field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string emit_config(const ScenarioConfig& config);

}  // namespace nlsis
