#pragma once

#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nlsis/dynamics.hpp"
#include "nlsis/equilibria.hpp"
#include "nlsis/spectral.hpp"

namespace nlsis {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Signature of a principal-value routine; replaceable for mutation checks.
using LambdaPFn = std::function<double(const Kernel&, double, const RateFields&)>;

// Default fixture: (-1, 1), n nodes, triangle kernel with delta = 0.5.
std::shared_ptr<const Kernel> standard_kernel(int n = 400);

struct RandomTrial {
  RateFields rates;
  double d_I = 1.0;
};

// Rates within [0.5, 2] (alternating smooth random profiles and independent
// log-uniform node values), d_I log-uniform on [0.01, 10].
std::vector<RandomTrial> random_trials(const Mesh& mesh, int count, std::uint64_t seed);

// Named trajectories shared by the dynamics criteria and the conservation check.
using TrajectorySet = std::vector<std::pair<std::string, Trajectory>>;

TrajectorySet dfe_trajectories();
TrajectorySet endemic_trajectories();
TrajectorySet lyapunov_trajectories();

CriterionResult criterion_constant_r0();
CriterionResult criterion_sign_relation(const LambdaPFn& lambda = lambda_p_value, int trials = 100);
CriterionResult criterion_route_agreement(int trials = 100);
CriterionResult criterion_lambda_limits();
CriterionResult criterion_d_star();
CriterionResult criterion_dfe_convergence(const TrajectorySet& runs);
CriterionResult criterion_endemic_equilibrium();
CriterionResult criterion_global_convergence(const TrajectorySet& runs);
CriterionResult criterion_lyapunov(const TrajectorySet& runs);
CriterionResult criterion_conservation(const std::vector<const TrajectorySet*>& runs);
CriterionResult criterion_limit_theorems();
CriterionResult criterion_mesh_refinement();

inline constexpr int kCriterionCount = 12;

// Runs the selected criteria (all when empty). Failures are recorded, never thrown.
std::vector<CriterionResult> run_criteria(const std::set<int>& selected = {});

struct SuiteReport {
  std::vector<CriterionResult> rows;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;
  bool passed = false;
};

// Runs the battery and writes suite.csv and suite.json into out_dir.
SuiteReport theorem_suite(const std::filesystem::path& out_dir, const std::set<int>& selected = {});

}  // namespace nlsis
