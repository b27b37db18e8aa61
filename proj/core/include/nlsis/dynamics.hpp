#pragma once

#include <optional>
#include <vector>

#include "nlsis/equilibria.hpp"
#include "nlsis/mesh.hpp"

namespace nlsis {

struct State {
  Field S;
  Field I;
  double t = 0.0;
};

struct Derivative {
  Field dS;
  Field dI;
};

/// Right-hand side of the semi-discrete system
///   S' = d_S (K - D) S - beta S I / (S + I) + gamma I
///   I' = d_I (K - D) I + beta S I / (S + I) - gamma I
/// with the incidence set to zero when S + I <= 1e-300.
/// Throws Error{negative_state} if any entry is below -1e-12.
Derivative rhs(const ModelParams& params, const State& state);

// Classical four-stage Runge-Kutta step for any Eigen vector/matrix state.
template <class Vec, class F>
Vec rk4_step(const Vec& y, double dt, F&& f) {
  const Vec k1 = f(y);
  const Vec k2 = f(Vec(y + 0.5 * dt * k1));
  const Vec k3 = f(Vec(y + 0.5 * dt * k2));
  const Vec k4 = f(Vec(y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// 0.5 / (max(d_S, d_I) max_i row_i + max_i max(beta_i, gamma_i)).
double max_stable_dt(const ModelParams& params);

struct TrajectorySample {
  double t = 0.0;
  double mass = 0.0;
  double dist_dfe = 0.0;
  std::optional<double> dist_endemic;
  std::optional<double> lyapunov;
  double infected_sup = 0.0;
  double susceptible_dev_l2 = 0.0;  // L2 norm of S minus its mesh average
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  State final_state;
  std::vector<State> snapshots;  // only filled when requested
  long steps = 0;
  long halvings = 0;
};

struct TrajectoryOptions {
  // Reference for dist_endemic and, when beta = r gamma with r > 1, for V.
  std::optional<EquilibriumResult> endemic;
  bool snapshots = false;
};

/// RK4 from initial to t_end with nominal step dt <= max_stable_dt(params).
/// A step that produces an entry below -1e-12 is redone as two half steps
/// (recursively, at most 20 halvings). Samples every max(1, floor(t_end/dt/500))
/// steps plus the final time.
Trajectory integrate_to(const ModelParams& params, const State& initial, double t_end, double dt,
                        const TrajectoryOptions& options = {});

// 1/2 integral [(S - S~)^2 / S~ + (I - I~)^2 / I~].
double lyapunov_V(const State& state, const EquilibriumResult& equilibrium, const Mesh& mesh);

// True when beta = r gamma for a single constant r (relative tolerance 1e-12).
std::optional<double> proportionality_constant(const RateFields& rates);

enum class LongTimeKind { converged_dfe, converged_endemic, undecided };

struct LongTimeReport {
  LongTimeKind kind = LongTimeKind::undecided;
  double r0 = 0.0;
  double final_dist_dfe = 0.0;
  std::optional<double> final_dist_endemic;
  std::vector<double> distance_curve;  // distance to the candidate equilibrium per sample
  std::optional<EquilibriumResult> endemic;
  Trajectory trajectory;
};

/// Integrates to the horizon at max_stable_dt and compares the final state
/// with the disease-free state and, when R0 > 1, the endemic one. Converged
/// means sup-norm distance <= 1e-3 and a nonincreasing distance over the last
/// 10% of samples.
LongTimeReport classify_longtime(const ModelParams& params, const State& initial, double horizon,
                                 std::optional<double> dt = std::nullopt,
                                 bool snapshots = false);

/// Smallest eigenvalue of -d_S (K - D) on mean-zero fields, i.e. the second
/// smallest eigenvalue of the full matrix.
double alpha_gap(const Kernel& kernel, double d_S);

const char* to_string(LongTimeKind kind);

}  // namespace nlsis
