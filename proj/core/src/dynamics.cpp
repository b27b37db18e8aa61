#include "nlsis/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlsis/error.hpp"
#include "nlsis/spectral.hpp"

namespace nlsis {

namespace {

using StateMatrix = Eigen::MatrixX2d;  // columns: S, I

constexpr double kNegativeTolerance = -1e-12;

StateMatrix pack(const State& s) {
  StateMatrix y(s.S.size(), 2);
  y.col(0) = s.S;
  y.col(1) = s.I;
  return y;
}

// Both species share one kernel product per evaluation.
StateMatrix rhs_matrix(const ModelParams& params, const StateMatrix& y) {
  const Kernel& kernel = *params.kernel;
  const Field& row = kernel.row_integral();
  const Field& beta = params.rates.beta;
  const Field& gamma = params.rates.gamma;

  StateMatrix ky = kernel.matrix() * y;
  StateMatrix out(y.rows(), 2);
  for (int i = 0; i < y.rows(); ++i) {
    const double s = y(i, 0);
    const double v = y(i, 1);
    const double total = s + v;
    const double incidence = total <= 1e-300 ? 0.0 : beta[i] * s * v / total;
    const double reaction = incidence - gamma[i] * v;
    out(i, 0) = params.d_S * (ky(i, 0) - row[i] * s) - reaction;
    out(i, 1) = params.d_I * (ky(i, 1) - row[i] * v) + reaction;
  }
  return out;
}

double sup_distance(const Field& a, const Field& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

Derivative rhs(const ModelParams& params, const State& state) {
  validate(params);
  require_field(params.mesh(), state.S, "S");
  require_field(params.mesh(), state.I, "I");
  if (state.S.minCoeff() < kNegativeTolerance || state.I.minCoeff() < kNegativeTolerance) {
    throw Error(ErrorCode::negative_state, "state has entries below -1e-12");
  }
  const StateMatrix d = rhs_matrix(params, pack(state));
  return Derivative{d.col(0), d.col(1)};
}

double max_stable_dt(const ModelParams& params) {
  const double rate = std::max(params.d_S, params.d_I) * params.kernel->row_integral().maxCoeff() +
                      std::max(params.rates.beta.maxCoeff(), params.rates.gamma.maxCoeff());
  return 0.5 / rate;
}

std::optional<double> proportionality_constant(const RateFields& rates) {
  const Field ratio = rates.beta.cwiseQuotient(rates.gamma);
  const double r = ratio[0];
  if ((ratio.array() - r).abs().maxCoeff() > 1e-12 * r) return std::nullopt;
  return r;
}

double lyapunov_V(const State& state, const EquilibriumResult& equilibrium, const Mesh& mesh) {
  require_field(mesh, state.S, "S");
  require_field(mesh, state.I, "I");
  if (equilibrium.I_tilde.minCoeff() <= 1e-14 || equilibrium.S_tilde.minCoeff() <= 1e-14) {
    throw Error(ErrorCode::division_guard, "Lyapunov functional needs a strictly positive equilibrium");
  }
  const Field ds = state.S - equilibrium.S_tilde;
  const Field di = state.I - equilibrium.I_tilde;
  const Field density =
      ds.cwiseProduct(ds).cwiseQuotient(equilibrium.S_tilde) +
      di.cwiseProduct(di).cwiseQuotient(equilibrium.I_tilde);
  return 0.5 * integrate(mesh, density);
}

Trajectory integrate_to(const ModelParams& params, const State& initial, double t_end, double dt,
                        const TrajectoryOptions& options) {
  validate(params);
  const Mesh& mesh = params.mesh();
  require_field(mesh, initial.S, "initial S");
  require_field(mesh, initial.I, "initial I");
  if (!(t_end > initial.t)) throw Error(ErrorCode::invalid_argument, "t_end must exceed the initial time");
  const double dt_max = max_stable_dt(params);
  if (!(dt > 0) || dt > dt_max * (1.0 + 1e-12)) {
    throw Error(ErrorCode::invalid_argument,
                "dt must lie in (0, " + std::to_string(dt_max) + "], got " + std::to_string(dt));
  }
  if (initial.S.minCoeff() < 0 || initial.I.minCoeff() < 0) {
    throw Error(ErrorCode::negative_state, "initial data must be nonnegative");
  }
  if (!(integrate(mesh, initial.I) > 0)) {
    throw Error(ErrorCode::invalid_argument, "initial infected mass must be positive");
  }

  const double dfe_level = params.N / mesh.length();
  std::optional<double> lyapunov_ratio;
  if (options.endemic && options.endemic->kind == EquilibriumKind::endemic) {
    const auto r = proportionality_constant(params.rates);
    if (r && *r > 1.0) lyapunov_ratio = r;
  }

  Trajectory traj;
  auto record = [&](const StateMatrix& y, double t) {
    TrajectorySample s;
    s.t = t;
    const Field S = y.col(0);
    const Field I = y.col(1);
    s.mass = integrate(mesh, S + I);
    s.dist_dfe = std::max((S.array() - dfe_level).abs().maxCoeff(), I.cwiseAbs().maxCoeff());
    if (options.endemic) {
      s.dist_endemic = std::max(sup_distance(S, options.endemic->S_tilde),
                                sup_distance(I, options.endemic->I_tilde));
      if (lyapunov_ratio) s.lyapunov = lyapunov_V(State{S, I, t}, *options.endemic, mesh);
    }
    s.infected_sup = I.cwiseAbs().maxCoeff();
    const double mean = integrate(mesh, S) / mesh.length();
    s.susceptible_dev_l2 = std::sqrt(mesh.weight() * (S.array() - mean).square().sum());
    if (std::abs(s.mass - params.N) > 1e-8 * params.N) {
      throw Error(ErrorCode::mass_drift, "total mass " + std::to_string(s.mass) + " at t=" +
                                             std::to_string(t) + " deviates from N=" +
                                             std::to_string(params.N));
    }
    traj.samples.push_back(s);
    if (options.snapshots) traj.snapshots.push_back(State{S, I, t});
  };

  const auto f = [&params](const StateMatrix& y) { return rhs_matrix(params, y); };
  // Recursive step halving keeps every accepted state above -1e-12.
  const auto advance = [&](auto&& self, StateMatrix& y, double h, int depth) -> void {
    StateMatrix next = rk4_step(y, h, f);
    if (next.minCoeff() >= kNegativeTolerance) {
      y = std::move(next);
      return;
    }
    if (depth >= 20) throw Error(ErrorCode::step_collapse, "positivity control exhausted 20 halvings");
    ++traj.halvings;
    self(self, y, 0.5 * h, depth + 1);
    self(self, y, 0.5 * h, depth + 1);
  };

  const double span = t_end - initial.t;
  const long n_steps = static_cast<long>(std::ceil(span / dt - 1e-9));
  const long stride = std::max(1L, static_cast<long>(std::floor(span / dt / 500.0)));

  StateMatrix y = pack(initial);
  double t = initial.t;
  record(y, t);
  for (long step = 1; step <= n_steps; ++step) {
    const double h = step == n_steps ? t_end - t : dt;
    if (h <= 0) break;
    advance(advance, y, h, 0);
    t = step == n_steps ? t_end : initial.t + step * dt;
    ++traj.steps;
    if (step % stride == 0 || step == n_steps) record(y, t);
  }
  traj.final_state = State{y.col(0), y.col(1), t};
  return traj;
}

double alpha_gap(const Kernel& kernel, double d_S) {
  if (!(d_S > 0)) throw Error(ErrorCode::nonpositive_diffusivity, "d_S must be > 0");
  Eigen::MatrixXd m = -d_S * kernel.matrix();
  m.diagonal() += d_S * kernel.row_integral();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::no_convergence, "eigensolver failed");
  return solver.eigenvalues()[1];
}

LongTimeReport classify_longtime(const ModelParams& params, const State& initial, double horizon,
                                 std::optional<double> dt, bool snapshots) {
  validate(params);
  if (!(horizon > 0)) throw Error(ErrorCode::invalid_argument, "horizon must be > 0");

  LongTimeReport report;
  report.r0 = 1.0 / mu_p(*params.kernel, params.d_I, params.rates).value;
  TrajectoryOptions options;
  options.snapshots = snapshots;
  if (report.r0 > 1.0 + 1e-9) {
    options.endemic = solve_equilibrium(params);
    report.endemic = options.endemic;
  }
  report.trajectory =
      integrate_to(params, initial, initial.t + horizon, dt.value_or(max_stable_dt(params)), options);

  const auto& samples = report.trajectory.samples;
  const TrajectorySample& last = samples.back();
  report.final_dist_dfe = last.dist_dfe;
  report.final_dist_endemic = last.dist_endemic;

  const auto tail_nonincreasing = [&samples](auto&& distance) {
    const std::size_t n = samples.size();
    const std::size_t start = n - std::max<std::size_t>(2, n / 10);
    for (std::size_t k = start + 1; k < n; ++k) {
      if (distance(samples[k]) > distance(samples[k - 1]) + 1e-12) return false;
    }
    return true;
  };

  const auto dfe_distance = [](const TrajectorySample& s) { return s.dist_dfe; };
  const auto endemic_distance = [](const TrajectorySample& s) { return *s.dist_endemic; };

  if (last.dist_dfe <= 1e-3 && tail_nonincreasing(dfe_distance)) {
    report.kind = LongTimeKind::converged_dfe;
  } else if (last.dist_endemic && *last.dist_endemic <= 1e-3 && tail_nonincreasing(endemic_distance)) {
    report.kind = LongTimeKind::converged_endemic;
  }

  const bool endemic_candidate = report.kind == LongTimeKind::converged_endemic ||
                                 (report.kind == LongTimeKind::undecided && last.dist_endemic);
  for (const auto& s : samples) {
    report.distance_curve.push_back(endemic_candidate ? *s.dist_endemic : s.dist_dfe);
  }
  return report;
}

const char* to_string(LongTimeKind kind) {
  switch (kind) {
    case LongTimeKind::converged_dfe: return "converged_dfe";
    case LongTimeKind::converged_endemic: return "converged_endemic";
    case LongTimeKind::undecided: return "undecided";
  }
  return "undecided";
}

}  // namespace nlsis
