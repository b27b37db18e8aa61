#include "nlsis/suite.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlsis/config.hpp"
#include "nlsis/error.hpp"
#include "nlsis/io.hpp"

namespace nlsis {

namespace {

using io::format_number;

const double kPi = std::numbers::pi;

Field cosine_field(const Mesh& mesh, double base, double amplitude) {
  return (base + amplitude * (kPi * mesh.nodes().array()).cos()).matrix();
}

Field constant_field(const Mesh& mesh, double c) { return Field::Constant(mesh.size(), c); }

double sup_distance(const Field& x, const Field& y) { return (x - y).cwiseAbs().maxCoeff(); }

double relative_sup(const Field& x, const Field& reference) {
  return sup_distance(x, reference) / reference.cwiseAbs().maxCoeff();
}

double r0_weighted(const Kernel& kernel, double d_I, const RateFields& rates) {
  return 1.0 / mu_p(kernel, d_I, rates).value;
}

ModelParams model(std::shared_ptr<const Kernel> kernel, Field beta, Field gamma, double d_S, double d_I,
                  double N) {
  ModelParams p;
  p.rates = make_rates(kernel->mesh(), std::move(beta), std::move(gamma));
  p.kernel = std::move(kernel);
  p.d_S = d_S;
  p.d_I = d_I;
  p.N = N;
  return p;
}

// Positive random initial data with total mass N split evenly between S and I.
State random_initial(const Mesh& mesh, double N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  State s;
  s.S.resize(mesh.size());
  s.I.resize(mesh.size());
  for (int i = 0; i < mesh.size(); ++i) {
    s.S[i] = u(rng);
    s.I[i] = u(rng);
  }
  s.S *= 0.5 * N / integrate(mesh, s.S);
  s.I *= 0.5 * N / integrate(mesh, s.I);
  return s;
}

TrajectorySet run_three(const ModelParams& params, double t_end, const TrajectoryOptions& options) {
  TrajectorySet out;
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    const State init = random_initial(params.mesh(), params.N, seed);
    out.emplace_back("seed " + std::to_string(seed),
                     integrate_to(params, init, t_end, max_stable_dt(params), options));
  }
  return out;
}

// Least-squares slope of log(values) against t.
double log_slope(const std::vector<double>& t, const std::vector<double>& values) {
  const std::size_t n = t.size();
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += t[i];
    my += std::log(values[i]);
  }
  mt /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (t[i] - mt) * (std::log(values[i]) - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  return sxy / sxx;
}

CriterionResult make(int id, std::string name, bool passed, std::string detail) {
  return {id, std::move(name), passed, std::move(detail), 0.0};
}

// Heterogeneous fixture used by the equilibrium, refinement and limit criteria.
Field hetero_beta(const Mesh& mesh) { return cosine_field(mesh, 1.0, 0.8); }

}  // namespace

std::shared_ptr<const Kernel> standard_kernel(int n) {
  return std::make_shared<const Kernel>(build_kernel(build_mesh(-1.0, 1.0, n), TriangleKernel{0.5}));
}

std::vector<RandomTrial> random_trials(const Mesh& mesh, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_rate(std::log(0.5), std::log(2.0));
  std::uniform_real_distribution<double> log_d(std::log(0.01), std::log(10.0));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_int_distribution<int> wavenumber(1, 3);
  // Even trials: smooth profile between two random levels. Odd trials: independent per node.
  const auto smooth = [&] {
    const double lo = log_rate(rng);
    const double hi = log_rate(rng);
    const int k = wavenumber(rng);
    const double phi = phase(rng);
    const Eigen::ArrayXd shape = 0.5 * (1.0 + (k * kPi * mesh.nodes().array() + phi).cos());
    return Field((lo + (hi - lo) * shape).exp().matrix());
  };
  const auto rough = [&] {
    Field f(mesh.size());
    for (int i = 0; i < mesh.size(); ++i) f[i] = std::exp(log_rate(rng));
    return f;
  };
  std::vector<RandomTrial> out;
  for (int t = 0; t < count; ++t) {
    Field beta = t % 2 == 0 ? smooth() : rough();
    Field gamma = t % 2 == 0 ? smooth() : rough();
    RandomTrial trial;
    trial.rates = make_rates(mesh, std::move(beta), std::move(gamma));
    trial.d_I = std::exp(log_d(rng));
    out.push_back(std::move(trial));
  }
  return out;
}

TrajectorySet dfe_trajectories() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const ModelParams p = model(kernel, constant_field(mesh, 1.0), constant_field(mesh, 2.0), 1.0, 1.0, 2.0);
  return run_three(p, 200.0, {});
}

TrajectorySet endemic_trajectories() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const ModelParams p = model(kernel, constant_field(mesh, 2.0), constant_field(mesh, 1.0), 1.0, 1.0, 2.0);
  return run_three(p, 200.0, {});
}

namespace {

ModelParams lyapunov_model() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const Field gamma = cosine_field(mesh, 1.0, 0.5);
  return model(kernel, 2.0 * gamma, gamma, 1.0, 0.5, 2.0);
}

}  // namespace

TrajectorySet lyapunov_trajectories() {
  const ModelParams p = lyapunov_model();
  TrajectoryOptions options;
  options.endemic = solve_equilibrium(p);
  return run_three(p, 200.0, options);
}

CriterionResult criterion_constant_r0() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const RateFields rates = make_rates(mesh, constant_field(mesh, 2.0), constant_field(mesh, 1.0));
  const SpectralReport r = r0_all_routes(*kernel, 1.0, rates);
  const double route_err = std::max({std::abs(r.r0_weighted - 2.0), std::abs(r.r0_variational - 2.0),
                                     std::abs(r.r0_nextgen - 2.0)});
  const double lp_err = std::abs(r.lambda_p + 1.0);
  return make(1, "constant-coefficient R0", route_err <= 1e-9 && lp_err <= 1e-10,
              "max |R0 - 2| = " + format_number(route_err) + ", |lambda_p + 1| = " + format_number(lp_err));
}

CriterionResult criterion_sign_relation(const LambdaPFn& lambda, int trials) {
  auto kernel = standard_kernel();
  int violations = 0, skipped = 0;
  std::string first;
  for (const RandomTrial& t : random_trials(kernel->mesh(), trials, 20261019)) {
    const double lp = lambda(*kernel, t.d_I, t.rates);
    if (std::abs(lp) <= 1e-9) {
      ++skipped;
      continue;
    }
    const double r0 = r0_weighted(*kernel, t.d_I, t.rates);
    if ((lp > 0) != (r0 < 1.0)) {
      if (first.empty()) {
        first = "; first at d_I=" + format_number(t.d_I) + " lambda_p=" + format_number(lp) +
                " R0=" + format_number(r0);
      }
      ++violations;
    }
  }
  return make(2, "sign relation lambda_p vs 1 - R0", violations == 0,
              std::to_string(violations) + " violations, " + std::to_string(skipped) + " near-zero skipped, " +
                  std::to_string(trials) + " trials" + first);
}

CriterionResult criterion_route_agreement(int trials) {
  auto kernel = standard_kernel();
  int violations = 0;
  double worst = 0.0;
  for (const RandomTrial& t : random_trials(kernel->mesh(), trials, 20261019)) {
    const SpectralReport r = r0_all_routes(*kernel, t.d_I, t.rates);
    const double hi = std::max({r.r0_weighted, r.r0_variational, r.r0_nextgen});
    const double lo = std::min({r.r0_weighted, r.r0_variational, r.r0_nextgen});
    const double spread = (hi - lo) / hi;
    worst = std::max(worst, spread);
    if (spread > 1e-7) ++violations;
  }
  return make(3, "R0 route agreement", violations == 0,
              std::to_string(violations) + " violations in " + std::to_string(trials) +
                  " trials, max relative spread " + format_number(worst));
}

CriterionResult criterion_lambda_limits() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const RateFields rates = make_rates(mesh, hetero_beta(mesh), constant_field(mesh, 1.0));
  const Field diff = rates.gamma - rates.beta;

  const double small_gap = lambda_p_value(*kernel, 1e-4, rates) - diff.minCoeff();
  const double large_gap = lambda_p_value(*kernel, 1e4, rates) - diff.mean();

  const std::vector<double> grid = GridSpec{{}, std::array<double, 3>{-3.0, 3.0, 25.0}}.resolve();
  const std::vector<double> lp = lambda_p_monotonicity_scan(*kernel, rates, grid);
  int drops = 0;
  for (std::size_t i = 1; i < lp.size(); ++i) {
    if (!(lp[i] > lp[i - 1] - 1e-10)) ++drops;
  }
  const bool ok = std::abs(small_gap) <= 5e-3 && std::abs(large_gap) <= 1e-4 && drops == 0;
  return make(4, "lambda_p diffusion limits and monotonicity", ok,
              "small-d gap " + format_number(small_gap) + " (tol 5e-3), large-d gap " + format_number(large_gap) +
                  " (tol 1e-4), " + std::to_string(drops) + " monotonicity drops over 25 points");
}

CriterionResult criterion_d_star() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const Field beta = (1.0 + 1.5 * (-20.0 * mesh.nodes().array().square()).exp()).matrix();
  const RateFields rates = make_rates(mesh, beta, constant_field(mesh, 1.4));
  const DStarResult ds = find_d_star(*kernel, rates, 1e-3, 1e3);
  if (!ds.d_star) return make(5, "threshold diffusivity d*", false, "no root: " + ds.reason);
  const double below = lambda_p_value(*kernel, 0.5 * *ds.d_star, rates);
  const double above = lambda_p_value(*kernel, 2.0 * *ds.d_star, rates);
  return make(5, "threshold diffusivity d*", below < -1e-6 && above > 1e-6,
              "d* = " + format_number(*ds.d_star) + ", lambda_p(d*/2) = " + format_number(below) +
                  ", lambda_p(2d*) = " + format_number(above));
}

CriterionResult criterion_dfe_convergence(const TrajectorySet& runs) {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const RateFields rates = make_rates(mesh, constant_field(mesh, 1.0), constant_field(mesh, 2.0));
  const double lp = lambda_p_value(*kernel, 1.0, rates);
  double worst_dist = 0.0;
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& [name, traj] : runs) {
    const Field dfe = Field::Constant(mesh.size(), 1.0);
    worst_dist = std::max({worst_dist, sup_distance(traj.final_state.S, dfe),
                           traj.final_state.I.cwiseAbs().maxCoeff()});
    std::vector<double> t, sup;
    const auto& s = traj.samples;
    for (std::size_t k = s.size() / 2; k < s.size(); ++k) {
      if (s[k].infected_sup > 1e-250) {
        t.push_back(s[k].t);
        sup.push_back(s[k].infected_sup);
      }
    }
    slowest = t.size() < 2 ? 0.0 : std::min(slowest, -log_slope(t, sup));
  }
  const bool ok = worst_dist <= 1e-4 && slowest >= 0.9 * (lp / 2.0);
  return make(6, "DFE convergence for R0 < 1", ok,
              "max final distance " + format_number(worst_dist) + ", slowest fitted I decay " +
                  format_number(slowest) + " vs 0.9*lambda_p/2 = " + format_number(0.45 * lp));
}

CriterionResult criterion_endemic_equilibrium() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const ModelParams p = model(kernel, hetero_beta(mesh), constant_field(mesh, 1.0), 0.1, 0.1, 2.0);
  const MonotoneSolution reduced = solve_reduced_I(p);
  const EquilibriumResult eq = recover_equilibrium(p, reduced.value);
  const double residual = steady_state_residual(p, eq.S_tilde, eq.I_tilde);
  const Field k = p.d_S * eq.S_tilde + p.d_I * eq.I_tilde;
  const double k_dev = (k.array() - eq.k).abs().maxCoeff();

  const ResidualFn F = [&p](const Field& I) { return reduced_residual(p, I); };
  const double tau = reduced_step(p);
  double probe = 0.0;
  for (double factor : {0.9, 1.1}) {
    const Field start = (factor * reduced.value).cwiseMin(1.0);
    const Field back = relax_to_fixed_point(F, start, tau, 1e-14, 10'000'000);
    probe = std::max(probe, sup_distance(back, reduced.value));
  }
  const bool ok = reduced.gap <= 1e-10 && reduced.ordered && reduced.monotone && residual <= 1e-8 &&
                  k_dev <= 1e-8 * eq.k && probe <= 1e-8;
  return make(7, "endemic equilibrium by monotone iteration", ok,
              "bracket gap " + format_number(reduced.gap) + " after " + std::to_string(reduced.iterations) +
                  " iterations, residual " + format_number(residual) + ", k deviation " +
                  format_number(k_dev / eq.k) + " relative, perturbation probe " + format_number(probe));
}

CriterionResult criterion_global_convergence(const TrajectorySet& runs) {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const ModelParams p = model(kernel, constant_field(mesh, 2.0), constant_field(mesh, 1.0), 1.0, 1.0, 2.0);
  // Explicit constant equilibrium for beta = r gamma: S = N/(r|Omega|), I = (r-1)N/(r|Omega|).
  const double r = 2.0;
  const double S_exact = p.N / (r * mesh.length());
  const double I_exact = (r - 1.0) * p.N / (r * mesh.length());
  const EquilibriumResult eq = solve_equilibrium(p);
  const double formula_gap = std::max((eq.S_tilde.array() - S_exact).abs().maxCoeff(),
                                      (eq.I_tilde.array() - I_exact).abs().maxCoeff());
  double worst = 0.0;
  for (const auto& [name, traj] : runs) {
    worst = std::max({worst, (traj.final_state.S.array() - S_exact).abs().maxCoeff(),
                      (traj.final_state.I.array() - I_exact).abs().maxCoeff()});
  }
  return make(8, "global convergence for d_S = d_I", worst <= 1e-4 && formula_gap <= 1e-8,
              "max final distance to (0.5, 0.5) " + format_number(worst) + ", solver vs formula " +
                  format_number(formula_gap));
}

CriterionResult criterion_lyapunov(const TrajectorySet& runs) {
  double worst_rise = 0.0;
  int violations = 0;
  std::size_t samples = 0;
  for (const auto& [name, traj] : runs) {
    const auto& s = traj.samples;
    samples += s.size();
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (!s[k].lyapunov || !s[k - 1].lyapunov) {
        ++violations;
        continue;
      }
      const double rise = *s[k].lyapunov - *s[k - 1].lyapunov;
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-10) ++violations;
    }
  }
  return make(9, "Lyapunov functional nonincreasing", violations == 0 && !runs.empty(),
              std::to_string(violations) + " increases over " + std::to_string(samples) +
                  " samples, largest increase " + format_number(worst_rise));
}

CriterionResult criterion_conservation(const std::vector<const TrajectorySet*>& runs) {
  const double N = 2.0;
  double worst = 0.0;
  std::size_t count = 0;
  for (const TrajectorySet* set : runs) {
    for (const auto& [name, traj] : *set) {
      ++count;
      for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.mass - N));
    }
  }
  return make(10, "mass conservation along trajectories", worst <= 1e-10 * N && count > 0,
              "max |mass - N| = " + format_number(worst) + " over " + std::to_string(count) + " trajectories");
}

CriterionResult criterion_limit_theorems() {
  auto kernel = standard_kernel();
  const Mesh& mesh = kernel->mesh();
  const double N = 2.0;
  std::ostringstream detail;
  bool ok = true;

  // (a) constant rates: the finite-d equilibrium already equals the large-d constants.
  {
    const ModelParams p = model(kernel, constant_field(mesh, 2.0), constant_field(mesh, 1.0), 1.0, 1.0, N);
    const auto [S, I] = limit_profile_both_infinity(p.rates, N, mesh);
    const EquilibriumResult eq = solve_equilibrium(p);
    const double gap = std::max((eq.S_tilde.array() - S).abs().maxCoeff(), (eq.I_tilde.array() - I).abs().maxCoeff());
    const double formula = std::max(std::abs(S - 0.5), std::abs(I - 0.5));
    ok = ok && gap <= 1e-8 && formula <= 1e-15;
    detail << "(a) gap " << format_number(gap) << "; ";
  }

  const Field beta = cosine_field(mesh, 1.5, 0.8);
  const Field gamma = constant_field(mesh, 1.0);

  // (b) d_S large, d_I fixed.
  {
    const ModelParams p = model(kernel, beta, gamma, 1e3, 0.5, N);
    const LimitProfile lim = limit_profile_ds_infinity(*kernel, p.d_I, p.rates, N);
    const EquilibriumResult eq = solve_equilibrium(p);
    const double gap = std::max(relative_sup(eq.S_tilde, lim.S), relative_sup(eq.I_tilde, lim.I));
    ok = ok && gap <= 2e-2;
    detail << "(b) relative gap " << format_number(gap) << "; ";
  }

  // (c) d_I large, d_S fixed.
  {
    const ModelParams p = model(kernel, beta, gamma, 1.0, 1e3, N);
    const DiInfinityProfile lim = limit_profile_di_infinity(*kernel, p.d_S, p.rates, N);
    const EquilibriumResult eq = solve_equilibrium(p);
    const double gap = std::max(relative_sup(eq.S_tilde, lim.S),
                                relative_sup(eq.I_tilde, Field::Constant(mesh.size(), lim.I_star)));
    ok = ok && gap <= 2e-2 && lim.residual <= 1e-8;
    detail << "(c) relative gap " << format_number(gap) << ", profile residual " << format_number(lim.residual);
  }
  return make(11, "large-diffusion limit profiles", ok, detail.str());
}

CriterionResult criterion_mesh_refinement() {
  double lp[2], r0[2];
  int idx = 0;
  for (int n : {200, 800}) {
    auto kernel = standard_kernel(n);
    const Mesh& mesh = kernel->mesh();
    const RateFields rates = make_rates(mesh, hetero_beta(mesh), constant_field(mesh, 1.0));
    lp[idx] = lambda_p_value(*kernel, 0.1, rates);
    r0[idx] = r0_weighted(*kernel, 0.1, rates);
    ++idx;
  }
  const double lp_rel = std::abs(lp[1] - lp[0]) / std::abs(lp[1]);
  const double r0_rel = std::abs(r0[1] - r0[0]) / std::abs(r0[1]);
  return make(12, "mesh refinement consistency", lp_rel <= 1e-3 && r0_rel <= 1e-3,
              "lambda_p relative change " + format_number(lp_rel) + ", R0 relative change " +
                  format_number(r0_rel) + " between n = 200 and 800");
}

std::vector<CriterionResult> run_criteria(const std::set<int>& selected) {
  const auto want = [&](int id) { return selected.empty() || selected.count(id) > 0; };
  // Wall-clock budgets in seconds, where one is stated.
  const auto budget = [](int id) -> std::optional<double> {
    switch (id) {
      case 1: return 5.0;
      case 2: return 120.0;
      case 5: return 30.0;
      case 6: return 60.0;
      case 11: return 300.0;
      default: return std::nullopt;
    }
  };

  std::vector<CriterionResult> rows;
  std::optional<TrajectorySet> dfe, endemic, lyap;
  const auto guarded = [&](int id, const std::string& name, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult row;
    try {
      row = body();
    } catch (const std::exception& e) {
      row = make(id, name, false, std::string("error: ") + e.what());
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (const auto limit = budget(id); limit && row.seconds > *limit) {
      row.passed = false;
      row.detail += "; over budget (" + format_number(*limit) + " s)";
    }
    rows.push_back(row);
  };

  if (want(1)) guarded(1, "constant-coefficient R0", [] { return criterion_constant_r0(); });
  if (want(2)) guarded(2, "sign relation lambda_p vs 1 - R0", [] { return criterion_sign_relation(); });
  if (want(3)) guarded(3, "R0 route agreement", [] { return criterion_route_agreement(); });
  if (want(4)) guarded(4, "lambda_p diffusion limits and monotonicity", [] { return criterion_lambda_limits(); });
  if (want(5)) guarded(5, "threshold diffusivity d*", [] { return criterion_d_star(); });
  if (want(6) || want(10)) {
    guarded(6, "DFE convergence for R0 < 1", [&] {
      dfe = dfe_trajectories();
      return criterion_dfe_convergence(*dfe);
    });
    if (!want(6)) rows.pop_back();
  }
  if (want(7)) guarded(7, "endemic equilibrium by monotone iteration", [] { return criterion_endemic_equilibrium(); });
  if (want(8) || want(10)) {
    guarded(8, "global convergence for d_S = d_I", [&] {
      endemic = endemic_trajectories();
      return criterion_global_convergence(*endemic);
    });
    if (!want(8)) rows.pop_back();
  }
  if (want(9) || want(10)) {
    guarded(9, "Lyapunov functional nonincreasing", [&] {
      lyap = lyapunov_trajectories();
      return criterion_lyapunov(*lyap);
    });
    if (!want(9)) rows.pop_back();
  }
  if (want(10)) {
    guarded(10, "mass conservation along trajectories", [&] {
      if (!dfe || !endemic || !lyap) {
        return make(10, "mass conservation along trajectories", false, "trajectory generation failed");
      }
      return criterion_conservation({&*dfe, &*endemic, &*lyap});
    });
  }
  if (want(11)) guarded(11, "large-diffusion limit profiles", [] { return criterion_limit_theorems(); });
  if (want(12)) guarded(12, "mesh refinement consistency", [] { return criterion_mesh_refinement(); });
  return rows;
}

SuiteReport theorem_suite(const std::filesystem::path& out_dir, const std::set<int>& selected) {
  const auto start = std::chrono::steady_clock::now();
  SuiteReport report;
  report.rows = run_criteria(selected);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.passed = std::all_of(report.rows.begin(), report.rows.end(),
                              [](const CriterionResult& r) { return r.passed; });

  std::string csv = "id,name,passed,seconds,detail\n";
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), '"', '\'');
    csv += std::to_string(r.id) + ",\"" + r.name + "\"," + (r.passed ? "pass" : "fail") + ',' +
           format_number(r.seconds) + ",\"" + detail + "\"\n";
    j["rows"].push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds},
                         {"detail", r.detail}});
  }
  j["wall_seconds"] = report.wall_seconds;
  j["passed"] = report.passed;
  io::write_text(out_dir / "suite.csv", csv);
  io::write_text(out_dir / "suite.json", j.dump(2) + "\n");
  report.outputs = {out_dir / "suite.csv", out_dir / "suite.json"};
  return report;
}

}  // namespace nlsis
