#include "nlsis/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nlsis/error.hpp"
#include "nlsis/io.hpp"
#include "nlsis/spectral.hpp"

namespace nlsis {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

bool wants(const ScenarioConfig& config, const std::string& check) {
  return std::find(config.checks.begin(), config.checks.end(), check) != config.checks.end();
}

bool sweeps_d_I(const ScenarioConfig& config) {
  return config.task == Task::sweep && config.sweep.parameter == "d_I";
}

// Rejects checks that have nothing to inspect for the configured task.
void require_applicable_checks(const ScenarioConfig& config) {
  for (std::size_t i = 0; i < config.checks.size(); ++i) {
    const std::string& name = config.checks[i];
    bool applicable = true;
    if (name == "mass_conservation") {
      applicable = config.task == Task::simulate;
    } else if (name == "k_constant") {
      applicable = config.task == Task::equilibrium || config.task == Task::limits ||
                   (config.task == Task::sweep && config.sweep.parameter == "d_S");
    } else if (name == "monotonicity") {
      applicable = config.task == Task::spectrum || sweeps_d_I(config);
    }
    if (!applicable) {
      throw Error(ErrorCode::config_invalid, "checks[" + std::to_string(i) + "]: check \"" + name +
                                                 "\" does not apply to task " + to_string(config.task));
    }
  }
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& text) {
    const fs::path path = dir_ / name;
    io::write_text(path, text);
    paths_.push_back(path);
  }

  const std::vector<fs::path>& paths() const { return paths_; }

 private:
  fs::path dir_;
  std::vector<fs::path> paths_;
};

std::string sign_relation_failure(const SpectralReport& r) {
  if (std::abs(r.lambda_p) <= 1e-9) return {};
  const double r0 = r.r0_weighted;
  if ((r.lambda_p > 0) == (r0 < 1.0)) return {};
  return "d_I=" + io::format_number(r.d_I) + " lambda_p=" + io::format_number(r.lambda_p) +
         " R0=" + io::format_number(r0);
}

double route_spread(const SpectralReport& r) {
  const double lo = std::min({r.r0_weighted, r.r0_variational, r.r0_nextgen});
  const double hi = std::max({r.r0_weighted, r.r0_variational, r.r0_nextgen});
  return (hi - lo) / std::abs(hi);
}

void check_spectral(const std::vector<SpectralReport>& reports, const ScenarioConfig& config,
                    std::vector<CheckResult>& checks) {
  if (wants(config, "sign_relation")) {
    CheckResult c{"sign_relation", true, {}};
    int violations = 0;
    for (const auto& r : reports) {
      const std::string failure = sign_relation_failure(r);
      if (!failure.empty()) {
        ++violations;
        if (c.detail.empty()) c.detail = failure;
      }
    }
    c.passed = violations == 0;
    c.detail = std::to_string(violations) + " violations over " + std::to_string(reports.size()) +
               " points" + (c.detail.empty() ? "" : "; first: " + c.detail);
    checks.push_back(c);
  }
  if (wants(config, "route_agreement")) {
    double worst = 0.0;
    for (const auto& r : reports) worst = std::max(worst, route_spread(r));
    checks.push_back({"route_agreement", worst <= 1e-7,
                      "max relative spread " + io::format_number(worst) + " (tolerance 1e-7)"});
  }
}

CheckResult monotonicity_check(const std::vector<double>& d, const std::vector<double>& lp) {
  int violations = 0;
  for (std::size_t i = 1; i < lp.size(); ++i) {
    if (!(lp[i] > lp[i - 1] - 1e-10)) ++violations;
  }
  return {"monotonicity", violations == 0,
          std::to_string(violations) + " decreasing steps over " + std::to_string(d.size()) +
              " grid points"};
}

CheckResult k_constant_check(const std::vector<EquilibriumResult>& eqs,
                             const std::vector<std::pair<double, double>>& diffusivities) {
  double worst = 0.0;
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    const auto& eq = eqs[i];
    if (eq.kind != EquilibriumKind::endemic) continue;
    const auto [d_S, d_I] = diffusivities[i];
    const Field k = d_S * eq.S_tilde + d_I * eq.I_tilde;
    worst = std::max(worst, (k.array() - eq.k).abs().maxCoeff() / eq.k);
  }
  return {"k_constant", worst <= 1e-8,
          "max relative deviation " + io::format_number(worst) + " (tolerance 1e-8)"};
}

template <class Fn>
auto parallel_map(std::size_t count, int workers, Fn&& fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int spawn = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int w = 1; w < spawn; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<R> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

// Re-raises a task error with the sweep point that produced it.
template <class Fn>
auto with_context(const std::string& context, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.message());
  }
}

void run_spectrum(const ScenarioConfig& config, const ModelParams& params, Outputs& out,
                  std::vector<CheckResult>& checks) {
  const SpectralReport report = r0_all_routes(*params.kernel, params.d_I, params.rates);
  out.write("spectral.json", io::spectral_json(report));
  out.write("spectral.csv", io::spectral_csv_header() + io::spectral_csv_row(report));
  out.write("principal_eigenvector.csv", io::field_csv(params.mesh(), report.lambda_p_eigvec));
  check_spectral({report}, config, checks);
  if (wants(config, "monotonicity")) {
    std::vector<double> grid = config.sweep.grid.resolve();
    if (grid.empty()) grid = GridSpec{{}, std::array<double, 3>{-3.0, 3.0, 13.0}}.resolve();
    checks.push_back(monotonicity_check(grid, lambda_p_monotonicity_scan(*params.kernel, params.rates, grid)));
  }
}

void run_equilibrium(const ScenarioConfig& config, const ModelParams& params, Outputs& out,
                     std::vector<CheckResult>& checks) {
  const EquilibriumResult eq = solve_equilibrium(params);
  out.write("equilibrium.csv", io::equilibrium_csv(params.mesh(), eq));
  out.write("equilibrium.json", io::equilibrium_json(eq));
  if (wants(config, "sign_relation") || wants(config, "route_agreement")) {
    check_spectral({r0_all_routes(*params.kernel, params.d_I, params.rates)}, config, checks);
  }
  if (wants(config, "k_constant")) {
    checks.push_back(k_constant_check({eq}, {{params.d_S, params.d_I}}));
  }
}

void run_simulate(const ScenarioConfig& config, const ModelParams& params, Outputs& out,
                  std::vector<CheckResult>& checks) {
  const State initial = make_initial(config, params.mesh());
  const LongTimeReport report = classify_longtime(params, initial, config.simulate.t_end,
                                                  config.simulate.dt, config.simulate.snapshots);
  const Trajectory& traj = report.trajectory;
  out.write("trajectory.csv", io::trajectory_csv(traj));
  out.write("final_S.csv", io::field_csv(params.mesh(), traj.final_state.S));
  out.write("final_I.csv", io::field_csv(params.mesh(), traj.final_state.I));
  if (config.simulate.snapshots) {
    std::ostringstream s;
    s << "t,node,S,I\n";
    for (const State& st : traj.snapshots) {
      for (int i = 0; i < params.mesh().size(); ++i) {
        s << io::format_number(st.t) << ',' << io::format_number(params.mesh().node(i)) << ','
          << io::format_number(st.S[i]) << ',' << io::format_number(st.I[i]) << '\n';
      }
    }
    out.write("snapshots.csv", s.str());
  }
  json summary;
  summary["classification"] = to_string(report.kind);
  summary["r0"] = report.r0;
  summary["final_dist_dfe"] = report.final_dist_dfe;
  if (report.final_dist_endemic) summary["final_dist_endemic"] = *report.final_dist_endemic;
  summary["steps"] = traj.steps;
  summary["halvings"] = traj.halvings;
  summary["samples"] = traj.samples.size();
  out.write("classification.json", summary.dump(2) + "\n");

  if (wants(config, "sign_relation") || wants(config, "route_agreement")) {
    check_spectral({r0_all_routes(*params.kernel, params.d_I, params.rates)}, config, checks);
  }
  if (wants(config, "mass_conservation")) {
    double worst = 0.0;
    for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.mass - params.N));
    checks.push_back({"mass_conservation", worst <= 1e-10 * params.N,
                      "max |mass - N| = " + io::format_number(worst) + " over " +
                          std::to_string(traj.samples.size()) + " samples"});
  }
}

void run_sweep(const ScenarioConfig& config, const ModelParams& params, Outputs& out,
               std::vector<CheckResult>& checks) {
  const std::vector<double> grid = config.sweep.grid.resolve();
  const int workers = resolve_workers(config);

  if (config.sweep.parameter == "d_I") {
    const auto reports = parallel_map(grid.size(), workers, [&](std::size_t i) {
      return with_context("sweep point " + std::to_string(i) + " (d_I=" + io::format_number(grid[i]) + ")",
                          [&] { return r0_all_routes(*params.kernel, grid[i], params.rates); });
    });
    std::string csv = io::spectral_csv_header();
    std::vector<double> lp;
    for (const auto& r : reports) {
      csv += io::spectral_csv_row(r);
      lp.push_back(r.lambda_p);
    }
    out.write("sweep.csv", csv);

    int sign_changes = 0;
    for (std::size_t i = 1; i < lp.size(); ++i) {
      if ((lp[i - 1] < 0) != (lp[i] < 0)) ++sign_changes;
    }
    const DStarResult ds = find_d_star(*params.kernel, params.rates, grid.front(), grid.back());
    json summary;
    summary["parameter"] = "d_I";
    summary["points"] = grid.size();
    summary["lambda_p_sign_changes"] = sign_changes;
    if (ds.d_star) {
      summary["d_star"] = *ds.d_star;
    } else {
      summary["d_star"] = nullptr;
      summary["reason"] = ds.reason;
    }
    summary["d_star_iterations"] = ds.iterations;
    out.write("sweep_summary.json", summary.dump(2) + "\n");

    check_spectral(reports, config, checks);
    if (wants(config, "monotonicity")) checks.push_back(monotonicity_check(grid, lp));
    return;
  }

  const auto eqs = parallel_map(grid.size(), workers, [&](std::size_t i) {
    return with_context("sweep point " + std::to_string(i) + " (d_S=" + io::format_number(grid[i]) + ")",
                        [&] {
                          ModelParams p = params;
                          p.d_S = grid[i];
                          return solve_equilibrium(p);
                        });
  });
  std::string csv = "d_S,kind,k,S_min,S_max,I_min,I_max,I_integral,residual,iterations\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& eq = eqs[i];
    csv += io::format_number(grid[i]) + ',' + io::to_string(eq.kind) + ',' + io::format_number(eq.k) +
           ',' + io::format_number(eq.S_tilde.minCoeff()) + ',' + io::format_number(eq.S_tilde.maxCoeff()) +
           ',' + io::format_number(eq.I_tilde.minCoeff()) + ',' + io::format_number(eq.I_tilde.maxCoeff()) +
           ',' + io::format_number(integrate(params.mesh(), eq.I_tilde)) + ',' +
           io::format_number(eq.residual) + ',' + std::to_string(eq.iterations) + '\n';
  }
  out.write("sweep.csv", csv);
  if (wants(config, "sign_relation") || wants(config, "route_agreement")) {
    check_spectral({r0_all_routes(*params.kernel, params.d_I, params.rates)}, config, checks);
  }
  if (wants(config, "k_constant")) {
    std::vector<std::pair<double, double>> ds;
    for (double d : grid) ds.emplace_back(d, params.d_I);
    checks.push_back(k_constant_check(eqs, ds));
  }
}

double relative_sup(const Field& x, const Field& reference) {
  return (x - reference).cwiseAbs().maxCoeff() / reference.cwiseAbs().maxCoeff();
}

void run_limits(const ScenarioConfig& config, const ModelParams& params, Outputs& out,
                std::vector<CheckResult>& checks) {
  const Mesh& mesh = params.mesh();
  const auto& ds_list = config.limits.diffusivities;
  json summary;
  std::string comparison = "limit,d,kind,rel_sup_S,rel_sup_I\n";
  std::vector<EquilibriumResult> finite;
  std::vector<std::pair<double, double>> finite_d;

  try {
    const auto [S, I] = limit_profile_both_infinity(params.rates, params.N, mesh);
    summary["both_infinity"] = {{"S", S}, {"I", I}};
  } catch (const Error& e) {
    summary["both_infinity"] = {{"error", e.what()}};
  }

  const auto solve_at = [&](double d_S, double d_I) {
    ModelParams p = params;
    p.d_S = d_S;
    p.d_I = d_I;
    return with_context("equilibrium at d_S=" + io::format_number(d_S) + ", d_I=" + io::format_number(d_I),
                        [&] { return solve_equilibrium(p); });
  };
  const int workers = resolve_workers(config);

  try {
    const LimitProfile lim = limit_profile_ds_infinity(*params.kernel, params.d_I, params.rates, params.N);
    const auto eqs = parallel_map(ds_list.size(), workers,
                                  [&](std::size_t i) { return solve_at(ds_list[i], params.d_I); });
    std::ostringstream csv;
    csv << "node,S_limit,I_limit";
    for (double d : ds_list) csv << ",S_d" << io::format_number(d) << ",I_d" << io::format_number(d);
    csv << '\n';
    for (int i = 0; i < mesh.size(); ++i) {
      csv << io::format_number(mesh.node(i)) << ',' << io::format_number(lim.S[i]) << ','
          << io::format_number(lim.I[i]);
      for (const auto& eq : eqs) csv << ',' << io::format_number(eq.S_tilde[i]) << ',' << io::format_number(eq.I_tilde[i]);
      csv << '\n';
    }
    out.write("limit_ds_infinity.csv", csv.str());
    for (std::size_t k = 0; k < ds_list.size(); ++k) {
      comparison += "d_S_infinity," + io::format_number(ds_list[k]) + ',' + io::to_string(eqs[k].kind) + ',' +
                    io::format_number(relative_sup(eqs[k].S_tilde, lim.S)) + ',' +
                    io::format_number(relative_sup(eqs[k].I_tilde, lim.I)) + '\n';
      finite.push_back(eqs[k]);
      finite_d.emplace_back(ds_list[k], params.d_I);
    }
    summary["ds_infinity"] = {{"written", "limit_ds_infinity.csv"}};
  } catch (const Error& e) {
    summary["ds_infinity"] = {{"error", e.what()}};
  }

  try {
    const DiInfinityProfile lim = limit_profile_di_infinity(*params.kernel, params.d_S, params.rates, params.N);
    const Field I_lim = Field::Constant(mesh.size(), lim.I_star);
    const auto eqs = parallel_map(ds_list.size(), workers,
                                  [&](std::size_t i) { return solve_at(params.d_S, ds_list[i]); });
    std::ostringstream csv;
    csv << "node,S_limit,I_limit";
    for (double d : ds_list) csv << ",S_d" << io::format_number(d) << ",I_d" << io::format_number(d);
    csv << '\n';
    for (int i = 0; i < mesh.size(); ++i) {
      csv << io::format_number(mesh.node(i)) << ',' << io::format_number(lim.S[i]) << ','
          << io::format_number(lim.I_star);
      for (const auto& eq : eqs) csv << ',' << io::format_number(eq.S_tilde[i]) << ',' << io::format_number(eq.I_tilde[i]);
      csv << '\n';
    }
    out.write("limit_di_infinity.csv", csv.str());
    for (std::size_t k = 0; k < ds_list.size(); ++k) {
      comparison += "d_I_infinity," + io::format_number(ds_list[k]) + ',' + io::to_string(eqs[k].kind) + ',' +
                    io::format_number(relative_sup(eqs[k].S_tilde, lim.S)) + ',' +
                    io::format_number(relative_sup(eqs[k].I_tilde, I_lim)) + '\n';
      finite.push_back(eqs[k]);
      finite_d.emplace_back(params.d_S, ds_list[k]);
    }
    summary["di_infinity"] = {{"I_star", lim.I_star},
                              {"residual", lim.residual},
                              {"mass_residual", lim.mass_residual},
                              {"outer_iterations", lim.outer_iterations}};
  } catch (const Error& e) {
    summary["di_infinity"] = {{"error", e.what()}};
  }

  out.write("limits_comparison.csv", comparison);
  out.write("limits.json", summary.dump(2) + "\n");
  if (wants(config, "sign_relation") || wants(config, "route_agreement")) {
    check_spectral({r0_all_routes(*params.kernel, params.d_I, params.rates)}, config, checks);
  }
  if (wants(config, "k_constant")) checks.push_back(k_constant_check(finite, finite_d));
}

}  // namespace

int resolve_workers(const ScenarioConfig& config) {
  if (const char* env = std::getenv(kWorkersEnv); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw Error(ErrorCode::config_invalid, std::string(kWorkersEnv) + ": expected a positive integer");
    }
    return static_cast<int>(v);
  }
  return config.workers.value_or(1);
}

ModelParams make_params(const ScenarioConfig& config) {
  const Mesh mesh = build_mesh(config.a, config.b, config.n);
  ModelParams p;
  p.kernel = std::make_shared<const Kernel>(build_kernel(mesh, config.kernel));
  p.rates = make_rates(mesh, evaluate_rate(config.beta, mesh, "beta"),
                       evaluate_rate(config.gamma, mesh, "gamma"));
  p.d_S = config.d_S;
  p.d_I = config.d_I;
  p.N = config.N;
  validate(p);
  return p;
}

State make_initial(const ScenarioConfig& config, const Mesh& mesh) {
  const InitialSpec& spec = config.simulate.initial;
  const int n = mesh.size();
  State s;
  s.S = Field::Ones(n);
  s.I = Field::Ones(n);
  if (spec.type == "random") {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < n; ++i) {
      s.S[i] = u(rng);
      s.I[i] = u(rng);
    }
  } else if (spec.type == "bump") {
    s.I = (-((mesh.nodes().array() - spec.center) / spec.width).square()).exp().matrix();
    if (!(integrate(mesh, s.I) > 0)) {
      throw Error(ErrorCode::config_invalid, "simulate.initial: bump has no mass on the mesh");
    }
  }
  s.S *= (1.0 - spec.infected_fraction) * config.N / integrate(mesh, s.S);
  s.I *= spec.infected_fraction * config.N / integrate(mesh, s.I);
  return s;
}

RunRecord run(const ScenarioConfig& config, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  require_applicable_checks(config);
  RunRecord record;
  record.config = config;
  Outputs out(out_dir);
  out.write("config.json", emit_config(config));

  const ModelParams params = make_params(config);
  with_context(std::string("task ") + to_string(config.task), [&] {
    switch (config.task) {
      case Task::spectrum: run_spectrum(config, params, out, record.checks); break;
      case Task::equilibrium: run_equilibrium(config, params, out, record.checks); break;
      case Task::simulate: run_simulate(config, params, out, record.checks); break;
      case Task::sweep: run_sweep(config, params, out, record.checks); break;
      case Task::limits: run_limits(config, params, out, record.checks); break;
    }
    return 0;
  });

  record.ok = std::all_of(record.checks.begin(), record.checks.end(),
                          [](const CheckResult& c) { return c.passed; });
  record.outputs = out.paths();
  record.outputs.push_back(out_dir / "run_record.json");
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_text(out_dir / "run_record.json", run_record_json(record));
  return record;
}

std::string run_record_json(const RunRecord& record) {
  json j;
  j["config"] = json::parse(emit_config(record.config));
  j["outputs"] = json::array();
  for (const auto& p : record.outputs) j["outputs"].push_back(p.string());
  j["wall_seconds"] = record.wall_seconds;
  j["checks"] = json::array();
  for (const auto& c : record.checks) {
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["ok"] = record.ok;
  return j.dump(2) + "\n";
}

}  // namespace nlsis
