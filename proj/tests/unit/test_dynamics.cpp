#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "nlsis/dynamics.hpp"
#include "nlsis/error.hpp"
#include "nlsis/suite.hpp"

using namespace nlsis;

namespace {

const double kPi = 3.14159265358979323846;

ModelParams make(int n, Field beta, Field gamma, double d_S, double d_I, double N) {
  auto k = standard_kernel(n);
  ModelParams p;
  p.rates = make_rates(k->mesh(), std::move(beta), std::move(gamma));
  p.kernel = k;
  p.d_S = d_S;
  p.d_I = d_I;
  p.N = N;
  return p;
}

ModelParams constant_model(int n, double beta, double gamma, double d_S, double d_I) {
  return make(n, Field::Constant(n, beta), Field::Constant(n, gamma), d_S, d_I, 2.0);
}

State random_state(const Mesh& m, double N, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  State s{Field(m.size()), Field(m.size()), 0.0};
  for (int i = 0; i < m.size(); ++i) {
    s.S[i] = u(rng);
    s.I[i] = u(rng);
  }
  s.S *= 0.5 * N / integrate(m, s.S);
  s.I *= 0.5 * N / integrate(m, s.I);
  return s;
}

}  // namespace

TEST(Rhs, VanishesAtDiseaseFreeState) {
  const ModelParams p = constant_model(200, 1.5, 1.0, 1.0, 0.4);
  const Derivative d = rhs(p, State{Field::Ones(200), Field::Zero(200), 0.0});
  EXPECT_LE(d.dS.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(d.dI.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Rhs, SmallAtEndemicEquilibrium) {
  const int n = 300;
  auto k = standard_kernel(n);
  const Field beta = (1.2 + 0.8 * (kPi * k->mesh().nodes().array()).cos()).matrix();
  const ModelParams p = make(n, beta, Field::Ones(n), 0.5, 0.2, 2.0);
  const EquilibriumResult eq = solve_equilibrium(p);
  ASSERT_EQ(eq.kind, EquilibriumKind::endemic);
  const Derivative d = rhs(p, State{eq.S_tilde, eq.I_tilde, 0.0});
  EXPECT_LE(std::max(d.dS.cwiseAbs().maxCoeff(), d.dI.cwiseAbs().maxCoeff()), 1e-8);
}

TEST(Rhs, ConservesMassForArbitraryStates) {
  const ModelParams p = make(150, Field::Random(150).cwiseAbs() + Field::Ones(150),
                             Field::Random(150).cwiseAbs() + Field::Constant(150, 0.2), 0.7, 1.9, 2.0);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const State s = random_state(p.mesh(), 2.0, seed);
    const Derivative d = rhs(p, s);
    const double scale = integrate(p.mesh(), d.dS.cwiseAbs() + d.dI.cwiseAbs());
    EXPECT_LE(std::abs(integrate(p.mesh(), d.dS + d.dI)), 1e-12 * scale);
  }
}

TEST(Rhs, GuardsZeroPopulationAndNegativeStates) {
  const ModelParams p = constant_model(50, 2.0, 1.0, 1.0, 1.0);
  const Derivative d = rhs(p, State{Field::Zero(50), Field::Zero(50), 0.0});
  EXPECT_TRUE(d.dS.allFinite());
  EXPECT_EQ(d.dI.cwiseAbs().maxCoeff(), 0.0);
  Field S = Field::Ones(50);
  S[3] = -1e-9;
  try {
    rhs(p, State{S, Field::Ones(50), 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::negative_state);
  }
}

TEST(Integrate, RejectsUnstableStepAndEmptyInfection) {
  const ModelParams p = constant_model(100, 2.0, 1.0, 1.0, 1.0);
  const State s = random_state(p.mesh(), 2.0, 3);
  EXPECT_THROW(integrate_to(p, s, 1.0, 2.0 * max_stable_dt(p)), Error);
  EXPECT_THROW(integrate_to(p, State{s.S, Field::Zero(100), 0.0}, 1.0, max_stable_dt(p)), Error);
}

TEST(Integrate, SamplesIncreaseAndMassIsConserved) {
  const ModelParams p = constant_model(200, 2.0, 1.0, 1.0, 0.3);
  const Trajectory traj = integrate_to(p, random_state(p.mesh(), 2.0, 9), 20.0, max_stable_dt(p));
  ASSERT_GE(traj.samples.size(), 2u);
  for (std::size_t k = 1; k < traj.samples.size(); ++k) EXPECT_GT(traj.samples[k].t, traj.samples[k - 1].t);
  for (const auto& s : traj.samples) EXPECT_NEAR(s.mass, 2.0, 1e-10 * 2.0);
  EXPECT_DOUBLE_EQ(traj.final_state.t, 20.0);
  // Sampling stride floor(t_end / dt / 500) with at least one step.
  const long stride = std::max(1L, static_cast<long>(std::floor(20.0 / max_stable_dt(p) / 500.0)));
  EXPECT_EQ(traj.samples.size(), static_cast<std::size_t>(traj.steps / stride + 1 + (traj.steps % stride != 0)));
}

TEST(Integrate, StaysNonnegativeFromCompactlySupportedInfection) {
  const int n = 200;
  auto k = standard_kernel(n);
  const ModelParams p = make(n, Field::Constant(n, 3.0), Field::Constant(n, 2.5), 0.05, 0.05, 2.0);
  Field I = Field::Zero(n);
  I.segment(90, 20).setConstant(1.0);
  Field S = Field::Ones(n);
  S.segment(0, 30).setZero();
  State init{S, I, 0.0};
  init.S *= 1.5 / integrate(p.mesh(), init.S);
  init.I *= 0.5 / integrate(p.mesh(), init.I);
  const Trajectory traj = integrate_to(p, init, 30.0, max_stable_dt(p), {std::nullopt, true});
  for (const State& s : traj.snapshots) {
    EXPECT_GE(s.S.minCoeff(), -1e-12);
    EXPECT_GE(s.I.minCoeff(), -1e-12);
  }
}

TEST(Integrate, DiseaseFreeConvergence) {
  const ModelParams p = constant_model(400, 1.0, 2.0, 1.0, 1.0);
  const Trajectory traj = integrate_to(p, random_state(p.mesh(), 2.0, 5), 200.0, max_stable_dt(p));
  EXPECT_LE((traj.final_state.S.array() - 1.0).abs().maxCoeff(), 1e-4);
  EXPECT_LE(traj.final_state.I.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Integrate, EndemicConvergenceForEqualDiffusion) {
  const ModelParams p = constant_model(400, 2.0, 1.0, 1.0, 1.0);
  const Trajectory traj = integrate_to(p, random_state(p.mesh(), 2.0, 6), 200.0, max_stable_dt(p));
  EXPECT_LE((traj.final_state.S.array() - 0.5).abs().maxCoeff(), 1e-4);
  EXPECT_LE((traj.final_state.I.array() - 0.5).abs().maxCoeff(), 1e-4);
}

TEST(Integrate, ComparisonPrincipleForEqualDiffusion) {
  const int n = 200;
  auto k = standard_kernel(n);
  const Field beta = (1.5 + 0.8 * (kPi * k->mesh().nodes().array()).cos()).matrix();
  const ModelParams p = make(n, beta, Field::Ones(n), 0.6, 0.6, 2.0);
  const State base = random_state(p.mesh(), 2.0, 4);
  const Field total = base.S + base.I;
  const Field I_low = 0.3 * total;
  const Field I_high = 0.7 * total;
  TrajectoryOptions opts;
  opts.snapshots = true;
  const Trajectory lo = integrate_to(p, State{total - I_low, I_low, 0.0}, 10.0, max_stable_dt(p), opts);
  const Trajectory hi = integrate_to(p, State{total - I_high, I_high, 0.0}, 10.0, max_stable_dt(p), opts);
  ASSERT_EQ(lo.snapshots.size(), hi.snapshots.size());
  for (std::size_t s = 0; s < lo.snapshots.size(); ++s) {
    EXPECT_LE((lo.snapshots[s].I - hi.snapshots[s].I).maxCoeff(), 1e-10) << "sample " << s;
  }
}

TEST(Lyapunov, ZeroAtEquilibriumAndExactQuadratic) {
  const int n = 200;
  auto k = standard_kernel(n);
  const Field gamma = (1.0 + 0.5 * (kPi * k->mesh().nodes().array()).cos()).matrix();
  const ModelParams p = make(n, 2.0 * gamma, gamma, 1.0, 0.5, 2.0);
  const EquilibriumResult eq = solve_equilibrium(p);
  EXPECT_NEAR(lyapunov_V(State{eq.S_tilde, eq.I_tilde, 0.0}, eq, p.mesh()), 0.0, 1e-14);
  const double eps = 1e-3;
  const Field I = eq.I_tilde.array() + eps;
  const double expected = 0.5 * eps * eps * integrate(p.mesh(), eq.I_tilde.cwiseInverse());
  EXPECT_NEAR(lyapunov_V(State{eq.S_tilde, I, 0.0}, eq, p.mesh()), expected, 1e-12 * expected);

  EquilibriumResult bad = eq;
  bad.I_tilde[0] = 0.0;
  try {
    lyapunov_V(State{eq.S_tilde, eq.I_tilde, 0.0}, bad, p.mesh());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::division_guard);
  }
}

TEST(Lyapunov, NonincreasingAlongProportionalRatesTrajectory) {
  const ModelParams p = constant_model(200, 2.0, 1.0, 1.0, 0.25);
  TrajectoryOptions opts;
  opts.endemic = solve_equilibrium(p);
  const Trajectory traj = integrate_to(p, random_state(p.mesh(), 2.0, 8), 50.0, max_stable_dt(p), opts);
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    ASSERT_TRUE(traj.samples[k].lyapunov);
    EXPECT_LE(*traj.samples[k].lyapunov, *traj.samples[k - 1].lyapunov + 1e-10);
  }
}

TEST(Classify, ThresholdCases) {
  const ModelParams sub = constant_model(200, 1.0, 2.0, 1.0, 1.0);
  EXPECT_EQ(classify_longtime(sub, random_state(sub.mesh(), 2.0, 1), 100.0).kind, LongTimeKind::converged_dfe);

  const ModelParams sup = constant_model(200, 2.0, 1.0, 1.0, 1.0);
  const LongTimeReport r = classify_longtime(sup, random_state(sup.mesh(), 2.0, 2), 100.0);
  EXPECT_EQ(r.kind, LongTimeKind::converged_endemic);
  EXPECT_NEAR(r.r0, 2.0, 1e-9);
  EXPECT_EQ(r.distance_curve.size(), r.trajectory.samples.size());
}

TEST(Classify, ShortHorizonIsReportedHonestly) {
  const ModelParams p = constant_model(200, 2.0, 1.0, 1.0, 0.1);
  const LongTimeReport r = classify_longtime(p, random_state(p.mesh(), 2.0, 3), 0.5);
  EXPECT_EQ(r.kind, LongTimeKind::undecided);
  EXPECT_TRUE(r.final_dist_endemic.has_value());
  EXPECT_GT(*r.final_dist_endemic, 1e-3);
}

TEST(AlphaGap, BoundAndScaling) {
  const auto k = standard_kernel(200);
  const double a1 = alpha_gap(*k, 1.0);
  EXPECT_GT(a1, 0.0);
  EXPECT_LE(a1, k->row_integral().minCoeff() + 1e-10);
  EXPECT_NEAR(alpha_gap(*k, 2.0), 2.0 * a1, 1e-12 * a1);
}

TEST(AlphaGap, PureDispersalDecayRate) {
  const auto k = standard_kernel(200);
  const double d_S = 1.0;
  const double alpha = alpha_gap(*k, d_S);
  const Mesh& m = k->mesh();
  Field S = random_state(m, 2.0, 12).S;
  const double mean = integrate(m, S) / m.length();
  const auto dispersal = [&](const Field& u) { return Field(d_S * (k->convolve(u) - k->row_integral().cwiseProduct(u))); };
  const double dt = 0.05;
  std::vector<double> t, dev;
  for (int step = 0; step <= 1200; ++step) {
    if (step >= 600 && step % 20 == 0) {
      t.push_back(step * dt);
      dev.push_back(std::sqrt(m.weight() * (S.array() - mean).square().sum()));
    }
    S = rk4_step(S, dt, dispersal);
  }
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += std::log(dev[i]);
  }
  mt /= t.size();
  my /= t.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (std::log(dev[i]) - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  EXPECT_GE(-sxy / sxx, 0.95 * alpha);
}
