#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "nlsis/error.hpp"
#include "nlsis/equilibria.hpp"
#include "nlsis/spectral.hpp"
#include "nlsis/suite.hpp"

using namespace nlsis;

namespace {

const double kPi = 3.14159265358979323846;

ModelParams params_with(std::shared_ptr<const Kernel> k, Field beta, Field gamma, double d_S, double d_I,
                        double N) {
  ModelParams p;
  p.rates = make_rates(k->mesh(), std::move(beta), std::move(gamma));
  p.kernel = std::move(k);
  p.d_S = d_S;
  p.d_I = d_I;
  p.N = N;
  return p;
}

ModelParams constant_params(int n, double beta, double gamma, double d_S, double d_I, double N) {
  auto k = standard_kernel(n);
  const int m = k->size();
  return params_with(k, Field::Constant(m, beta), Field::Constant(m, gamma), d_S, d_I, N);
}

Field cosine(const Mesh& m, double base, double amp) {
  return (base + amp * (kPi * m.nodes().array()).cos()).matrix();
}

ModelParams hetero_params(double d_S, double d_I) {
  auto k = standard_kernel(400);
  const Mesh& m = k->mesh();
  return params_with(k, cosine(m, 1.0, 0.8), Field::Ones(m.size()), d_S, d_I, 2.0);
}

Field dispersal(const Kernel& k, double d, const Field& u) {
  return d * (k.convolve(u) - k.row_integral().cwiseProduct(u));
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::io_error;
}

}  // namespace

TEST(DiseaseFree, ConstantDensity) {
  const EquilibriumResult a = disease_free(constant_params(100, 1, 2, 1, 1, 2.0));
  EXPECT_LE((a.S_tilde.array() - 1.0).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(a.I_tilde.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.kind, EquilibriumKind::disease_free);
  EXPECT_LE(a.residual, 1e-12);

  auto k = std::make_shared<const Kernel>(build_kernel(build_mesh(0, 1, 50), TriangleKernel{0.3}));
  const ModelParams p = params_with(k, Field::Ones(50), Field::Ones(50), 1, 1, 5.0);
  const EquilibriumResult b = disease_free(p);
  EXPECT_NEAR(b.S_tilde[17], 5.0, 1e-14);
  EXPECT_NEAR(integrate(k->mesh(), b.S_tilde + b.I_tilde), 5.0, 1e-13);
}

TEST(ReducedI, HandSubstitutedConstant) {
  const ModelParams p = constant_params(200, 2, 1, 0.7, 0.7, 2.0);
  // Substituting I = 1/2 into the reduced equation: (2-1)/2 - 0.7*2/4/(0.35+0.35) = 0.
  EXPECT_LE(reduced_residual(p, Field::Constant(200, 0.5)).cwiseAbs().maxCoeff(), 1e-14);
  const MonotoneSolution s = solve_reduced_I(p);
  EXPECT_LE((s.value.array() - 0.5).abs().maxCoeff(), 1e-9);
}

TEST(ReducedI, HeterogeneousBracketsCollapse) {
  const ModelParams p = hetero_params(0.1, 0.1);
  const MonotoneSolution s = solve_reduced_I(p);
  EXPECT_TRUE(s.ordered);
  EXPECT_TRUE(s.monotone);
  EXPECT_LE(s.gap, 1e-10);
  EXPECT_LE(reduced_residual(p, s.value).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(s.value.minCoeff(), 0.0);
  EXPECT_LT(s.value.maxCoeff(), 1.0);
  EXPECT_GT(s.delta, 0.0);
}

TEST(ReducedI, SubcriticalIsRejected) {
  EXPECT_EQ(code_of([] { solve_reduced_I(constant_params(100, 1, 2, 1, 1, 2)); }), ErrorCode::subcritical_regime);
}

TEST(Recover, ExplicitConstantEquilibrium) {
  const ModelParams p = constant_params(200, 2, 1, 1, 1, 2.0);
  const EquilibriumResult eq = recover_equilibrium(p, solve_reduced_I(p).value);
  EXPECT_LE((eq.S_tilde.array() - 0.5).abs().maxCoeff(), 1e-9);
  EXPECT_LE((eq.I_tilde.array() - 0.5).abs().maxCoeff(), 1e-9);
  EXPECT_EQ(eq.kind, EquilibriumKind::endemic);
  EXPECT_EQ(code_of([&] { recover_equilibrium(p, Field::Constant(200, 1.0)); }), ErrorCode::out_of_range);
}

TEST(Recover, InvariantsOnHeterogeneousCases) {
  for (auto [d_S, d_I] : {std::pair{0.1, 0.1}, std::pair{1.0, 0.3}, std::pair{0.2, 2.0}}) {
    const ModelParams p = hetero_params(d_S, d_I);
    const EquilibriumResult eq = solve_equilibrium(p);
    ASSERT_EQ(eq.kind, EquilibriumKind::endemic);
    const Field k = d_S * eq.S_tilde + d_I * eq.I_tilde;
    EXPECT_LE((k.array() - eq.k).abs().maxCoeff(), 1e-8 * eq.k);
    EXPECT_NEAR(integrate(p.mesh(), eq.S_tilde + eq.I_tilde), p.N, 1e-8 * p.N);
    EXPECT_GT(eq.I_tilde.minCoeff(), 0.0);
    EXPECT_LT(eq.I_tilde.maxCoeff(), eq.k / d_I);
    EXPECT_GT(eq.S_tilde.minCoeff(), 0.0);
    EXPECT_LT(eq.S_tilde.maxCoeff(), eq.k / d_S);
    const double scale = std::max(p.rates.beta.maxCoeff(), p.rates.gamma.maxCoeff());
    EXPECT_LE(steady_state_residual(p, eq.S_tilde, eq.I_tilde), 1e-8 * scale);
    EXPECT_NEAR(eq.residual, steady_state_residual(p, eq.S_tilde, eq.I_tilde), 1e-15);
    EXPECT_LT(lambda_p_value(*p.kernel, d_I, p.rates), 0.0);
  }
}

TEST(Equilibrium, UniquenessProbe) {
  const ModelParams p = hetero_params(0.3, 0.1);
  const MonotoneSolution s = solve_reduced_I(p);
  const ResidualFn F = [&p](const Field& I) { return reduced_residual(p, I); };
  for (double factor : {0.9, 1.1}) {
    const Field back = relax_to_fixed_point(F, (factor * s.value).cwiseMin(1.0), reduced_step(p), 1e-14, 10'000'000);
    EXPECT_LE((back - s.value).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Equilibrium, SubcriticalReturnsDiseaseFree) {
  const EquilibriumResult eq = solve_equilibrium(constant_params(100, 1, 2, 1, 1, 2));
  EXPECT_EQ(eq.kind, EquilibriumKind::disease_free);
}

TEST(Logistic, ConstantRoot) {
  const auto k = standard_kernel(100);
  const MonotoneSolution u = logistic_steady(*k, 0.5, Field::Ones(100), Field::Ones(100));
  EXPECT_LE((u.value.array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_EQ(code_of([&] { logistic_steady(*k, 0.5, -Field::Ones(100), Field::Ones(100)); }),
            ErrorCode::subcritical_regime);
}

TEST(Logistic, HeterogeneousResidual) {
  const auto k = standard_kernel(400);
  const Mesh& m = k->mesh();
  const Field beta = cosine(m, 1.0, 0.8);
  const Field r = beta - Field::Ones(m.size());
  const Field c = beta * m.length() / 2.0;
  const double d = 0.1;
  const MonotoneSolution u = logistic_steady(*k, d, r, c);
  const Field res = dispersal(*k, d, u.value) + (r - c.cwiseProduct(u.value)).cwiseProduct(u.value);
  EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(u.value.minCoeff(), 0.0);
  EXPECT_LE(u.gap, 1e-10);
}

TEST(ThetaStar, ConstantSubstitution) {
  const auto k = standard_kernel(100);
  const RateFields r = make_rates(k->mesh(), Field::Constant(100, 2.0), Field::Ones(100));
  for (double d : {0.5, 1.0, 4.0}) {
    const Field theta = theta_star(*k, d, r).value;
    EXPECT_LE((theta.array() - d).abs().maxCoeff(), 1e-9 * std::max(1.0, d)) << "d_I = " << d;
  }
}

TEST(ThetaStar, HeterogeneousResidualAndBound) {
  const auto k = standard_kernel(400);
  const Mesh& m = k->mesh();
  const RateFields r = make_rates(m, cosine(m, 1.5, 0.8), Field::Ones(m.size()));
  const double d = 0.5;
  const Field theta = theta_star(*k, d, r).value;
  const Field res = dispersal(*k, d, theta) + (r.beta - r.gamma).cwiseProduct(theta) -
                    (r.beta.array() * theta.array().square() / (d + theta.array())).matrix();
  EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(theta.minCoeff(), 0.0);
  EXPECT_LE(theta.maxCoeff(), d * ((r.beta - r.gamma).cwiseQuotient(r.gamma)).maxCoeff() + 1e-9);
}

TEST(LimitBoth, FormulaExamples) {
  const Mesh m1 = build_mesh(-1, 1, 10);
  const auto [S1, I1] = limit_profile_both_infinity(make_rates(m1, Field::Constant(10, 2), Field::Ones(10)), 2.0, m1);
  EXPECT_NEAR(S1, 0.5, 1e-15);
  EXPECT_NEAR(I1, 0.5, 1e-15);
  const Mesh m2 = build_mesh(0, 1, 10);
  const auto [S2, I2] = limit_profile_both_infinity(make_rates(m2, Field::Constant(10, 3), Field::Ones(10)), 3.0, m2);
  EXPECT_NEAR(S2, 1.0, 1e-14);
  EXPECT_NEAR(I2, 2.0, 1e-14);
  EXPECT_EQ(code_of([&] {
              limit_profile_both_infinity(make_rates(m1, Field::Ones(10), Field::Constant(10, 2)), 2.0, m1);
            }),
            ErrorCode::assumption_violated);
}

TEST(LimitDs, ConstantsAndMass) {
  const auto k = standard_kernel(200);
  const RateFields r = make_rates(k->mesh(), Field::Constant(200, 2), Field::Ones(200));
  const LimitProfile lim = limit_profile_ds_infinity(*k, 1.0, r, 2.0);
  EXPECT_LE((lim.S.array() - 0.5).abs().maxCoeff(), 1e-9);
  EXPECT_LE((lim.I.array() - 0.5).abs().maxCoeff(), 1e-9);

  const Mesh& m = k->mesh();
  const RateFields h = make_rates(m, cosine(m, 1.5, 0.8), Field::Ones(200));
  const LimitProfile hl = limit_profile_ds_infinity(*k, 0.5, h, 2.0);
  EXPECT_NEAR(integrate(m, hl.S + hl.I), 2.0, 1e-9 * 2.0);
  EXPECT_LE((hl.S.array() - hl.S[0]).abs().maxCoeff(), 1e-15);
}

TEST(LimitDs, ApproachesBothInfinityForLargeDI) {
  const auto k = standard_kernel(200);
  const Mesh& m = k->mesh();
  const RateFields r = make_rates(m, cosine(m, 1.5, 0.8), Field::Ones(200));
  const auto [S, I] = limit_profile_both_infinity(r, 2.0, m);
  double prev = 1e300;
  for (double d : {1.0, 10.0, 100.0}) {
    const LimitProfile lim = limit_profile_ds_infinity(*k, d, r, 2.0);
    const double gap = std::max((lim.S.array() - S).abs().maxCoeff(), (lim.I.array() - I).abs().maxCoeff());
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 2e-2);
}

TEST(LimitDi, ConstantsAndHeterogeneousResidual) {
  const auto k = standard_kernel(200);
  const Mesh& m = k->mesh();
  const DiInfinityProfile c =
      limit_profile_di_infinity(*k, 0.8, make_rates(m, Field::Constant(200, 2), Field::Ones(200)), 2.0);
  EXPECT_LE((c.S.array() - 0.5).abs().maxCoeff(), 1e-8);
  EXPECT_NEAR(c.I_star, 0.5, 1e-8);

  const RateFields r = make_rates(m, cosine(m, 1.5, 0.8), Field::Ones(200));
  const DiInfinityProfile h = limit_profile_di_infinity(*k, 1.0, r, 2.0);
  const Field res = dispersal(*k, 1.0, h.S) + h.I_star * r.gamma -
                    (r.beta.array() * h.S.array() * h.I_star / (h.S.array() + h.I_star)).matrix();
  EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(h.residual, 1e-8);
  EXPECT_LE(std::abs(integrate(m, h.S) + h.I_star * m.length() - 2.0), 1e-8 * 2.0);
  EXPECT_EQ(code_of([&] {
              limit_profile_di_infinity(*k, 1.0, make_rates(m, Field::Ones(200), Field::Constant(200, 2)), 2.0);
            }),
            ErrorCode::assumption_violated);
}

TEST(Validate, RejectsBadParameters) {
  ModelParams p = constant_params(50, 2, 1, 1, 1, 2);
  p.d_S = 0;
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::nonpositive_diffusivity);
  p.d_S = 1;
  p.N = -1;
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::negative_parameter);
}
