#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "nlsis/error.hpp"
#include "nlsis/nonlocal_op.hpp"
#include "nlsis/spectral.hpp"
#include "nlsis/suite.hpp"

using namespace nlsis;

namespace {

const double kPi = 3.14159265358979323846;

RateFields constant_rates(const Mesh& m, double beta, double gamma) {
  return make_rates(m, Field::Constant(m.size(), beta), Field::Constant(m.size(), gamma));
}

RateFields cosine_rates(const Mesh& m) {
  return make_rates(m, (1.0 + 0.8 * (kPi * m.nodes().array()).cos()).matrix(), Field::Ones(m.size()));
}

Eigen::MatrixXd dispersal_dense(const Kernel& k, double d) {
  return d * (k.matrix() - Eigen::MatrixXd(k.row_integral().asDiagonal()));
}

}  // namespace

TEST(LambdaP, EqualRatesGiveZeroAndConstantVector) {
  const auto k = standard_kernel(200);
  const EigenPair lp = lambda_p(*k, 0.7, constant_rates(k->mesh(), 1.3, 1.3));
  EXPECT_NEAR(lp.value, 0.0, 1e-10);
  EXPECT_NEAR(lp.vector.norm(), 1.0, 1e-12);
  EXPECT_LE((lp.vector.array() - lp.vector.mean()).abs().maxCoeff(), 1e-8);
}

TEST(LambdaP, ConstantRatesGiveGammaMinusBeta) {
  const auto k = standard_kernel(200);
  EXPECT_NEAR(lambda_p(*k, 1.0, constant_rates(k->mesh(), 2.0, 1.0)).value, -1.0, 1e-10);
}

TEST(LambdaP, MatchesGeneralEigensolverAndBaseline) {
  const auto k = standard_kernel(400);
  const RateFields r = cosine_rates(k->mesh());
  const Eigen::MatrixXd M = -(dispersal_dense(*k, 0.1) + Eigen::MatrixXd((r.beta - r.gamma).asDiagonal()));
  const Eigen::EigenSolver<Eigen::MatrixXd> oracle(M, false);
  const double expected = oracle.eigenvalues().real().minCoeff();
  const EigenPair lp = lambda_p(*k, 0.1, r);
  EXPECT_LT(lp.value, 0.0);
  EXPECT_NEAR(lp.value, expected, 1e-10);
  EXPECT_NEAR(lp.value, -0.73750043, 1e-6);
  // Rayleigh quotient of the returned vector reproduces the value.
  EXPECT_NEAR(lp.vector.dot(M * lp.vector) / lp.vector.squaredNorm(), lp.value, 1e-10);
  EXPECT_NEAR(lambda_p_value(*k, 0.1, r), lp.value, 1e-12);
}

TEST(PrincipalExists, CriterionEvaluatedLiterally) {
  const auto k = standard_kernel(200);
  const RateFields equal = constant_rates(k->mesh(), 1.0, 1.0);
  EXPECT_TRUE(principal_eigen_exists(*k, 0.5, equal, lambda_p_value(*k, 0.5, equal)));

  const RateFields r = cosine_rates(k->mesh());
  for (double d : {1e-6, 1e-2, 1.0, 1e3}) {
    const double lp = lambda_p_value(*k, d, r);
    const Field rhs = d * k->row_integral() + r.gamma - r.beta;
    EXPECT_EQ(principal_eigen_exists(*k, d, r, lp), lp < rhs.minCoeff() - 1e-12) << "d = " << d;
  }
}

TEST(MuP, ConstantCases) {
  const auto k = standard_kernel(200);
  const EigenPair half = mu_p(*k, 1.0, constant_rates(k->mesh(), 2.0, 1.0));
  EXPECT_NEAR(half.value, 0.5, 1e-10);
  EXPECT_NEAR(half.vector.maxCoeff(), 1.0, 1e-14);
  EXPECT_NEAR(half.vector.minCoeff(), 1.0, 1e-8);
  EXPECT_NEAR(mu_p(*k, 3.0, constant_rates(k->mesh(), 1.7, 1.7)).value, 1.0, 1e-10);
}

TEST(MuP, MatchesDenseGeneralizedSolve) {
  const auto k = standard_kernel(400);
  const RateFields r = cosine_rates(k->mesh());
  const Eigen::MatrixXd P = -dispersal_dense(*k, 0.1) + Eigen::MatrixXd(r.gamma.asDiagonal());
  const Eigen::MatrixXd B = r.beta.asDiagonal();
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> oracle(P, B);
  const EigenPair mp = mu_p(*k, 0.1, r);
  EXPECT_NEAR(mp.value, oracle.eigenvalues().minCoeff(), 1e-10);
  EXPECT_GT(mp.vector.minCoeff(), 0.0);
  EXPECT_LE((P * mp.vector - mp.value * B * mp.vector).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(R0Routes, ConstantCoefficientCases) {
  const auto k = standard_kernel(200);
  const SpectralReport hi = r0_all_routes(*k, 1.0, constant_rates(k->mesh(), 2.0, 1.0));
  EXPECT_NEAR(hi.r0_weighted, 2.0, 1e-9);
  EXPECT_NEAR(hi.r0_variational, 2.0, 1e-9);
  EXPECT_NEAR(hi.r0_nextgen, 2.0, 1e-9);
  EXPECT_NEAR(hi.lambda_p, -1.0, 1e-10);

  const SpectralReport lo = r0_all_routes(*k, 1.0, constant_rates(k->mesh(), 1.0, 2.0));
  EXPECT_NEAR(lo.r0_weighted, 0.5, 1e-9);
  EXPECT_NEAR(lo.lambda_p, 1.0, 1e-10);
  EXPECT_NEAR(lo.limit_d0, 1.0, 1e-15);
  EXPECT_NEAR(lo.r0_limit_dinf, 0.5, 1e-15);
}

TEST(R0Routes, HeterogeneousRoutesAgreeAndFieldsConsistent) {
  const auto k = standard_kernel(400);
  const RateFields r = cosine_rates(k->mesh());
  const SpectralReport s = r0_all_routes(*k, 0.1, r);
  EXPECT_LE(std::abs(s.r0_weighted - s.r0_variational), 1e-7 * s.r0_weighted);
  EXPECT_LE(std::abs(s.r0_weighted - s.r0_nextgen), 1e-7 * s.r0_weighted);
  EXPECT_LE(std::abs(s.spectral_bound_M + s.lambda_p), 1e-9 * (1 + std::abs(s.lambda_p)));
  EXPECT_NEAR(s.r0_weighted, 1.0 / s.mu_p, 1e-14);
  EXPECT_NEAR(s.limit_d0, (r.gamma - r.beta).minCoeff(), 1e-15);
  EXPECT_NEAR(s.limit_dinf, (r.gamma - r.beta).mean(), 1e-15);
  EXPECT_NEAR(s.r0_limit_d0, r.beta.cwiseQuotient(r.gamma).maxCoeff(), 1e-15);
  EXPECT_NEAR(s.r0_limit_dinf, r.beta.sum() / r.gamma.sum(), 1e-14);
  // Spectral bound of A + diag(beta) from the operator module.
  OperatorMatrix AF = assemble_A(*k, 0.1, r.gamma);
  AF.entries += Eigen::MatrixXd(r.beta.asDiagonal());
  EXPECT_NEAR(spectral_bound(AF), s.spectral_bound_M, 1e-10);
}

TEST(R0Routes, RandomTrialInvariants) {
  const auto k = standard_kernel(120);
  const Mesh& m = k->mesh();
  for (const RandomTrial& t : random_trials(m, 15, 7)) {
    const SpectralReport s = r0_all_routes(*k, t.d_I, t.rates);
    const Field diff = t.rates.gamma - t.rates.beta;
    if (std::abs(s.lambda_p) > 1e-9) EXPECT_EQ(s.lambda_p > 0, s.r0_weighted < 1);
    EXPECT_LE(std::abs(s.r0_weighted - s.r0_variational), 1e-7 * s.r0_weighted);
    EXPECT_LE(std::abs(s.r0_weighted - s.r0_nextgen), 1e-7 * s.r0_weighted);
    EXPECT_GE(s.lambda_p, diff.minCoeff() - 1e-10);
    EXPECT_LE(s.lambda_p, diff.mean() + 1e-10);
    EXPECT_GE(s.r0_weighted, integrate(m, t.rates.beta) / integrate(m, t.rates.gamma) - 1e-9);
    EXPECT_LE(s.r0_weighted, t.rates.beta.cwiseQuotient(t.rates.gamma).maxCoeff() + 1e-9);
    if (s.principal_exists) EXPECT_GT(mu_p(*k, t.d_I, t.rates).vector.minCoeff(), 0.0);
    const auto scan = lambda_p_monotonicity_scan(*k, t.rates, {0.5 * t.d_I, t.d_I, 2 * t.d_I});
    EXPECT_LE(scan[0], scan[1] + 1e-10);
    EXPECT_LE(scan[1], scan[2] + 1e-10);
  }
}

TEST(DStar, BumpProfileHasSignChange) {
  const auto k = standard_kernel(400);
  const Mesh& m = k->mesh();
  const RateFields r = make_rates(m, (1.0 + 1.5 * (-20.0 * m.nodes().array().square()).exp()).matrix(),
                                  Field::Constant(m.size(), 1.4));
  ASSERT_LT(integrate(m, r.beta), integrate(m, r.gamma));
  const DStarResult ds = find_d_star(*k, r, 1e-3, 1e3);
  ASSERT_TRUE(ds.d_star.has_value()) << ds.reason;
  EXPECT_LT(lambda_p_value(*k, 0.5 * *ds.d_star, r), 0.0);
  EXPECT_GT(lambda_p_value(*k, 2.0 * *ds.d_star, r), 0.0);
  EXPECT_LE(ds.iterations, 60);
}

TEST(DStar, NoRootCases) {
  const auto k = standard_kernel(100);
  const DStarResult high = find_d_star(*k, constant_rates(k->mesh(), 2.0, 1.0), 1e-3, 1e3);
  EXPECT_FALSE(high.d_star);
  EXPECT_EQ(high.reason, "high-risk domain: R₀>1 for all d_I");
  const DStarResult low = find_d_star(*k, constant_rates(k->mesh(), 1.0, 2.0), 1e-3, 1e3);
  EXPECT_FALSE(low.d_star);
  EXPECT_EQ(low.reason, "β<γ everywhere: R₀<1 for all d_I");
  try {
    find_d_star(*k, constant_rates(k->mesh(), 1.0, 2.0), 5.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_bracket);
  }
}

TEST(MonotonicityScan, ConstantAndHeterogeneous) {
  const auto k = standard_kernel(400);
  for (double v : lambda_p_monotonicity_scan(*k, constant_rates(k->mesh(), 2.0, 1.0), {0.1, 1, 10})) {
    EXPECT_NEAR(v, -1.0, 1e-10);
  }
  const RateFields r = cosine_rates(k->mesh());
  const auto scan = lambda_p_monotonicity_scan(*k, r, {0.01, 0.1, 1, 10, 100});
  for (std::size_t i = 1; i < scan.size(); ++i) EXPECT_GT(scan[i], scan[i - 1]);
  EXPECT_LT(scan.back(), (r.gamma - r.beta).mean());
  EXPECT_NEAR(lambda_p_value(*k, 1e-4, r), (r.gamma - r.beta).minCoeff(), 5e-3);
}

TEST(MonotonicityScan, RejectsBadLists) {
  const auto k = standard_kernel(50);
  const RateFields r = constant_rates(k->mesh(), 2.0, 1.0);
  EXPECT_THROW(lambda_p_monotonicity_scan(*k, r, {}), Error);
  EXPECT_THROW(lambda_p_monotonicity_scan(*k, r, {1.0, 1.0}), Error);
}
