#include "nlsis/spectral.hpp"

#include <cmath>
#include <string>

#include "nlsis/error.hpp"
#include "nlsis/nonlocal_op.hpp"

namespace nlsis {

namespace {

using Eigen::MatrixXd;
using Solver = Eigen::SelfAdjointEigenSolver<MatrixXd>;

void require_diffusivity(double d) {
  if (!(d > 0)) {
    throw Error(ErrorCode::nonpositive_diffusivity, "d_I must be > 0, got " + std::to_string(d));
  }
}

void require_rates(const Kernel& kernel, const RateFields& rates) {
  require_field(kernel.mesh(), rates.beta, "beta");
  require_field(kernel.mesh(), rates.gamma, "gamma");
}

// -[d (K - D) + diag(beta - gamma)]
MatrixXd potential_matrix(const Kernel& kernel, double d_I, const RateFields& rates) {
  require_diffusivity(d_I);
  require_rates(kernel, rates);
  MatrixXd m = -d_I * kernel.matrix();
  m.diagonal() += d_I * kernel.row_integral() + rates.gamma - rates.beta;
  return m;
}

// -A = -d_I (K - D) + diag(gamma)
MatrixXd recovery_matrix(const Kernel& kernel, double d_I, const RateFields& rates) {
  MatrixXd p = -assemble_A(kernel, d_I, rates.gamma).entries;
  return p;
}

Solver solve_symmetric(const MatrixXd& m, int options) {
  Solver solver(m, options);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::no_convergence, "symmetric eigensolver failed");
  }
  return solver;
}

double r0_variational_route(const MatrixXd& recovery, const Field& beta) {
  // max u^T B u / u^T P u with P = L L^T: largest eigenvalue of W W^T where
  // W = L^{-1} B^{1/2}.
  Eigen::LLT<MatrixXd> llt(recovery);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_operator, "-A is not positive definite");
  }
  MatrixXd w = beta.cwiseSqrt().asDiagonal();
  llt.matrixL().solveInPlace(w);
  const MatrixXd c = w * w.transpose();
  const Solver solver = solve_symmetric(c, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[c.rows() - 1];
}

double r0_nextgen_route(const MatrixXd& recovery, const Field& beta) {
  // diag(beta)^{1/2} (-A)^{-1} diag(beta)^{1/2}, similar to diag(beta) (-A)^{-1}.
  Eigen::PartialPivLU<MatrixXd> lu(recovery);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::singular_operator, "-A is numerically singular");
  }
  const Field sqrt_beta = beta.cwiseSqrt();
  MatrixXd x = lu.solve(MatrixXd(sqrt_beta.asDiagonal()));
  x = sqrt_beta.asDiagonal() * x;
  const MatrixXd sym = 0.5 * (x + x.transpose());
  const Solver solver = solve_symmetric(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[sym.rows() - 1];
}

}  // namespace

RateFields make_rates(const Mesh& mesh, Field beta, Field gamma) {
  require_field(mesh, beta, "beta");
  require_field(mesh, gamma, "gamma");
  if (!(beta.array() > 0).all()) {
    throw Error(ErrorCode::negative_parameter, "beta must be strictly positive at every node");
  }
  if (!(gamma.array() > 0).all()) {
    throw Error(ErrorCode::nonpositive_gamma, "gamma must be strictly positive at every node");
  }
  return RateFields{std::move(beta), std::move(gamma)};
}

EigenPair lambda_p(const Kernel& kernel, double d_I, const RateFields& rates) {
  const Solver solver = solve_symmetric(potential_matrix(kernel, d_I, rates), Eigen::ComputeEigenvectors);
  EigenPair out;
  out.value = solver.eigenvalues()[0];
  out.vector = solver.eigenvectors().col(0);
  if (out.vector.sum() < 0) out.vector = -out.vector;
  return out;
}

double lambda_p_value(const Kernel& kernel, double d_I, const RateFields& rates) {
  const Solver solver = solve_symmetric(potential_matrix(kernel, d_I, rates), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

bool principal_eigen_exists(const Kernel& kernel, double d_I, const RateFields& rates, double lp) {
  require_diffusivity(d_I);
  require_rates(kernel, rates);
  const double threshold =
      (d_I * kernel.row_integral() + rates.gamma - rates.beta).minCoeff();
  return lp < threshold - 1e-12;
}

EigenPair mu_p(const Kernel& kernel, double d_I, const RateFields& rates) {
  require_diffusivity(d_I);
  require_rates(kernel, rates);
  const Field inv_sqrt_beta = rates.beta.cwiseSqrt().cwiseInverse();
  const MatrixXd sym =
      inv_sqrt_beta.asDiagonal() * recovery_matrix(kernel, d_I, rates) * inv_sqrt_beta.asDiagonal();
  const Solver solver = solve_symmetric(sym, Eigen::ComputeEigenvectors);

  EigenPair out;
  out.value = solver.eigenvalues()[0];
  Field phi = inv_sqrt_beta.cwiseProduct(solver.eigenvectors().col(0));
  if (phi.sum() < 0) phi = -phi;
  phi /= phi.maxCoeff();
  if (phi.minCoeff() < -1e-8) {
    throw Error(ErrorCode::nonpositive_eigenvector,
                "principal weighted eigenvector changes sign (min " +
                    std::to_string(phi.minCoeff()) + ")");
  }
  out.vector = std::move(phi);
  return out;
}

SpectralReport r0_all_routes(const Kernel& kernel, double d_I, const RateFields& rates) {
  SpectralReport report;
  report.d_I = d_I;

  EigenPair lp = lambda_p(kernel, d_I, rates);
  report.lambda_p = lp.value;
  report.lambda_p_eigvec = std::move(lp.vector);
  report.principal_exists = principal_eigen_exists(kernel, d_I, rates, report.lambda_p);

  report.mu_p = mu_p(kernel, d_I, rates).value;
  report.r0_weighted = 1.0 / report.mu_p;

  const MatrixXd recovery = recovery_matrix(kernel, d_I, rates);
  report.r0_variational = r0_variational_route(recovery, rates.beta);
  report.r0_nextgen = r0_nextgen_route(recovery, rates.beta);

  OperatorMatrix infection = assemble_A(kernel, d_I, rates.gamma);
  infection.entries.diagonal() += rates.beta;
  report.spectral_bound_M = spectral_bound(infection);

  const Mesh& mesh = kernel.mesh();
  const Field potential = rates.gamma - rates.beta;
  report.limit_d0 = potential.minCoeff();
  report.limit_dinf = integrate(mesh, potential) / mesh.length();
  report.r0_limit_d0 = rates.beta.cwiseQuotient(rates.gamma).maxCoeff();
  report.r0_limit_dinf = integrate(mesh, rates.beta) / integrate(mesh, rates.gamma);
  return report;
}

DStarResult find_d_star(const Kernel& kernel, const RateFields& rates, double d_lo, double d_hi) {
  if (!(d_lo > 0) || !(d_lo < d_hi)) {
    throw Error(ErrorCode::invalid_bracket, "need 0 < d_lo < d_hi, got [" + std::to_string(d_lo) +
                                                ", " + std::to_string(d_hi) + "]");
  }
  require_rates(kernel, rates);
  DStarResult result;
  if ((rates.beta - rates.gamma).maxCoeff() <= 0) {
    result.reason = "β<γ everywhere: R₀<1 for all d_I";
    return result;
  }
  const Mesh& mesh = kernel.mesh();
  if (integrate(mesh, rates.beta) >= integrate(mesh, rates.gamma)) {
    result.reason = "high-risk domain: R₀>1 for all d_I";
    return result;
  }

  double lo = d_lo;
  double hi = d_hi;
  const double f_lo = lambda_p_value(kernel, lo, rates);
  const double f_hi = lambda_p_value(kernel, hi, rates);
  if (!(f_lo < 0 && f_hi > 0)) {
    result.reason = "bracket does not straddle the root: λ_p(d_lo)=" + std::to_string(f_lo) +
                    ", λ_p(d_hi)=" + std::to_string(f_hi);
    return result;
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 1; it <= 60; ++it) {
    mid = 0.5 * (lo + hi);
    const double f_mid = lambda_p_value(kernel, mid, rates);
    result.iterations = it;
    if (std::abs(f_mid) <= 1e-10) break;
    if (f_mid < 0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-10 * d_hi) {
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  result.d_star = mid;
  return result;
}

std::vector<double> lambda_p_monotonicity_scan(const Kernel& kernel, const RateFields& rates,
                                               const std::vector<double>& d_list) {
  if (d_list.empty()) throw Error(ErrorCode::invalid_argument, "empty diffusivity list");
  for (std::size_t i = 1; i < d_list.size(); ++i) {
    if (!(d_list[i] > d_list[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "diffusivity list must be strictly increasing");
    }
  }
  std::vector<double> out;
  out.reserve(d_list.size());
  for (double d : d_list) out.push_back(lambda_p_value(kernel, d, rates));
  return out;
}

}  // namespace nlsis
