#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsis/mesh.hpp"

namespace nlsis {

// Transmission beta(x) and recovery gamma(x) sampled on the mesh; both > 0.
struct RateFields {
  Field beta;
  Field gamma;
};

// Validates lengths and strict positivity.
RateFields make_rates(const Mesh& mesh, Field beta, Field gamma);

struct EigenPair {
  double value = 0.0;
  Field vector;
};

/// Variational principal value of the infection operator.
///
/// Smallest eigenvalue of -[d_I (K - D) + diag(beta - gamma)], i.e. the
/// minimum of the discrete Rayleigh quotient
///   ((d_I/2) sum_ij J_ij (phi_j - phi_i)^2 h^2 + sum_i (gamma_i - beta_i) phi_i^2 h) / |phi|^2 h.
/// The eigenvector has unit Euclidean norm and positive sum.
EigenPair lambda_p(const Kernel& kernel, double d_I, const RateFields& rates);

// Eigenvalue only; cheaper, used by scans and bisection.
double lambda_p_value(const Kernel& kernel, double d_I, const RateFields& rates);

// lp < min_i [d_I row_i + gamma_i - beta_i] - 1e-12.
bool principal_eigen_exists(const Kernel& kernel, double d_I, const RateFields& rates, double lp);

/// Principal value of [-d_I (K - D) + diag(gamma)] phi = mu diag(beta) phi.
///
/// Solved by congruence with diag(beta)^{-1/2}; the returned eigenvector is
/// normalized to max = 1. Throws Error{nonpositive_eigenvector} if it changes
/// sign beyond 1e-8.
EigenPair mu_p(const Kernel& kernel, double d_I, const RateFields& rates);

struct SpectralReport {
  double d_I = 0.0;
  double lambda_p = 0.0;
  Field lambda_p_eigvec;
  bool principal_exists = false;
  double mu_p = 0.0;
  double r0_weighted = 0.0;     // 1 / mu_p
  double r0_variational = 0.0;  // max of the R0 Rayleigh quotient, Cholesky-whitened pencil
  double r0_nextgen = 0.0;      // spectral radius of diag(beta) (-A)^{-1}, LU route
  double spectral_bound_M = 0.0;
  double limit_d0 = 0.0;       // min_i (gamma - beta)
  double limit_dinf = 0.0;     // mesh average of gamma - beta
  double r0_limit_d0 = 0.0;    // max_i beta / gamma
  double r0_limit_dinf = 0.0;  // integral beta / integral gamma
};

SpectralReport r0_all_routes(const Kernel& kernel, double d_I, const RateFields& rates);

struct DStarResult {
  std::optional<double> d_star;
  std::string reason;  // why no root was returned; empty on success
  int iterations = 0;
};

/// Root of d -> lambda_p(d) by bisection on [d_lo, d_hi] (60 iterations max).
/// Only the high-risk-site / low-risk-domain case has a root; other cases
/// return no value together with the reason.
DStarResult find_d_star(const Kernel& kernel, const RateFields& rates, double d_lo, double d_hi);

// lambda_p(d) for every d in a strictly increasing, nonempty list.
std::vector<double> lambda_p_monotonicity_scan(const Kernel& kernel, const RateFields& rates,
                                               const std::vector<double>& d_list);

}  // namespace nlsis
