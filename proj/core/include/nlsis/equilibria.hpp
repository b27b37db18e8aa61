#pragma once

#include <memory>
#include <utility>

#include "nlsis/mesh.hpp"
#include "nlsis/monotone.hpp"
#include "nlsis/spectral.hpp"

namespace nlsis {

// Coefficients of the nonlocal SIS system. The kernel is shared and immutable.
struct ModelParams {
  std::shared_ptr<const Kernel> kernel;
  RateFields rates;
  double d_S = 1.0;
  double d_I = 1.0;
  double N = 1.0;

  const Mesh& mesh() const { return kernel->mesh(); }
};

// Throws on missing kernel, nonpositive d_S/d_I/N, or malformed rates.
void validate(const ModelParams& params);

enum class EquilibriumKind { disease_free, endemic };

struct EquilibriumResult {
  Field S_tilde;
  Field I_tilde;
  double k = 0.0;  // d_S S + d_I I, constant in space for the endemic state
  EquilibriumKind kind = EquilibriumKind::disease_free;
  long iterations = 0;
  double residual = 0.0;  // sup-norm of both steady-state equations
};

// Sup-norm residual of the two stationary equations at (S, I).
double steady_state_residual(const ModelParams& params, const Field& S, const Field& I);

// (N/|Omega|, 0).
EquilibriumResult disease_free(const ModelParams& params);

/// Solves the reduced scalar problem for I = d_I I~/k,
///   d_I (K - D) I + (beta - gamma) I - d_S beta I^2 / (d_S I + d_I (1 - I)) = 0,
/// between the super-solution 1 and the sub-solution delta * phi, where phi is
/// the lambda_p eigenvector scaled to max 1. Requires R0 > 1.
MonotoneSolution solve_reduced_I(const ModelParams& params);

// Residual of the reduced problem at I.
Field reduced_residual(const ModelParams& params, const Field& I);

// Step size that keeps I + tau F(I) order-preserving on [0, 1].
double reduced_step(const ModelParams& params);

/// Maps a reduced solution back to (S~, I~):
/// S = (1 - I)/d_S, k = d_I N / integral(d_I S + I), S~ = k S, I~ = (k/d_I) I.
EquilibriumResult recover_equilibrium(const ModelParams& params, const Field& I_reduced);

// Endemic equilibrium when R0 > 1, disease-free otherwise.
EquilibriumResult solve_equilibrium(const ModelParams& params);

/// Positive steady state of d (K - D) u + (r - c u) u = 0. Requires the
/// linearization to be unstable (lambda_p < -1e-9); otherwise throws
/// Error{subcritical_regime}.
MonotoneSolution logistic_steady(const Kernel& kernel, double d, const Field& r, const Field& c);

/// Positive solution of
///   d_I (K - D) theta + (beta - gamma) theta - beta theta^2 / (d_I + theta) = 0,
/// the rescaled infected profile d_S I in the d_S -> infinity limit.
MonotoneSolution theta_star(const Kernel& kernel, double d_I, const RateFields& rates);

// Constants ((N/|Omega|) int gamma / int beta, (N/|Omega|)(1 - int gamma / int beta)).
std::pair<double, double> limit_profile_both_infinity(const RateFields& rates, double N,
                                                      const Mesh& mesh);

struct LimitProfile {
  Field S;
  Field I;
};

// (d_I N / int(d_I + theta), N theta / int(d_I + theta)).
LimitProfile limit_profile_ds_infinity(const Kernel& kernel, double d_I, const RateFields& rates,
                                       double N);

struct DiInfinityProfile {
  Field S;
  double I_star = 0.0;
  double residual = 0.0;       // sup-norm of the stationary S equation
  double mass_residual = 0.0;  // integral(S) + I* |Omega| - N
  int outer_iterations = 0;
  long inner_iterations = 0;
};

/// Limit (S*, I*) as d_I -> infinity:
///   d_S (K - D) S* + gamma I* - beta S* I* / (S* + I*) = 0,  int(S* + I*) = N.
/// Bisection on the constant I*, inner fixed point on S* through the positive
/// root of a S^2 + G S - H = 0 with a = d_S row, h = d_S K S,
/// G = (a - gamma + beta) I* - h, H = gamma I*^2 + h I*.
DiInfinityProfile limit_profile_di_infinity(const Kernel& kernel, double d_S,
                                            const RateFields& rates, double N);

}  // namespace nlsis
