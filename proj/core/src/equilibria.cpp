#include "nlsis/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nlsis/error.hpp"

namespace nlsis {

namespace {

constexpr double kBracketTol = 1e-10;
constexpr long kMaxMonotoneIterations = 1'000'000;

// Sign-corrected principal eigenvector of -[d (K - D) + diag(r)], clipped at
// zero and scaled to max 1.
Field principal_profile(const Kernel& kernel, double d, const Field& growth, double* lp) {
  RateFields shifted{growth, Field::Zero(growth.size())};
  EigenPair pair = lambda_p(kernel, d, shifted);
  if (lp) *lp = pair.value;
  Field phi = pair.vector.cwiseMax(0.0);
  return phi / phi.maxCoeff();
}

double r0_of(const Kernel& kernel, double d_I, const RateFields& rates) {
  return 1.0 / mu_p(kernel, d_I, rates).value;
}

// Bracketed solve with one retry at half the step when the first attempt stalls.
MonotoneSolution bracket_with_retry(const ResidualFn& residual, const Field& lower,
                                    const Field& upper, double tau) {
  try {
    return monotone_bracket(residual, lower, upper, tau, kBracketTol, kMaxMonotoneIterations);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_convergence) throw;
  }
  return monotone_bracket(residual, lower, upper, 0.5 * tau, kBracketTol, kMaxMonotoneIterations);
}

double guarded_incidence(double beta, double s, double i) {
  const double total = s + i;
  return total <= 1e-300 ? 0.0 : beta * s * i / total;
}

}  // namespace

void validate(const ModelParams& params) {
  if (!params.kernel) throw Error(ErrorCode::invalid_argument, "model has no kernel");
  if (!(params.d_S > 0) || !(params.d_I > 0)) {
    throw Error(ErrorCode::nonpositive_diffusivity, "d_S and d_I must be > 0");
  }
  if (!(params.N > 0)) throw Error(ErrorCode::negative_parameter, "N must be > 0");
  const Mesh& mesh = params.mesh();
  require_field(mesh, params.rates.beta, "beta");
  require_field(mesh, params.rates.gamma, "gamma");
  if (!(params.rates.beta.array() > 0).all()) {
    throw Error(ErrorCode::negative_parameter, "beta must be strictly positive");
  }
  if (!(params.rates.gamma.array() > 0).all()) {
    throw Error(ErrorCode::nonpositive_gamma, "gamma must be strictly positive");
  }
}

double steady_state_residual(const ModelParams& params, const Field& S, const Field& I) {
  const Kernel& kernel = *params.kernel;
  const Field& row = kernel.row_integral();
  const Field dS = params.d_S * (kernel.convolve(S) - row.cwiseProduct(S));
  const Field dI = params.d_I * (kernel.convolve(I) - row.cwiseProduct(I));
  double worst = 0.0;
  for (int i = 0; i < S.size(); ++i) {
    const double reaction =
        guarded_incidence(params.rates.beta[i], S[i], I[i]) - params.rates.gamma[i] * I[i];
    worst = std::max({worst, std::abs(dS[i] - reaction), std::abs(dI[i] + reaction)});
  }
  return worst;
}

EquilibriumResult disease_free(const ModelParams& params) {
  validate(params);
  const Mesh& mesh = params.mesh();
  EquilibriumResult out;
  out.S_tilde = Field::Constant(mesh.size(), params.N / mesh.length());
  out.I_tilde = Field::Zero(mesh.size());
  out.k = params.d_S * params.N / mesh.length();
  out.kind = EquilibriumKind::disease_free;
  out.residual = steady_state_residual(params, out.S_tilde, out.I_tilde);
  return out;
}

Field reduced_residual(const ModelParams& params, const Field& I) {
  const Kernel& kernel = *params.kernel;
  const double dS = params.d_S;
  const double dI = params.d_I;
  Field f = dI * (kernel.convolve(I) - kernel.row_integral().cwiseProduct(I));
  const Field& beta = params.rates.beta;
  const Field& gamma = params.rates.gamma;
  for (int i = 0; i < I.size(); ++i) {
    const double v = I[i];
    f[i] += (beta[i] - gamma[i]) * v - dS * beta[i] * v * v / (dS * v + dI * (1.0 - v));
  }
  return f;
}

double reduced_step(const ModelParams& params) {
  // The derivative of the quotient term is at most beta * max(1, d_I/d_S) + beta on [0, 1].
  const double ratio = std::max(1.0, params.d_I / params.d_S);
  const Field bound = params.d_I * params.kernel->row_integral() + params.rates.gamma +
                      ratio * params.rates.beta;
  return 1.0 / bound.maxCoeff();
}

MonotoneSolution solve_reduced_I(const ModelParams& params) {
  validate(params);
  const Kernel& kernel = *params.kernel;
  const double r0 = r0_of(kernel, params.d_I, params.rates);
  if (r0 <= 1.0 + 1e-9) {
    throw Error(ErrorCode::subcritical_regime,
                "endemic state needs R0 > 1, got R0 = " + std::to_string(r0));
  }

  const Field phi = principal_profile(kernel, params.d_I, params.rates.beta - params.rates.gamma,
                                      nullptr);
  const ResidualFn residual = [&params](const Field& I) { return reduced_residual(params, I); };
  const double delta = sub_solution_amplitude(residual, phi, 0.5 / phi.maxCoeff());

  MonotoneSolution sol = bracket_with_retry(residual, delta * phi,
                                            Field::Ones(kernel.size()), reduced_step(params));
  sol.delta = delta;
  return sol;
}

EquilibriumResult recover_equilibrium(const ModelParams& params, const Field& I_reduced) {
  validate(params);
  const Mesh& mesh = params.mesh();
  require_field(mesh, I_reduced, "reduced I");
  if (!(I_reduced.array() > 0).all() || !(I_reduced.array() < 1).all()) {
    throw Error(ErrorCode::out_of_range, "reduced I must lie strictly inside (0, 1)");
  }
  const Field S = (Field::Ones(mesh.size()) - I_reduced) / params.d_S;
  const double k = params.d_I * params.N / integrate(mesh, params.d_I * S + I_reduced);

  EquilibriumResult out;
  out.S_tilde = k * S;
  out.I_tilde = (k / params.d_I) * I_reduced;
  out.k = k;
  out.kind = EquilibriumKind::endemic;
  out.residual = steady_state_residual(params, out.S_tilde, out.I_tilde);
  return out;
}

EquilibriumResult solve_equilibrium(const ModelParams& params) {
  validate(params);
  if (r0_of(*params.kernel, params.d_I, params.rates) <= 1.0 + 1e-9) return disease_free(params);
  const MonotoneSolution reduced = solve_reduced_I(params);
  EquilibriumResult out = recover_equilibrium(params, reduced.value);
  out.iterations = reduced.iterations;
  return out;
}

MonotoneSolution logistic_steady(const Kernel& kernel, double d, const Field& r, const Field& c) {
  if (!(d > 0)) throw Error(ErrorCode::nonpositive_diffusivity, "d must be > 0");
  require_field(kernel.mesh(), r, "r");
  require_field(kernel.mesh(), c, "c");
  if (!(c.array() > 0).all()) throw Error(ErrorCode::negative_parameter, "c must be > 0");

  double lp = 0.0;
  const Field phi = principal_profile(kernel, d, r, &lp);
  if (lp >= -1e-9) {
    throw Error(ErrorCode::subcritical_regime,
                "logistic steady state needs lambda_p < 0, got " + std::to_string(lp));
  }

  const double cap = r.cwiseQuotient(c).maxCoeff();
  const Field bound = d * kernel.row_integral() + r.cwiseAbs() + 2.0 * cap * c;
  const double tau = 1.0 / bound.maxCoeff();

  const ResidualFn residual = [&kernel, d, &r, &c](const Field& u) {
    Field f = d * (kernel.convolve(u) - kernel.row_integral().cwiseProduct(u));
    f.array() += (r.array() - c.array() * u.array()) * u.array();
    return f;
  };
  const double delta = sub_solution_amplitude(residual, phi, cap);
  MonotoneSolution sol =
      bracket_with_retry(residual, delta * phi, Field::Constant(kernel.size(), cap), tau);
  sol.delta = delta;
  return sol;
}

MonotoneSolution theta_star(const Kernel& kernel, double d_I, const RateFields& rates) {
  const double r0 = r0_of(kernel, d_I, rates);
  if (r0 <= 1.0 + 1e-9) {
    throw Error(ErrorCode::subcritical_regime,
                "theta_* needs R0 > 1, got R0 = " + std::to_string(r0));
  }
  const Field& beta = rates.beta;
  const Field& gamma = rates.gamma;
  const double cap = d_I * (beta - gamma).cwiseQuotient(gamma).maxCoeff();
  const double tau = 1.0 / (d_I * kernel.row_integral() + gamma + beta).maxCoeff();

  const ResidualFn residual = [&kernel, d_I, &beta, &gamma](const Field& theta) {
    Field f = d_I * (kernel.convolve(theta) - kernel.row_integral().cwiseProduct(theta));
    for (int i = 0; i < theta.size(); ++i) {
      const double t = theta[i];
      f[i] += (beta[i] - gamma[i]) * t - beta[i] * t * t / (d_I + t);
    }
    return f;
  };
  const Field phi = principal_profile(kernel, d_I, beta - gamma, nullptr);
  const double delta = sub_solution_amplitude(residual, phi, cap);
  MonotoneSolution sol =
      bracket_with_retry(residual, delta * phi, Field::Constant(kernel.size(), cap), tau);
  sol.delta = delta;
  return sol;
}

namespace {

void require_high_risk_domain(const Mesh& mesh, const RateFields& rates) {
  const double ib = integrate(mesh, rates.beta);
  const double ig = integrate(mesh, rates.gamma);
  if (!(ib > ig)) {
    throw Error(ErrorCode::assumption_violated,
                "large-diffusion limits need int beta > int gamma (got " + std::to_string(ib) +
                    " <= " + std::to_string(ig) + ")");
  }
}

}  // namespace

std::pair<double, double> limit_profile_both_infinity(const RateFields& rates, double N,
                                                      const Mesh& mesh) {
  require_field(mesh, rates.beta, "beta");
  require_field(mesh, rates.gamma, "gamma");
  require_high_risk_domain(mesh, rates);
  const double ratio = integrate(mesh, rates.gamma) / integrate(mesh, rates.beta);
  const double density = N / mesh.length();
  return {density * ratio, density * (1.0 - ratio)};
}

LimitProfile limit_profile_ds_infinity(const Kernel& kernel, double d_I, const RateFields& rates,
                                       double N) {
  const Mesh& mesh = kernel.mesh();
  const Field theta = theta_star(kernel, d_I, rates).value;
  const double denom = integrate(mesh, Field::Constant(mesh.size(), d_I) + theta);
  LimitProfile out;
  out.S = Field::Constant(mesh.size(), d_I * N / denom);
  out.I = (N / denom) * theta;
  return out;
}

namespace {

// Fixed point S <- positive root of a S^2 + G(S) S - H(S) = 0 for a fixed I*.
Field solve_susceptible_profile(const Kernel& kernel, double d_S, const RateFields& rates,
                                double i_star, Field S, long* iterations) {
  const Field a = d_S * kernel.row_integral();
  const Field& beta = rates.beta;
  const Field& gamma = rates.gamma;
  for (long it = 1; it <= 100'000; ++it) {
    const Field h = d_S * kernel.convolve(S);
    double change = 0.0;
    for (int i = 0; i < S.size(); ++i) {
      const double G = (a[i] - gamma[i] + beta[i]) * i_star - h[i];
      const double H = gamma[i] * i_star * i_star + h[i] * i_star;
      const double disc = std::sqrt(G * G + 4.0 * a[i] * H);
      // Cancellation-free form of (-G + sqrt(G^2 + 4 a H)) / (2a).
      const double root = G >= 0 ? 2.0 * H / (G + disc) : (disc - G) / (2.0 * a[i]);
      change = std::max(change, std::abs(root - S[i]));
      S[i] = root;
    }
    if (change <= 1e-10) {
      *iterations += it;
      return S;
    }
  }
  throw Error(ErrorCode::no_convergence, "susceptible profile iteration exceeded 1e5 steps");
}

}  // namespace

DiInfinityProfile limit_profile_di_infinity(const Kernel& kernel, double d_S,
                                            const RateFields& rates, double N) {
  if (!(d_S > 0)) throw Error(ErrorCode::nonpositive_diffusivity, "d_S must be > 0");
  if (!(N > 0)) throw Error(ErrorCode::negative_parameter, "N must be > 0");
  const Mesh& mesh = kernel.mesh();
  require_field(mesh, rates.beta, "beta");
  require_field(mesh, rates.gamma, "gamma");
  require_high_risk_domain(mesh, rates);

  DiInfinityProfile out;
  const double length = mesh.length();
  auto mass_defect = [&](double i_star, Field& S) {
    S = solve_susceptible_profile(kernel, d_S, rates, i_star, std::move(S), &out.inner_iterations);
    return integrate(mesh, S) + i_star * length - N;
  };

  double lo = 0.0;
  double hi = N / length;
  double m_lo = -N;
  Field S_hi = Field::Constant(mesh.size(), hi);
  double m_hi = mass_defect(hi, S_hi);
  if (!(m_hi > 0)) {
    throw Error(ErrorCode::no_convergence, "mass defect does not change sign on (0, N/|Omega|)");
  }

  Field S = S_hi;
  double i_star = hi;
  double m = m_hi;
  for (int it = 1; it <= 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    // The stationary S equation is homogeneous of degree one in (S, I*).
    S *= mid / i_star;
    i_star = mid;
    m = mass_defect(i_star, S);
    out.outer_iterations = it;
    if (m < m_lo || m > m_hi) {
      throw Error(ErrorCode::no_convergence, "total mass is not monotone in I*");
    }
    if (std::abs(m) <= 1e-8 * N) break;
    if (m < 0) {
      lo = mid;
      m_lo = m;
    } else {
      hi = mid;
      m_hi = m;
    }
    if (it == 200) throw Error(ErrorCode::no_convergence, "I* bisection exceeded 200 steps");
  }

  out.S = std::move(S);
  out.I_star = i_star;
  out.mass_residual = m;
  const Field dispersal = d_S * (kernel.convolve(out.S) - kernel.row_integral().cwiseProduct(out.S));
  double worst = 0.0;
  for (int i = 0; i < out.S.size(); ++i) {
    const double r = dispersal[i] + rates.gamma[i] * i_star -
                     guarded_incidence(rates.beta[i], out.S[i], i_star);
    worst = std::max(worst, std::abs(r));
  }
  out.residual = worst;
  return out;
}

}  // namespace nlsis
