#pragma once

#include <functional>

#include "nlsis/mesh.hpp"

namespace nlsis {

// Residual F of a steady-state problem F(u) = 0.
using ResidualFn = std::function<Field(const Field&)>;

struct MonotoneSolution {
  Field value;  // midpoint of the collapsed bracket
  Field upper;
  Field lower;
  double gap = 0.0;  // sup-norm of upper - lower at exit
  long iterations = 0;
  double tau = 0.0;
  double delta = 0.0;  // sub-solution amplitude, when one was constructed
  bool ordered = true;   // upper >= lower at every step
  bool monotone = true;  // upper nonincreasing, lower nondecreasing
};

/// Iterates u <- u + tau F(u) from a super-solution (upper) and a
/// sub-solution (lower) until the two iterates agree within tol in sup-norm.
/// tau must make the map order-preserving; ordering and monotonicity are
/// checked at every step with 1e-12 slack and reported, not thrown.
/// Throws Error{no_convergence} after max_iter steps.
MonotoneSolution monotone_bracket(const ResidualFn& residual, Field lower, Field upper, double tau,
                                  double tol, long max_iter);

/// Largest delta = delta0 / 2^k (k <= 60) with F(delta phi) >= 0 at every
/// node, up to round-off of order 1e-13 delta. Throws Error{no_convergence}.
double sub_solution_amplitude(const ResidualFn& residual, const Field& phi, double delta0);

/// Plain iteration u <- u + tau F(u) until the update is <= tol in sup-norm.
Field relax_to_fixed_point(const ResidualFn& residual, Field start, double tau, double tol,
                           long max_iter, long* iterations = nullptr);

}  // namespace nlsis
