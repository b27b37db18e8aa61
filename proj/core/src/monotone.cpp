#include "nlsis/monotone.hpp"

#include <string>

#include "nlsis/error.hpp"

namespace nlsis {

namespace {
constexpr double kOrderSlack = 1e-12;
}

MonotoneSolution monotone_bracket(const ResidualFn& residual, Field lower, Field upper, double tau,
                                  double tol, long max_iter) {
  MonotoneSolution out;
  out.tau = tau;
  if ((lower - upper).maxCoeff() > kOrderSlack) out.ordered = false;

  for (long it = 0; it < max_iter; ++it) {
    const double gap = (upper - lower).cwiseAbs().maxCoeff();
    if (gap <= tol) {
      out.gap = gap;
      out.iterations = it;
      out.value = 0.5 * (upper + lower);
      out.upper = std::move(upper);
      out.lower = std::move(lower);
      return out;
    }
    Field next_upper = upper + tau * residual(upper);
    Field next_lower = lower + tau * residual(lower);
    if ((next_upper - upper).maxCoeff() > kOrderSlack) out.monotone = false;
    if ((lower - next_lower).maxCoeff() > kOrderSlack) out.monotone = false;
    if ((next_lower - next_upper).maxCoeff() > kOrderSlack) out.ordered = false;
    upper = std::move(next_upper);
    lower = std::move(next_lower);
  }
  throw Error(ErrorCode::no_convergence,
              "monotone iteration did not close the bracket in " + std::to_string(max_iter) +
                  " steps (gap " + std::to_string((upper - lower).cwiseAbs().maxCoeff()) + ")");
}

double sub_solution_amplitude(const ResidualFn& residual, const Field& phi, double delta0) {
  double delta = delta0;
  for (int k = 0; k <= 60; ++k) {
    const Field r = residual(delta * phi);
    if (r.minCoeff() >= -1e-13 * delta) return delta;
    delta *= 0.5;
  }
  throw Error(ErrorCode::no_convergence, "no sub-solution found after 60 halvings");
}

Field relax_to_fixed_point(const ResidualFn& residual, Field start, double tau, double tol,
                           long max_iter, long* iterations) {
  for (long it = 0; it < max_iter; ++it) {
    const Field step = tau * residual(start);
    start += step;
    if (step.cwiseAbs().maxCoeff() <= tol) {
      if (iterations) *iterations = it + 1;
      return start;
    }
  }
  throw Error(ErrorCode::no_convergence,
              "fixed-point relaxation did not settle in " + std::to_string(max_iter) + " steps");
}

}  // namespace nlsis
