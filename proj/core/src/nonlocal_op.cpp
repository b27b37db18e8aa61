#include "nlsis/nonlocal_op.hpp"

#include <cmath>
#include <string>

#include "nlsis/error.hpp"

namespace nlsis {

Field OperatorMatrix::apply(const Field& u) const {
  if (u.size() != entries.cols()) {
    throw Error(ErrorCode::length_mismatch, "operator of size " + std::to_string(entries.cols()) +
                                                " applied to field of size " +
                                                std::to_string(u.size()));
  }
  return entries * u;
}

OperatorMatrix assemble_dispersal(const Kernel& kernel, double d) {
  if (!(d > 0)) {
    throw Error(ErrorCode::nonpositive_diffusivity, "diffusivity must be > 0, got " + std::to_string(d));
  }
  OperatorMatrix op;
  op.entries = kernel.matrix();
  op.entries.diagonal() -= kernel.row_integral();
  op.entries *= d;
  op.symmetric_flag = true;
  return op;
}

OperatorMatrix assemble_A(const Kernel& kernel, double d_I, const Field& gamma) {
  require_field(kernel.mesh(), gamma, "gamma");
  if (!(gamma.array() > 0).all()) {
    throw Error(ErrorCode::nonpositive_gamma, "gamma must be strictly positive at every node");
  }
  OperatorMatrix op = assemble_dispersal(kernel, d_I);
  op.entries.diagonal() -= gamma;
  return op;
}

double spectral_bound(const OperatorMatrix& op) {
  if (!op.symmetric_flag) {
    throw Error(ErrorCode::asymmetric_operator, "spectral_bound only handles symmetric operators");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.entries, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::no_convergence, "symmetric eigensolver failed");
  }
  return solver.eigenvalues()[op.size() - 1];
}

double dispersal_quadratic_form(const Kernel& kernel, const Field& u) {
  require_field(kernel.mesh(), u, "field");
  const Field ku = kernel.matrix() * u;
  return (u.dot(ku) - u.cwiseProduct(kernel.row_integral()).dot(u)) * kernel.mesh().weight();
}

}  // namespace nlsis
