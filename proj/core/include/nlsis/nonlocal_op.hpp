#pragma once

#include <Eigen/Dense>

#include "nlsis/mesh.hpp"

namespace nlsis {

// Dense operator matrix acting on fields by plain matrix-vector product.
struct OperatorMatrix {
  Eigen::MatrixXd entries;
  bool symmetric_flag = false;

  Field apply(const Field& u) const;
  int size() const { return static_cast<int>(entries.rows()); }
};

/// d (K - diag(row_integral)): the discrete form of
/// u -> d * integral J(x - y)(u(y) - u(x)) dy over the domain.
/// Rows annihilate constants and columns sum to zero, which is the discrete
/// mass conservation identity.
OperatorMatrix assemble_dispersal(const Kernel& kernel, double d);

/// Linearized infection operator d_I (K - D) - diag(gamma).
OperatorMatrix assemble_A(const Kernel& kernel, double d_I, const Field& gamma);

// Largest eigenvalue of a symmetric operator. Refuses nonsymmetric input.
double spectral_bound(const OperatorMatrix& op);

// u^T (K - D) u * h, the (negative) Dirichlet form of the dispersal operator.
double dispersal_quadratic_form(const Kernel& kernel, const Field& u);

}  // namespace nlsis
