#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nlsis {

// Grid samples aligned with Mesh::nodes (S, I, beta, gamma, eigenvectors, ...).
using Field = Eigen::VectorXd;

/// Uniform midpoint grid on the interval (a, b).
///
/// node[i] = a + (i + 1/2) h with h = (b - a)/n; every node carries the same
/// quadrature weight h, so integrals are h * sum(f).
class Mesh {
 public:
  double a() const { return a_; }
  double b() const { return b_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double weight() const { return weight_; }
  double length() const { return b_ - a_; }
  const Field& nodes() const { return nodes_; }
  double node(int i) const { return nodes_[i]; }

  friend Mesh build_mesh(double a, double b, int n);

 private:
  Mesh(double a, double b, Field nodes, double weight)
      : a_(a), b_(b), nodes_(std::move(nodes)), weight_(weight) {}

  double a_;
  double b_;
  Field nodes_;
  double weight_;
};

// Throws Error{invalid_domain} unless b > a and n >= 2.
Mesh build_mesh(double a, double b, int n);

double integrate(const Mesh& mesh, const Field& f);

// J(x) = max(0, 1 - |x|/delta) / delta.
struct TriangleKernel {
  double delta = 0.5;
  bool operator==(const TriangleKernel&) const = default;
};

// J(x) = exp(-x^2 / (2 sigma^2)) / Z on |x| <= cutoff, zero outside, with Z
// chosen so the full-line mass is one.
struct GaussianKernel {
  double sigma = 0.2;
  double cutoff = 0.6;
  bool operator==(const GaussianKernel&) const = default;
};

using KernelSpec = std::variant<TriangleKernel, GaussianKernel>;

double kernel_value(const KernelSpec& spec, double x);

// Radius used for the kernel-too-narrow check.
double kernel_effective_support(const KernelSpec& spec);

/// Discretized dispersal kernel on a mesh.
///
/// matrix(i, j) = J(x_i - x_j) * h, row_integral(i) = sum_j matrix(i, j),
/// the midpoint approximation of the kernel mass that stays inside the domain.
class Kernel {
 public:
  const Mesh& mesh() const { return mesh_; }
  const KernelSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Field& row_integral() const { return row_integral_; }
  int size() const { return mesh_.size(); }

  // (K u)_i, the discrete convolution over the domain.
  Field convolve(const Field& u) const;

  friend Kernel build_kernel(const Mesh& mesh, const KernelSpec& spec);

 private:
  Kernel(Mesh mesh, KernelSpec spec, Eigen::MatrixXd matrix, Field row_integral)
      : mesh_(std::move(mesh)),
        spec_(spec),
        matrix_(std::move(matrix)),
        row_integral_(std::move(row_integral)) {}

  Mesh mesh_;
  KernelSpec spec_;
  Eigen::MatrixXd matrix_;
  Field row_integral_;
};

Kernel build_kernel(const Mesh& mesh, const KernelSpec& spec);

// Throws Error{length_mismatch} when f does not have one entry per node.
void require_field(const Mesh& mesh, const Field& f, const char* what);

}  // namespace nlsis
