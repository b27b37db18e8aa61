#include "nlsis/mesh.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nlsis/error.hpp"

namespace nlsis {

Mesh build_mesh(double a, double b, int n) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::invalid_domain,
                "need b > a, got a=" + std::to_string(a) + " b=" + std::to_string(b));
  }
  if (n < 2) {
    throw Error(ErrorCode::invalid_domain, "need at least 2 nodes, got " + std::to_string(n));
  }
  const double h = (b - a) / n;
  Field nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = a + (i + 0.5) * h;
  return Mesh(a, b, std::move(nodes), h);
}

void require_field(const Mesh& mesh, const Field& f, const char* what) {
  if (f.size() != mesh.size()) {
    throw Error(ErrorCode::length_mismatch, std::string(what) + " has " +
                                                std::to_string(f.size()) + " entries, mesh has " +
                                                std::to_string(mesh.size()));
  }
}

double integrate(const Mesh& mesh, const Field& f) {
  require_field(mesh, f, "field");
  return mesh.weight() * f.sum();
}

namespace {

double gaussian_normalizer(const GaussianKernel& g) {
  // Full-line mass of exp(-x^2/(2 sigma^2)) restricted to |x| <= cutoff.
  return g.sigma * std::sqrt(2.0 * std::numbers::pi) *
         std::erf(g.cutoff / (g.sigma * std::numbers::sqrt2));
}

}  // namespace

double kernel_value(const KernelSpec& spec, double x) {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        const double ax = std::abs(x);
        if constexpr (std::is_same_v<K, TriangleKernel>) {
          return ax >= k.delta ? 0.0 : (1.0 - ax / k.delta) / k.delta;
        } else {
          if (ax > k.cutoff) return 0.0;
          return std::exp(-0.5 * (x / k.sigma) * (x / k.sigma)) / gaussian_normalizer(k);
        }
      },
      spec);
}

double kernel_effective_support(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, TriangleKernel>) {
          return k.delta;
        } else {
          return std::min(k.cutoff, k.sigma);
        }
      },
      spec);
}

Kernel build_kernel(const Mesh& mesh, const KernelSpec& spec) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, TriangleKernel>) {
          if (!(k.delta > 0)) throw Error(ErrorCode::negative_parameter, "triangle delta must be > 0");
        } else {
          if (!(k.sigma > 0) || !(k.cutoff > 0)) {
            throw Error(ErrorCode::negative_parameter, "gaussian sigma and cutoff must be > 0");
          }
        }
      },
      spec);

  const double h = mesh.weight();
  if (kernel_effective_support(spec) < 2.0 * h) {
    throw Error(ErrorCode::kernel_too_narrow,
                "kernel support " + std::to_string(kernel_effective_support(spec)) +
                    " is below two cell widths (" + std::to_string(2.0 * h) + ")");
  }

  // Uniform grid: the entry only depends on |i - j|, which keeps K exactly
  // symmetric (Toeplitz).
  const int n = mesh.size();
  Field by_offset(n);
  for (int k = 0; k < n; ++k) by_offset[k] = kernel_value(spec, k * h) * h;

  Eigen::MatrixXd matrix(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) matrix(i, j) = by_offset[std::abs(i - j)];
  }
  Field row = matrix.rowwise().sum();
  return Kernel(mesh, spec, std::move(matrix), std::move(row));
}

Field Kernel::convolve(const Field& u) const {
  require_field(mesh_, u, "convolution argument");
  return matrix_ * u;
}

}  // namespace nlsis
