#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "npde/field.hpp"
#include "npde/kernels.hpp"

namespace npde {

/// Nodes d_k and weights p_k of a per-cell quadrature, 1 <= Q <= 3.
struct QuadratureRule {
  QuadratureRule(std::vector<double> offsets, std::vector<double> weights);

  std::vector<double> offsets;
  std::vector<double> weights;

  std::size_t size() const { return offsets.size(); }
  double measure() const;
};

/// Gauss-Legendre rule on the cell [-delta/2, delta/2]; weights sum to delta.
/// Q = 1 and Q = 3 place d_0 = 0 at the node itself.
QuadratureRule gauss_legendre_rule(std::size_t q, double delta);

/// Single node at the grid point with unit weight (plain point sampling).
QuadratureRule point_rule();

enum class BasisKind { Delta, Hat };

/// Basis function value at displacement d from its centre. Delta is read as a
/// Kronecker sample: 1 at d = 0, else 0.
double basis_value(BasisKind basis, double d, double delta);

/// Kernel and bias samples at quadrature-shifted nodes.
/// kernel(i, j, k, l) = W(q_i + d_k, q_j + d_l), bias(i, k) = b(q_i + d_k).
struct QuadratureSamples {
  std::size_t n = 0;
  std::size_t q = 0;
  std::vector<double> kernel;  // shape (n, n, q, q), row-major
  std::vector<double> bias;    // shape (n, q)

  QuadratureSamples(std::size_t n, std::size_t q);
  QuadratureSamples(std::size_t n, std::size_t q, std::vector<double> kernel,
                    std::vector<double> bias);

  double& W(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return kernel[((i * n + j) * q + k) * q + l];
  }
  double W(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return kernel[((i * n + j) * q + k) * q + l];
  }
  double& b(std::size_t i, std::size_t k) { return bias[i * q + k]; }
  double b(std::size_t i, std::size_t k) const { return bias[i * q + k]; }
};

using KernelFunction = std::function<double(double q, double q_prime)>;
using ScalarFunction = std::function<double(double q)>;

/// Kernel function W(q, q') = kernel(q' - q), minimal image under Periodic.
KernelFunction as_kernel_function(const ContinuumKernel& kernel, const Grid1D& grid);

/// W_ij = W(q_i, q_j) * delta and b_i = b(q_i).
std::pair<DenseKernel, Field> delta_basis_sample(const KernelFunction& W, const ScalarFunction& b,
                                                 const Grid1D& grid);
std::pair<DenseKernel, Field> delta_basis_sample(const ContinuumKernel& W, const ScalarFunction& b,
                                                 const Grid1D& grid);

QuadratureSamples sample_quadrature(const KernelFunction& W, const ScalarFunction& b,
                                    const Grid1D& grid, const QuadratureRule& rule);

/// Quadrature-generalized equilibrium
///   f_i = sum_k Phi^k f( sum_l sum_j W_ij^kl Phi^l z_j - p_k b_i^k ),  Phi^k = p_k phi(d_k).
Field quadrature_update(const Field& z, const QuadratureSamples& samples, BasisKind basis,
                        const QuadratureRule& rule, Activation f);

struct ClusterSet {
  std::size_t dimension = 0;
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> assignments;
  std::vector<double> volumes;        // V_c per cluster
  std::vector<std::size_t> counts;    // N_c per cluster
  std::vector<double> point_weights;  // p_i = V_c / N_c

  std::size_t clusters() const { return volumes.size(); }
};

/// Cluster ids must be 0..K-1 with every cluster non-empty. A zero extent on
/// some axis is replaced by the floor (default: smallest nonzero pairwise
/// distance in the cluster, or 1 if all points coincide).
ClusterSet build_cluster_set(std::vector<std::vector<double>> points,
                             std::vector<std::size_t> assignments,
                             std::optional<double> extent_floor = std::nullopt);

/// f_i = f( sum_j (W_ij p_j) z_j - b_i ).
std::vector<double> cluster_equilibrium(std::span<const double> z, const Matrix& W,
                                        std::span<const double> b,
                                        std::span<const double> weights, Activation f);

}  // namespace npde
