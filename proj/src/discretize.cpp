#include "npde/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace npde {

QuadratureRule::QuadratureRule(std::vector<double> d, std::vector<double> p)
    : offsets(std::move(d)), weights(std::move(p)) {
  if (offsets.empty() || offsets.size() > 3) {
    throw std::invalid_argument("quadrature rule needs 1 to 3 nodes");
  }
  if (offsets.size() != weights.size()) {
    throw std::invalid_argument("quadrature offsets and weights differ in length");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!std::isfinite(offsets[k]) || !(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw std::invalid_argument("quadrature node " + std::to_string(k) +
                                  " needs a finite offset and a positive weight");
    }
  }
}

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double p : weights) s += p;
  return s;
}

QuadratureRule gauss_legendre_rule(std::size_t q, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("quadrature cell size must be positive");
  const double h = delta / 2.0;
  switch (q) {
    case 1: return QuadratureRule({0.0}, {delta});
    case 2: {
      const double x = h / std::sqrt(3.0);
      return QuadratureRule({-x, x}, {h, h});
    }
    case 3: {
      const double x = h * std::sqrt(3.0 / 5.0);
      return QuadratureRule({0.0, -x, x}, {h * 8.0 / 9.0, h * 5.0 / 9.0, h * 5.0 / 9.0});
    }
    default: throw std::invalid_argument("Gauss-Legendre rule supports Q = 1, 2, 3");
  }
}

QuadratureRule point_rule() { return QuadratureRule({0.0}, {1.0}); }

double basis_value(BasisKind basis, double d, double delta) {
  if (basis == BasisKind::Delta) return d == 0.0 ? 1.0 : 0.0;
  return std::max(0.0, 1.0 - std::abs(d) / delta);
}

QuadratureSamples::QuadratureSamples(std::size_t n_, std::size_t q_)
    : n(n_), q(q_), kernel(n_ * n_ * q_ * q_, 0.0), bias(n_ * q_, 0.0) {}

QuadratureSamples::QuadratureSamples(std::size_t n_, std::size_t q_, std::vector<double> k,
                                     std::vector<double> b)
    : n(n_), q(q_), kernel(std::move(k)), bias(std::move(b)) {
  if (kernel.size() != n * n * q * q) {
    throw std::invalid_argument("kernel samples must have shape (n, n, Q, Q)");
  }
  if (bias.size() != n * q) throw std::invalid_argument("bias samples must have shape (n, Q)");
}

KernelFunction as_kernel_function(const ContinuumKernel& kernel, const Grid1D& grid) {
  return [kernel, grid](double q, double qp) {
    double r = qp - q;
    if (grid.boundary() == Boundary::Periodic) {
      const double L = grid.length();
      r -= L * std::round(r / L);
    }
    return evaluate(kernel, r);
  };
}

std::pair<DenseKernel, Field> delta_basis_sample(const KernelFunction& W, const ScalarFunction& b,
                                                 const Grid1D& grid) {
  const auto n = grid.size();
  Matrix m(n, n);
  std::vector<double> bias(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = W(grid.node(i), grid.node(j)) * grid.delta();
    bias[i] = b(grid.node(i));
  }
  return {DenseKernel(grid, std::move(m)), Field(grid, std::move(bias))};
}

std::pair<DenseKernel, Field> delta_basis_sample(const ContinuumKernel& W, const ScalarFunction& b,
                                                 const Grid1D& grid) {
  return delta_basis_sample(as_kernel_function(W, grid), b, grid);
}

QuadratureSamples sample_quadrature(const KernelFunction& W, const ScalarFunction& b,
                                    const Grid1D& grid, const QuadratureRule& rule) {
  const auto n = grid.size();
  const auto Q = rule.size();
  QuadratureSamples s(n, Q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < Q; ++k) {
      const double qi = grid.node(i) + rule.offsets[k];
      s.b(i, k) = b(qi);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < Q; ++l) {
          s.W(i, j, k, l) = W(qi, grid.node(j) + rule.offsets[l]);
        }
      }
    }
  }
  return s;
}

Field quadrature_update(const Field& z, const QuadratureSamples& samples, BasisKind basis,
                        const QuadratureRule& rule, Activation f) {
  const auto n = z.size();
  const auto Q = rule.size();
  if (samples.n != n || samples.q != Q) {
    throw std::invalid_argument("quadrature samples shape (" + std::to_string(samples.n) + ", " +
                                std::to_string(samples.q) + ") does not match field size " +
                                std::to_string(n) + " and rule size " + std::to_string(Q));
  }
  const double delta = z.grid().delta();
  std::vector<double> phi(Q);
  for (std::size_t k = 0; k < Q; ++k) {
    phi[k] = rule.weights[k] * basis_value(basis, rule.offsets[k], delta);
  }

  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double fi = 0.0;
    for (std::size_t k = 0; k < Q; ++k) {
      if (phi[k] == 0.0) continue;
      double acc = 0.0;
      for (std::size_t l = 0; l < Q; ++l) {
        if (phi[l] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) acc += samples.W(i, j, k, l) * phi[l] * z[j];
      }
      fi += phi[k] * activate(f, acc - rule.weights[k] * samples.b(i, k));
    }
    out[i] = fi;
  }
  return Field(z.grid(), std::move(out));
}

ClusterSet build_cluster_set(std::vector<std::vector<double>> points,
                             std::vector<std::size_t> assignments,
                             std::optional<double> extent_floor) {
  if (points.empty()) throw std::invalid_argument("cluster set needs at least one point");
  if (points.size() != assignments.size()) {
    throw std::invalid_argument("every point needs exactly one cluster assignment");
  }
  const auto dim = points.front().size();
  if (dim == 0) throw std::invalid_argument("points need at least one coordinate");
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (points[p].size() != dim) {
      throw std::invalid_argument("point " + std::to_string(p) + " has dimension " +
                                  std::to_string(points[p].size()) + ", expected " +
                                  std::to_string(dim));
    }
  }
  if (extent_floor && !(*extent_floor > 0.0)) {
    throw std::invalid_argument("cluster extent floor must be positive");
  }

  const auto K = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<std::vector<std::size_t>> members(K);
  for (std::size_t p = 0; p < points.size(); ++p) members[assignments[p]].push_back(p);

  ClusterSet set;
  set.dimension = dim;
  set.volumes.resize(K);
  set.counts.resize(K);
  for (std::size_t c = 0; c < K; ++c) {
    const auto& idx = members[c];
    if (idx.empty()) throw std::invalid_argument("cluster " + std::to_string(c) + " is empty");

    double floor = 0.0;
    if (extent_floor) {
      floor = *extent_floor;
    } else {
      floor = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
          double d2 = 0.0;
          for (std::size_t x = 0; x < dim; ++x) {
            const double d = points[idx[a]][x] - points[idx[b]][x];
            d2 += d * d;
          }
          if (d2 > 0.0) floor = std::min(floor, std::sqrt(d2));
        }
      }
      if (!std::isfinite(floor)) floor = 1.0;
    }

    double volume = 1.0;
    for (std::size_t x = 0; x < dim; ++x) {
      double lo = points[idx.front()][x];
      double hi = lo;
      for (auto p : idx) {
        lo = std::min(lo, points[p][x]);
        hi = std::max(hi, points[p][x]);
      }
      const double extent = hi - lo;
      volume *= extent > 0.0 ? extent : floor;
    }
    set.volumes[c] = volume;
    set.counts[c] = idx.size();
  }

  set.point_weights.resize(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto c = assignments[p];
    set.point_weights[p] = set.volumes[c] / static_cast<double>(set.counts[c]);
  }
  set.points = std::move(points);
  set.assignments = std::move(assignments);
  return set;
}

std::vector<double> cluster_equilibrium(std::span<const double> z, const Matrix& W,
                                        std::span<const double> b,
                                        std::span<const double> weights, Activation f) {
  const auto n = z.size();
  if (W.rows != n || W.cols != n || b.size() != n || weights.size() != n) {
    throw std::invalid_argument("cluster_equilibrium: inconsistent sizes");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += (W(i, j) * weights[j]) * z[j];
    out[i] = activate(f, acc - b[i]);
  }
  return out;
}

}  // namespace npde
