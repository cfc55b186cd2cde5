#include "npde/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace npde {

Grid1D::Grid1D(std::size_t n, double delta, double origin, Boundary boundary)
    : n_(n), delta_(delta), origin_(origin), boundary_(boundary) {
  if (n < 2) {
    throw std::invalid_argument("grid needs at least 2 nodes, got " + std::to_string(n));
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("grid spacing must be positive and finite");
  }
  if (!std::isfinite(origin)) {
    throw std::invalid_argument("grid origin must be finite");
  }
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> q(n_);
  for (std::size_t i = 0; i < n_; ++i) q[i] = node(i);
  return q;
}

long Grid1D::offset(std::size_t i, std::size_t j) const {
  long m = static_cast<long>(j) - static_cast<long>(i);
  if (boundary_ == Boundary::Periodic) {
    const long n = static_cast<long>(n_);
    if (m > n / 2) m -= n;
    if (m < -n / 2) m += n;
    if (n % 2 == 0 && m == -n / 2) m = n / 2;
  }
  return m;
}

Grid1D make_uniform_grid(std::size_t n, double delta, double origin, Boundary boundary) {
  return Grid1D(n, delta, origin, boundary);
}

Field::Field(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values on a grid of " + std::to_string(grid_.size()) + " nodes");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("non-finite field value at node " + std::to_string(i));
    }
  }
}

Field Field::zeros(const Grid1D& grid) { return Field(grid, std::vector<double>(grid.size(), 0.0)); }

Field Field::constant(const Grid1D& grid, double value) {
  return Field(grid, std::vector<double>(grid.size(), value));
}

double activate(Activation f, double z) {
  switch (f) {
    case Activation::Identity: return z;
    case Activation::Tanh: return std::tanh(z);
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Square: return z * z;
  }
  return z;
}

double activate_derivative(Activation f, double z) {
  switch (f) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::Square: return 2.0 * z;
  }
  return 1.0;
}

Field apply_activation(Activation f, const Field& z) {
  std::vector<double> out(z.size());
  std::transform(z.values().begin(), z.values().end(), out.begin(),
                 [f](double v) { return activate(f, v); });
  return Field(z.grid(), std::move(out));
}

double norm_sq_discrete(const Field& z) {
  double s = 0.0;
  for (double v : z.values()) s += v * v;
  return s;
}

double norm_sq(const Field& z) { return norm_sq_discrete(z) * z.grid().delta(); }

double norm(const Field& z, NormKind kind) {
  return std::sqrt(kind == NormKind::Integral ? norm_sq(z) : norm_sq_discrete(z));
}

double loss_distance(const Field& z, const Field& target) {
  require_same_grid(z.grid(), target.grid(), "loss_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - target[i];
    s += d * d;
  }
  return s;
}

void require_same_grid(const Grid1D& a, const Grid1D& b, std::string_view what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
  }
}

std::string_view to_string(Activation f) {
  switch (f) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Square: return "square";
  }
  return "identity";
}

std::string_view to_string(Boundary b) {
  return b == Boundary::Periodic ? "periodic" : "zeropad";
}

Activation parse_activation(std::string_view name) {
  for (auto f : {Activation::Identity, Activation::Tanh, Activation::ReLU, Activation::Sigmoid,
                 Activation::Square}) {
    if (name == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Boundary parse_boundary(std::string_view name) {
  if (name == "periodic") return Boundary::Periodic;
  if (name == "zeropad") return Boundary::ZeroPad;
  throw std::invalid_argument("unknown boundary '" + std::string(name) + "'");
}

}  // namespace npde
