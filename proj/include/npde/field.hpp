#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace npde {

enum class Boundary { Periodic, ZeroPad };

/// Uniform 1D grid with nodes q_i = origin + i * delta.
class Grid1D {
public:
  Grid1D(std::size_t n, double delta, double origin = 0.0, Boundary boundary = Boundary::Periodic);

  std::size_t size() const { return n_; }
  double delta() const { return delta_; }
  double origin() const { return origin_; }
  Boundary boundary() const { return boundary_; }

  double node(std::size_t i) const { return origin_ + static_cast<double>(i) * delta_; }
  std::vector<double> nodes() const;
  /// Length covered by the periodic cell, n * delta.
  double length() const { return static_cast<double>(n_) * delta_; }

  /// Signed lattice offset from node i to node j; minimal image under Periodic.
  /// Under Periodic with even n, the offset n/2 is returned as +n/2.
  long offset(std::size_t i, std::size_t j) const;
  /// True when j sits exactly half a period away from i (Periodic, even n).
  bool antipodal(std::size_t i, std::size_t j) const {
    return boundary_ == Boundary::Periodic && n_ % 2 == 0 &&
           (i > j ? i - j : j - i) == n_ / 2;
  }

  static constexpr std::size_t none = static_cast<std::size_t>(-1);
  /// Neighbour index at lattice offset -1 / +1, or `none` past a ZeroPad edge.
  std::size_t left(std::size_t i) const {
    if (i > 0) return i - 1;
    return boundary_ == Boundary::Periodic ? n_ - 1 : none;
  }
  std::size_t right(std::size_t i) const {
    if (i + 1 < n_) return i + 1;
    return boundary_ == Boundary::Periodic ? 0 : none;
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
  std::size_t n_;
  double delta_;
  double origin_;
  Boundary boundary_;
};

Grid1D make_uniform_grid(std::size_t n, double delta, double origin = 0.0,
                         Boundary boundary = Boundary::Periodic);

/// Real signal sampled on a grid. Entries are always finite.
class Field {
public:
  Field(Grid1D grid, std::vector<double> values);
  static Field zeros(const Grid1D& grid);
  static Field constant(const Grid1D& grid, double value);

  const Grid1D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

private:
  Grid1D grid_;
  std::vector<double> values_;
};

enum class Activation { Identity, Tanh, ReLU, Sigmoid, Square };

double activate(Activation f, double z);
/// Derivative of the activation; ReLU uses 0 at the kink.
double activate_derivative(Activation f, double z);

Field apply_activation(Activation f, const Field& z);

/// Integral norm squared: sum_i z_i^2 * delta.
double norm_sq(const Field& z);
/// Plain vector norm squared: sum_i z_i^2.
double norm_sq_discrete(const Field& z);

enum class NormKind { Integral, Discrete };
double norm(const Field& z, NormKind kind = NormKind::Integral);

/// sum_i (z_i - y_i)^2, no delta weighting.
double loss_distance(const Field& z, const Field& target);

void require_same_grid(const Grid1D& a, const Grid1D& b, std::string_view what);

std::string_view to_string(Activation f);
std::string_view to_string(Boundary b);
Activation parse_activation(std::string_view name);
Boundary parse_boundary(std::string_view name);

}  // namespace npde
