#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "npde/field.hpp"

namespace npde {

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

/// Three-point stencil Z_i = sub_i z_{i-1} + diag_i z_i + sup_i z_{i+1}.
struct TridiagonalKernel {
  TridiagonalKernel(Grid1D grid, std::vector<double> sub, std::vector<double> diag,
                    std::vector<double> sup);

  Grid1D grid;
  std::vector<double> sub;   // A_i
  std::vector<double> diag;  // C_i
  std::vector<double> sup;   // B_i

  std::vector<double> apply(std::span<const double> z) const;
  /// Transposed application, sum_i W_ij s_i.
  std::vector<double> apply_transpose(std::span<const double> s) const;
};

/// Dense weight operator, entry (i, j) is the weight from node j to node i.
struct DenseKernel {
  DenseKernel(Grid1D grid, Matrix matrix);

  Grid1D grid;
  Matrix matrix;

  std::vector<double> apply(std::span<const double> z) const;
};

DenseKernel to_dense(const TridiagonalKernel& kernel);

struct GaussianKernel {
  double amplitude = 1.0;
  double sigma = 1.0;
};

/// amplitude * |r|^-exponent, clamped to amplitude * cutoff^-exponent for |r| < cutoff.
struct PowerLawKernel {
  double amplitude = 1.0;
  double exponent = 2.0;
  double cutoff = 1.0;
};

using ContinuumKernel = std::variant<GaussianKernel, PowerLawKernel>;

ContinuumKernel make_gaussian_kernel(double amplitude, double sigma);
/// Gaussian with unit integral over the real line.
ContinuumKernel make_normalized_gaussian(double sigma);
ContinuumKernel make_power_law_kernel(double amplitude, double exponent, double cutoff);

/// W(r) for displacement r = q' - q.
double evaluate(const ContinuumKernel& kernel, double r);

/// moments[k][i] ~ W_k(q_i) in physical displacement units.
struct MomentProfile {
  std::size_t max_order = 0;
  std::vector<std::vector<double>> moments;

  std::size_t nodes() const { return moments.empty() ? 0 : moments.front().size(); }
};

enum class MomentTag {
  AmplitudeRescaling,
  Propagation,
  Diffusion,
  Dispersion,
  HyperDiffusion,
  AntiDiffusive,
};

std::string_view to_string(MomentTag tag);

struct OrderNote {
  std::size_t order = 0;
  std::vector<MomentTag> tags;  // one per node
};

struct ExplainReport {
  std::vector<double> R_hat;
  std::vector<double> U_hat;
  std::vector<double> D_hat;
  std::vector<OrderNote> notes;  // orders 0..max_order
};

TridiagonalKernel assemble_adr_stencil(double U, double D, double R, const Grid1D& grid);
TridiagonalKernel assemble_heterogeneous_adr(std::span<const double> U, std::span<const double> D,
                                             std::span<const double> R, const Grid1D& grid);

/// Stencil weights (A, B, C) for one node.
struct StencilWeights {
  double sub;
  double sup;
  double diag;
};
StencilWeights adr_weights(double U, double D, double R, double delta);

MomentProfile kernel_moments(const TridiagonalKernel& kernel, std::size_t max_order);
MomentProfile kernel_moments(const DenseKernel& kernel, std::size_t max_order);

/// Reads W_0 - 1, W_1 and W_2 / 2 as reaction, advection and diffusion per node.
ExplainReport explain_kernel(const MomentProfile& profile);

/// Classification of a moment value of the given order.
MomentTag classify_moment(std::size_t order, double value);

/// matrix(i, j) = W(r_ij) * delta, r_ij the minimal-image displacement under Periodic.
DenseKernel sample_continuum_kernel(const ContinuumKernel& kernel, const Grid1D& grid);

/// k-th moment of a homogeneous continuum kernel sampled on a periodic grid
/// centred at 0 with the given half-width and node count, read at the centre node.
double sampled_moment(const ContinuumKernel& kernel, std::size_t order, double half_width,
                      std::size_t nodes);

struct ScanPoint {
  double half_width;
  double delta;
  double magnitude;  // |W_k|
};

/// |W_k| on each domain (given as half-widths) with a fixed node count, so
/// delta / size is the same for every entry.
std::vector<ScanPoint> moment_convergence_scan(const ContinuumKernel& kernel, std::size_t order,
                                               std::span<const double> half_widths,
                                               std::size_t nodes = 4096);

struct CapacityReport {
  std::uint64_t weights;               // N^2 L
  double log10_paths;                  // L log10 N
  std::optional<std::uint64_t> paths;  // N^L when it fits in 64 bits
};

CapacityReport capacity_report(std::uint64_t width, std::uint64_t depth);

}  // namespace npde
