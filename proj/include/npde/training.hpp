#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "npde/dynamics.hpp"
#include "npde/field.hpp"

namespace npde {

enum class ParamMode { Homogeneous, Heterogeneous, OnTheFly };

std::string_view to_string(ParamMode mode);
ParamMode parse_param_mode(std::string_view name);

/// Trainable ADR coefficients. Storage length per array is 1 (Homogeneous),
/// N (Heterogeneous) or N * layers (OnTheFly, layer-major: index l * N + i).
struct ADRParams {
  ParamMode mode = ParamMode::Homogeneous;
  std::size_t nodes = 1;
  std::size_t layers = 1;
  std::vector<double> U;
  std::vector<double> D;
  std::vector<double> R;

  static ADRParams homogeneous(double U, double D, double R);
  static ADRParams heterogeneous(std::vector<double> U, std::vector<double> D,
                                 std::vector<double> R);
  static ADRParams on_the_fly(std::size_t nodes, std::size_t layers, std::vector<double> U,
                              std::vector<double> D, std::vector<double> R);
  /// All-zero coefficients (identity dynamics) for the given mode.
  static ADRParams zeros(ParamMode mode, std::size_t nodes, std::size_t layers);

  std::size_t per_array() const { return U.size(); }
  std::size_t count() const { return 3 * U.size(); }

  /// Checks shapes against a grid of n nodes driven for the given step count.
  void validate(std::size_t n, std::size_t steps) const;

  /// [U..., D..., R...]
  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
};

/// Constant embeddings of a homogeneous parameter set into the richer modes.
ADRParams embed_heterogeneous(const ADRParams& homogeneous, std::size_t nodes);
ADRParams embed_on_the_fly(const ADRParams& params, std::size_t nodes, std::size_t layers);

enum class GradientMode { ChainRule, FiniteDifference };

struct TrainConfig {
  double lr = 0.1;
  double tolerance = 1e-6;
  std::size_t max_iters = 1000;
  double omega = 1.0;
  std::size_t steps = 1;
  Activation activation = Activation::Tanh;
  double norm_coupling = 0.0;
  NormKind norm_kind = NormKind::Integral;
  GradientMode gradient_mode = GradientMode::ChainRule;
  double fd_step = 1e-6;
  std::size_t max_halvings = 30;

  void validate() const;
  RelaxConfig relax() const { return {omega, steps, norm_coupling, norm_kind}; }
};

struct TrainResult {
  ADRParams params;
  std::vector<double> loss_history;
  bool converged = false;
  std::size_t iterations = 0;
};

/// One tridiagonal kernel per step (a single one for non-OnTheFly modes).
std::vector<Kernel> build_kernels(const ADRParams& params, const Grid1D& grid, std::size_t steps);

/// Evolves x under the params (zero bias) and scores the final state.
double terminal_loss(const ADRParams& params, const Field& x, const Field& target,
                     const TrainConfig& config);

/// Score of the state after t steps, 0 <= t <= steps.
double running_loss(const ADRParams& params, const Field& x, const Field& target,
                    const TrainConfig& config, std::size_t t);

/// Gradient in flatten() layout. Homogeneous and Heterogeneous differentiate
/// terminal_loss; OnTheFly differentiates, for each layer l, running_loss at
/// step l + 1 with respect to the layer-l coefficients.
std::vector<double> gradient(const ADRParams& params, const Field& x, const Field& target,
                             const TrainConfig& config);

/// Steepest descent with backtracking (halve lr while the step increases loss).
TrainResult fit(const ADRParams& initial, const Field& x, const Field& target,
                const TrainConfig& config);

/// ADR coefficient count: 1 + d + d(d+1)/2 per node, times N and L as the mode requires.
std::size_t parameter_count(ParamMode mode, std::size_t nodes, std::size_t layers,
                            std::size_t dimension);

}  // namespace npde
