#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "npde/field.hpp"
#include "npde/kernels.hpp"

namespace npde {

using Kernel = std::variant<TridiagonalKernel, DenseKernel>;

const Grid1D& kernel_grid(const Kernel& kernel);

/// A state went non-finite. step is 1-based: the step that produced the bad state.
class DivergenceError : public std::runtime_error {
public:
  explicit DivergenceError(std::size_t step);
  std::size_t step() const { return step_; }

private:
  std::size_t step_;
};

struct RelaxConfig {
  double omega = 1.0;         // gamma * dt, in (0, 1]
  std::size_t steps = 1;      // L hidden layers plus output take L + 1 steps
  double norm_coupling = 0.0; // soft normalization strength, 0 = off
  NormKind norm_kind = NormKind::Integral;

  void validate() const;
};

struct Trajectory {
  std::vector<Field> states;  // states[0] is the input, states[t] after t steps

  const Field& final_state() const { return states.back(); }
  std::size_t steps() const { return states.size() - 1; }
};

struct AttractorResult {
  Field z_star;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// (1 - omega) z + omega fz, written as z + omega (fz - z) so that fz == z
/// leaves z untouched; omega == 1 returns fz itself.
inline double relax_blend(double z, double fz, double omega) {
  return omega == 1.0 ? fz : z + omega * (fz - z);
}

/// Z = W z - b.
Field weight_transform(const Kernel& W, const Field& z, const Field& b);

/// z_eq = f[Z].
Field local_equilibrium(Activation f, const Field& Z);

/// z - f[W z - b]; zero exactly at equilibria.
Field liouvillean_residual(const Field& z, const Kernel& W, const Field& b, Activation f);

/// One relaxation step:
///   z' = (1 - omega) z + omega f(W z - b) + omega * coupling * (1 - |z|) z
/// Throws DivergenceError(1) if the result is not finite.
Field relaxation_step(const Field& z, const Kernel& W, const Field& b, Activation f, double omega,
                      double norm_coupling, NormKind norm_kind = NormKind::Integral);

Trajectory evolve(const Field& x, const Kernel& W, const Field& b, Activation f,
                  const RelaxConfig& config);
/// Time-dependent weights: kernels[t] drives step t + 1.
Trajectory evolve(const Field& x, std::span<const Kernel> kernels, const Field& b, Activation f,
                  const RelaxConfig& config);

/// Relaxes until max_i |z_i - f(W z - b)_i| <= tol or max_iters steps are taken.
AttractorResult find_attractor(const Field& x, const Kernel& W, const Field& b, Activation f,
                               double omega, double tol, std::size_t max_iters);

/// loss_distance of every state against the target.
std::vector<double> per_step_loss(const Trajectory& trajectory, const Field& target);

}  // namespace npde
