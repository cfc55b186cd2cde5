#include "npde/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace npde {

namespace {

std::vector<double> apply_kernel(const Kernel& W, std::span<const double> z) {
  return std::visit([&](const auto& k) { return k.apply(z); }, W);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Infinity-norm of the equilibrium residual; NaN/Inf propagate to the caller.
double max_abs_residual(const Field& z, const Kernel& W, const Field& b, Activation f) {
  const auto Z = apply_kernel(W, z.values());
  double m = 0.0;
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const double r = std::abs(z[i] - activate(f, Z[i] - b[i]));
    if (!std::isfinite(r)) return r;
    m = std::max(m, r);
  }
  return m;
}

// Raw update without the finiteness check so callers can report their own step index.
std::vector<double> advance(const Field& z, const Kernel& W, const Field& b, Activation f,
                            double omega, double coupling, NormKind kind) {
  auto Z = apply_kernel(W, z.values());
  const auto n = z.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = relax_blend(z[i], activate(f, Z[i] - b[i]), omega);
  }
  if (coupling != 0.0) {
    const double damping = omega * coupling * (1.0 - norm(z, kind));
    for (std::size_t i = 0; i < n; ++i) out[i] += damping * z[i];
  }
  return out;
}

void check_omega(double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) {
    throw std::invalid_argument("omega must lie in (0, 1], got " + std::to_string(omega));
  }
}

}  // namespace

const Grid1D& kernel_grid(const Kernel& kernel) {
  return std::visit([](const auto& k) -> const Grid1D& { return k.grid; }, kernel);
}

DivergenceError::DivergenceError(std::size_t step)
    : std::runtime_error("state diverged (non-finite value) at step " + std::to_string(step)),
      step_(step) {}

void RelaxConfig::validate() const {
  check_omega(omega);
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(norm_coupling >= 0.0) || !std::isfinite(norm_coupling)) {
    throw std::invalid_argument("norm_coupling must be finite and non-negative");
  }
}

Field weight_transform(const Kernel& W, const Field& z, const Field& b) {
  require_same_grid(kernel_grid(W), z.grid(), "weight_transform");
  require_same_grid(z.grid(), b.grid(), "weight_transform");
  auto Z = apply_kernel(W, z.values());
  for (std::size_t i = 0; i < Z.size(); ++i) Z[i] -= b[i];
  return Field(z.grid(), std::move(Z));
}

Field local_equilibrium(Activation f, const Field& Z) { return apply_activation(f, Z); }

Field liouvillean_residual(const Field& z, const Kernel& W, const Field& b, Activation f) {
  const auto eq = local_equilibrium(f, weight_transform(W, z, b));
  std::vector<double> r(z.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = z[i] - eq[i];
  return Field(z.grid(), std::move(r));
}

Field relaxation_step(const Field& z, const Kernel& W, const Field& b, Activation f, double omega,
                      double norm_coupling, NormKind norm_kind) {
  check_omega(omega);
  if (!(norm_coupling >= 0.0)) throw std::invalid_argument("norm_coupling must be non-negative");
  require_same_grid(kernel_grid(W), z.grid(), "relaxation_step");
  require_same_grid(z.grid(), b.grid(), "relaxation_step");
  auto next = advance(z, W, b, f, omega, norm_coupling, norm_kind);
  if (!all_finite(next)) throw DivergenceError(1);
  return Field(z.grid(), std::move(next));
}

Trajectory evolve(const Field& x, const Kernel& W, const Field& b, Activation f,
                  const RelaxConfig& config) {
  return evolve(x, std::span<const Kernel>(&W, 1), b, f, config);
}

Trajectory evolve(const Field& x, std::span<const Kernel> kernels, const Field& b, Activation f,
                  const RelaxConfig& config) {
  config.validate();
  if (kernels.size() != 1 && kernels.size() != config.steps) {
    throw std::invalid_argument("kernel sequence length " + std::to_string(kernels.size()) +
                                " does not match steps " + std::to_string(config.steps));
  }
  for (const auto& k : kernels) require_same_grid(kernel_grid(k), x.grid(), "evolve");
  require_same_grid(x.grid(), b.grid(), "evolve");

  Trajectory traj;
  traj.states.reserve(config.steps + 1);
  traj.states.push_back(x);
  for (std::size_t t = 0; t < config.steps; ++t) {
    const auto& W = kernels.size() == 1 ? kernels[0] : kernels[t];
    auto next = advance(traj.states.back(), W, b, f, config.omega, config.norm_coupling,
                        config.norm_kind);
    if (!all_finite(next)) throw DivergenceError(t + 1);
    traj.states.emplace_back(x.grid(), std::move(next));
  }
  return traj;
}

AttractorResult find_attractor(const Field& x, const Kernel& W, const Field& b, Activation f,
                               double omega, double tol, std::size_t max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("attractor tolerance must be positive");
  check_omega(omega);
  require_same_grid(kernel_grid(W), x.grid(), "find_attractor");
  require_same_grid(x.grid(), b.grid(), "find_attractor");

  Field z = x;
  double residual = max_abs_residual(z, W, b, f);
  std::size_t it = 0;
  while (residual > tol && it < max_iters) {
    auto next = advance(z, W, b, f, omega, 0.0, NormKind::Integral);
    ++it;
    if (!all_finite(next)) throw DivergenceError(it);
    z = Field(x.grid(), std::move(next));
    residual = max_abs_residual(z, W, b, f);
    if (!std::isfinite(residual)) throw DivergenceError(it);
  }
  return AttractorResult{z, residual, it, residual <= tol};
}

std::vector<double> per_step_loss(const Trajectory& trajectory, const Field& target) {
  std::vector<double> out;
  out.reserve(trajectory.states.size());
  for (const auto& s : trajectory.states) out.push_back(loss_distance(s, target));
  return out;
}

}  // namespace npde
