#include "npde/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace npde {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Per-step stencil coefficients for step t.
StencilWeights weights_at(const ADRParams& p, std::size_t t, std::size_t i, double delta) {
  std::size_t idx = 0;
  switch (p.mode) {
    case ParamMode::Homogeneous: idx = 0; break;
    case ParamMode::Heterogeneous: idx = i; break;
    case ParamMode::OnTheFly: idx = t * p.nodes + i; break;
  }
  return adr_weights(p.U[idx], p.D[idx], p.R[idx], delta);
}

std::size_t slot(const ADRParams& p, std::size_t t, std::size_t i) {
  switch (p.mode) {
    case ParamMode::Homogeneous: return 0;
    case ParamMode::Heterogeneous: return i;
    case ParamMode::OnTheFly: return t * p.nodes + i;
  }
  return 0;
}

TridiagonalKernel kernel_at(const ADRParams& p, const Grid1D& grid, std::size_t t) {
  const auto n = grid.size();
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = weights_at(p, t, i, grid.delta());
    a[i] = w.sub;
    b[i] = w.sup;
    c[i] = w.diag;
  }
  return TridiagonalKernel(grid, std::move(a), std::move(c), std::move(b));
}

// Forward record: states z_0..z_T and pre-activations Z_0..Z_{T-1} (zero bias).
struct Tape {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> pre;
  std::vector<TridiagonalKernel> kernels;
};

void forward_step(Tape& tape, const TrainConfig& cfg) {
  const auto t = tape.pre.size();
  const auto& zt = tape.z[t];
  const auto& K = tape.kernels[tape.kernels.size() == 1 ? 0 : t];
  auto Z = K.apply(zt);
  std::vector<double> next(zt.size());
  for (std::size_t i = 0; i < zt.size(); ++i) {
    next[i] = relax_blend(zt[i], activate(cfg.activation, Z[i]), cfg.omega);
  }
  if (cfg.norm_coupling != 0.0) {
    double ss = 0.0;
    for (double v : zt) ss += v * v;
    if (cfg.norm_kind == NormKind::Integral) ss *= K.grid.delta();
    const double damping = cfg.omega * cfg.norm_coupling * (1.0 - std::sqrt(ss));
    for (std::size_t i = 0; i < zt.size(); ++i) next[i] += damping * zt[i];
  }
  if (!all_finite(next)) throw DivergenceError(t + 1);
  tape.pre.push_back(std::move(Z));
  tape.z.push_back(std::move(next));
}

Tape make_tape(const ADRParams& p, const Field& x, std::size_t steps) {
  Tape tape;
  tape.z.emplace_back(x.values().begin(), x.values().end());
  if (p.mode == ParamMode::OnTheFly) {
    for (std::size_t t = 0; t < steps; ++t) tape.kernels.push_back(kernel_at(p, x.grid(), t));
  } else {
    tape.kernels.push_back(kernel_at(p, x.grid(), 0));
  }
  return tape;
}

Tape run_forward(const ADRParams& p, const Field& x, const TrainConfig& cfg, std::size_t upto) {
  auto tape = make_tape(p, x, cfg.steps);
  for (std::size_t t = 0; t < upto; ++t) forward_step(tape, cfg);
  return tape;
}

double distance(const std::vector<double>& z, const Field& target) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - target[i];
    s += d * d;
  }
  return s;
}

// Backpropagates the adjoint lambda = dLoss/dz_{t+1} through step t, adding the
// coefficient gradient into grad and returning dLoss/dz_t.
std::vector<double> backward_step(const Tape& tape, std::size_t t, const std::vector<double>& lambda,
                                  const ADRParams& p, const TrainConfig& cfg,
                                  std::vector<double>& grad) {
  const auto& K = tape.kernels[tape.kernels.size() == 1 ? 0 : t];
  const auto& g = K.grid;
  const auto& zt = tape.z[t];
  const auto& Z = tape.pre[t];
  const auto n = zt.size();
  const auto per = p.per_array();
  const double delta = g.delta();

  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = cfg.omega * activate_derivative(cfg.activation, Z[i]) * lambda[i];

  for (std::size_t i = 0; i < n; ++i) {
    const auto l = g.left(i);
    const auto r = g.right(i);
    const double gA = l == Grid1D::none ? 0.0 : s[i] * zt[l];
    const double gB = r == Grid1D::none ? 0.0 : s[i] * zt[r];
    const double gC = s[i] * zt[i];
    const auto k = slot(p, t, i);
    grad[k] += (gB - gA) / (2.0 * delta);
    grad[per + k] += (gA + gB - 2.0 * gC) / (delta * delta);
    grad[2 * per + k] += gC;
  }

  auto prev = K.apply_transpose(s);
  for (std::size_t i = 0; i < n; ++i) prev[i] += (1.0 - cfg.omega) * lambda[i];

  if (cfg.norm_coupling != 0.0) {
    const double w = cfg.norm_kind == NormKind::Integral ? delta : 1.0;
    double ss = 0.0, lz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ss += zt[i] * zt[i];
      lz += lambda[i] * zt[i];
    }
    const double nu = std::sqrt(ss * w);
    const double c = cfg.omega * cfg.norm_coupling * (1.0 - nu);
    const double radial = nu > 0.0 ? -cfg.omega * cfg.norm_coupling * w * lz / nu : 0.0;
    for (std::size_t i = 0; i < n; ++i) prev[i] += c * lambda[i] + radial * zt[i];
  }
  return prev;
}

std::vector<double> chain_rule_gradient(const ADRParams& p, const Field& x, const Field& target,
                                        const TrainConfig& cfg) {
  auto tape = run_forward(p, x, cfg, cfg.steps);
  std::vector<double> grad(p.count(), 0.0);
  const auto n = x.size();

  if (p.mode == ParamMode::OnTheFly) {
    // Each layer only sees the loss at its own output.
    for (std::size_t t = 0; t < cfg.steps; ++t) {
      std::vector<double> lambda(n);
      for (std::size_t i = 0; i < n; ++i) lambda[i] = 2.0 * (tape.z[t + 1][i] - target[i]);
      backward_step(tape, t, lambda, p, cfg, grad);
    }
    return grad;
  }

  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = 2.0 * (tape.z.back()[i] - target[i]);
  for (std::size_t t = cfg.steps; t-- > 0;) lambda = backward_step(tape, t, lambda, p, cfg, grad);
  return grad;
}

// Objective seen by parameter component `flat_index` (terminal loss, or the
// running loss at the owning layer's output in OnTheFly mode).
std::size_t objective_step(const ADRParams& p, std::size_t flat_index, const TrainConfig& cfg) {
  if (p.mode != ParamMode::OnTheFly) return cfg.steps;
  return (flat_index % p.per_array()) / p.nodes + 1;
}

std::vector<double> finite_difference_gradient(const ADRParams& p, const Field& x,
                                               const Field& target, const TrainConfig& cfg) {
  const auto flat = p.flatten();
  std::vector<double> grad(flat.size());
  ADRParams probe = p;
  for (std::size_t c = 0; c < flat.size(); ++c) {
    const auto t = objective_step(p, c, cfg);
    auto shifted = flat;
    shifted[c] = flat[c] + cfg.fd_step;
    probe.assign(shifted);
    const double up = running_loss(probe, x, target, cfg, t);
    shifted[c] = flat[c] - cfg.fd_step;
    probe.assign(shifted);
    const double down = running_loss(probe, x, target, cfg, t);
    grad[c] = (up - down) / (2.0 * cfg.fd_step);
  }
  return grad;
}

void check_shapes(const ADRParams& p, const Field& x, const Field& target, const TrainConfig& cfg) {
  cfg.validate();
  require_same_grid(x.grid(), target.grid(), "training");
  p.validate(x.size(), cfg.steps);
}

// Loss of a trial point; divergence counts as an infinitely bad step.
template <class F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::vector<double> descend(const std::vector<double>& flat, const std::vector<double>& g,
                            double lr) {
  std::vector<double> out(flat.size());
  for (std::size_t c = 0; c < flat.size(); ++c) out[c] = flat[c] - lr * g[c];
  return out;
}

TrainResult fit_global(const ADRParams& initial, const Field& x, const Field& target,
                       const TrainConfig& cfg) {
  TrainResult res{initial, {}, false, 0};
  double loss = terminal_loss(res.params, x, target, cfg);
  res.loss_history.push_back(loss);
  ADRParams trial = res.params;
  while (loss > cfg.tolerance && res.iterations < cfg.max_iters) {
    const auto g = gradient(res.params, x, target, cfg);
    if (!all_finite(g)) throw std::runtime_error("non-finite gradient at iteration " +
                                                 std::to_string(res.iterations + 1));
    const auto flat = res.params.flatten();
    double lr = cfg.lr;
    double trial_loss = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h <= cfg.max_halvings; ++h, lr *= 0.5) {
      trial.assign(descend(flat, g, lr));
      trial_loss = guarded([&] { return terminal_loss(trial, x, target, cfg); });
      if (trial_loss <= loss) break;
    }
    if (!(trial_loss <= loss)) break;  // no descent direction left at this resolution
    res.params = trial;
    loss = trial_loss;
    ++res.iterations;
    res.loss_history.push_back(loss);
  }
  res.converged = loss <= cfg.tolerance;
  return res;
}

TrainResult fit_on_the_fly(const ADRParams& initial, const Field& x, const Field& target,
                           const TrainConfig& cfg) {
  TrainResult res{initial, {}, false, 0};
  double loss = terminal_loss(res.params, x, target, cfg);
  res.loss_history.push_back(loss);
  const auto n = x.size();
  const auto per = res.params.per_array();

  while (loss > cfg.tolerance && res.iterations < cfg.max_iters) {
    bool moved = false;
    // One sweep in forward order; layer l is fitted against the loss at step l + 1.
    for (std::size_t l = 0; l < cfg.steps; ++l) {
      const auto g = [&] {
        if (cfg.gradient_mode == GradientMode::FiniteDifference) {
          return finite_difference_gradient(res.params, x, target, cfg);
        }
        auto tape = run_forward(res.params, x, cfg, l + 1);
        std::vector<double> grad(res.params.count(), 0.0);
        std::vector<double> lambda(n);
        for (std::size_t i = 0; i < n; ++i) lambda[i] = 2.0 * (tape.z[l + 1][i] - target[i]);
        backward_step(tape, l, lambda, res.params, cfg, grad);
        return grad;
      }();
      // Keep only the layer-l block.
      std::vector<double> local(g.size(), 0.0);
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < n; ++i) local[a * per + l * n + i] = g[a * per + l * n + i];
      }
      if (!all_finite(local)) throw std::runtime_error("non-finite gradient in layer " + std::to_string(l));

      const double here = running_loss(res.params, x, target, cfg, l + 1);
      const auto flat = res.params.flatten();
      ADRParams trial = res.params;
      double lr = cfg.lr;
      double trial_loss = std::numeric_limits<double>::infinity();
      for (std::size_t h = 0; h <= cfg.max_halvings; ++h, lr *= 0.5) {
        trial.assign(descend(flat, local, lr));
        trial_loss = guarded([&] { return running_loss(trial, x, target, cfg, l + 1); });
        if (trial_loss <= here) break;
      }
      if (trial_loss < here) {
        res.params = trial;
        moved = true;
      }
    }
    loss = guarded([&] { return terminal_loss(res.params, x, target, cfg); });
    if (!std::isfinite(loss)) throw DivergenceError(cfg.steps);
    ++res.iterations;
    res.loss_history.push_back(loss);
    if (!moved) break;
  }
  res.converged = loss <= cfg.tolerance;
  return res;
}

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw std::overflow_error("parameter count overflows");
  }
  return a * b;
}

}  // namespace

std::string_view to_string(ParamMode mode) {
  switch (mode) {
    case ParamMode::Homogeneous: return "homogeneous";
    case ParamMode::Heterogeneous: return "heterogeneous";
    case ParamMode::OnTheFly: return "on-the-fly";
  }
  return "homogeneous";
}

ParamMode parse_param_mode(std::string_view name) {
  for (auto m : {ParamMode::Homogeneous, ParamMode::Heterogeneous, ParamMode::OnTheFly}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown parameter mode '" + std::string(name) + "'");
}

ADRParams ADRParams::homogeneous(double U, double D, double R) {
  return ADRParams{ParamMode::Homogeneous, 1, 1, {U}, {D}, {R}};
}

ADRParams ADRParams::heterogeneous(std::vector<double> U, std::vector<double> D,
                                   std::vector<double> R) {
  const auto n = U.size();
  if (D.size() != n || R.size() != n) throw std::invalid_argument("U, D, R lengths differ");
  return ADRParams{ParamMode::Heterogeneous, n, 1, std::move(U), std::move(D), std::move(R)};
}

ADRParams ADRParams::on_the_fly(std::size_t nodes, std::size_t layers, std::vector<double> U,
                                std::vector<double> D, std::vector<double> R) {
  ADRParams p{ParamMode::OnTheFly, nodes, layers, std::move(U), std::move(D), std::move(R)};
  p.validate(nodes, layers);
  return p;
}

ADRParams ADRParams::zeros(ParamMode mode, std::size_t nodes, std::size_t layers) {
  std::size_t len = 1;
  if (mode == ParamMode::Heterogeneous) len = nodes;
  if (mode == ParamMode::OnTheFly) len = nodes * layers;
  return ADRParams{mode,
                   mode == ParamMode::Homogeneous ? 1 : nodes,
                   mode == ParamMode::OnTheFly ? layers : 1,
                   std::vector<double>(len, 0.0),
                   std::vector<double>(len, 0.0),
                   std::vector<double>(len, 0.0)};
}

void ADRParams::validate(std::size_t n, std::size_t steps) const {
  std::size_t expected = 1;
  if (mode == ParamMode::Heterogeneous) expected = n;
  if (mode == ParamMode::OnTheFly) {
    if (layers != steps) {
      throw std::invalid_argument("on-the-fly parameters cover " + std::to_string(layers) +
                                  " layers but the run has " + std::to_string(steps) + " steps");
    }
    expected = n * steps;
  }
  if (mode != ParamMode::Homogeneous && nodes != n) {
    throw std::invalid_argument("parameters built for " + std::to_string(nodes) +
                                " nodes, grid has " + std::to_string(n));
  }
  if (U.size() != expected || D.size() != expected || R.size() != expected) {
    throw std::invalid_argument("ADR parameter arrays must have length " + std::to_string(expected) +
                                " in " + std::string(to_string(mode)) + " mode");
  }
  for (const auto* a : {&U, &D, &R}) {
    if (!all_finite(*a)) throw std::invalid_argument("ADR parameters must be finite");
  }
}

std::vector<double> ADRParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  flat.insert(flat.end(), U.begin(), U.end());
  flat.insert(flat.end(), D.begin(), D.end());
  flat.insert(flat.end(), R.begin(), R.end());
  return flat;
}

void ADRParams::assign(const std::vector<double>& flat) {
  const auto per = per_array();
  if (flat.size() != 3 * per) throw std::invalid_argument("flat parameter vector has wrong length");
  std::copy_n(flat.begin(), per, U.begin());
  std::copy_n(flat.begin() + static_cast<long>(per), per, D.begin());
  std::copy_n(flat.begin() + static_cast<long>(2 * per), per, R.begin());
}

ADRParams embed_heterogeneous(const ADRParams& p, std::size_t nodes) {
  if (p.mode != ParamMode::Homogeneous) throw std::invalid_argument("expected homogeneous parameters");
  return ADRParams::heterogeneous(std::vector<double>(nodes, p.U[0]), std::vector<double>(nodes, p.D[0]),
                                  std::vector<double>(nodes, p.R[0]));
}

ADRParams embed_on_the_fly(const ADRParams& p, std::size_t nodes, std::size_t layers) {
  auto out = ADRParams::zeros(ParamMode::OnTheFly, nodes, layers);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto src = p.mode == ParamMode::Homogeneous ? 0 : p.mode == ParamMode::Heterogeneous ? i : l * nodes + i;
      out.U[l * nodes + i] = p.U[src];
      out.D[l * nodes + i] = p.D[src];
      out.R[l * nodes + i] = p.R[src];
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");
  relax().validate();
}

std::vector<Kernel> build_kernels(const ADRParams& params, const Grid1D& grid, std::size_t steps) {
  params.validate(grid.size(), steps);
  std::vector<Kernel> out;
  const auto count = params.mode == ParamMode::OnTheFly ? steps : 1;
  for (std::size_t t = 0; t < count; ++t) out.emplace_back(kernel_at(params, grid, t));
  return out;
}

double terminal_loss(const ADRParams& params, const Field& x, const Field& target,
                     const TrainConfig& config) {
  return running_loss(params, x, target, config, config.steps);
}

double running_loss(const ADRParams& params, const Field& x, const Field& target,
                    const TrainConfig& config, std::size_t t) {
  check_shapes(params, x, target, config);
  if (t > config.steps) {
    throw std::out_of_range("step " + std::to_string(t) + " is past the last step " +
                            std::to_string(config.steps));
  }
  const auto tape = run_forward(params, x, config, t);
  return distance(tape.z.back(), target);
}

std::vector<double> gradient(const ADRParams& params, const Field& x, const Field& target,
                             const TrainConfig& config) {
  check_shapes(params, x, target, config);
  if (config.gradient_mode == GradientMode::FiniteDifference) {
    return finite_difference_gradient(params, x, target, config);
  }
  return chain_rule_gradient(params, x, target, config);
}

TrainResult fit(const ADRParams& initial, const Field& x, const Field& target,
                const TrainConfig& config) {
  check_shapes(initial, x, target, config);
  if (initial.mode == ParamMode::OnTheFly) return fit_on_the_fly(initial, x, target, config);
  return fit_global(initial, x, target, config);
}

std::size_t parameter_count(ParamMode mode, std::size_t nodes, std::size_t layers,
                            std::size_t dimension) {
  if (nodes < 1 || layers < 1 || dimension < 1) {
    throw std::invalid_argument("parameter_count needs N, L, d >= 1");
  }
  // Reaction scalar, advection vector, symmetric diffusion tensor.
  const std::size_t per_node = 1 + dimension + checked_mul(dimension, dimension + 1) / 2;
  switch (mode) {
    case ParamMode::Homogeneous: return per_node;
    case ParamMode::Heterogeneous: return checked_mul(nodes, per_node);
    case ParamMode::OnTheFly: return checked_mul(layers, checked_mul(nodes, per_node));
  }
  return per_node;
}

}  // namespace npde
