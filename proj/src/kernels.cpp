#include "npde/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace npde {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " has a non-finite entry");
  }
}

double int_pow(double x, std::size_t k) {
  double p = 1.0;
  for (std::size_t i = 0; i < k; ++i) p *= x;
  return p;
}

constexpr std::size_t npos = Grid1D::none;

std::size_t left_of(const Grid1D& g, std::size_t i) { return g.left(i); }
std::size_t right_of(const Grid1D& g, std::size_t i) { return g.right(i); }

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

TridiagonalKernel::TridiagonalKernel(Grid1D g, std::vector<double> a, std::vector<double> c,
                                     std::vector<double> b)
    : grid(g), sub(std::move(a)), diag(std::move(c)), sup(std::move(b)) {
  const auto n = grid.size();
  if (sub.size() != n || diag.size() != n || sup.size() != n) {
    throw std::invalid_argument("tridiagonal kernel arrays must have length " + std::to_string(n));
  }
  require_finite(sub, "sub-diagonal");
  require_finite(diag, "diagonal");
  require_finite(sup, "super-diagonal");
}

std::vector<double> TridiagonalKernel::apply(std::span<const double> z) const {
  const auto n = grid.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = left_of(grid, i);
    const auto r = right_of(grid, i);
    const double zl = l == npos ? 0.0 : z[l];
    const double zr = r == npos ? 0.0 : z[r];
    out[i] = sub[i] * zl + diag[i] * z[i] + sup[i] * zr;
  }
  return out;
}

std::vector<double> TridiagonalKernel::apply_transpose(std::span<const double> s) const {
  const auto n = grid.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Row j+1 reaches j through its sub entry, row j-1 through its sup entry.
    const auto above = right_of(grid, j);
    const auto below = left_of(grid, j);
    double acc = diag[j] * s[j];
    if (above != npos) acc += sub[above] * s[above];
    if (below != npos) acc += sup[below] * s[below];
    out[j] = acc;
  }
  return out;
}

DenseKernel::DenseKernel(Grid1D g, Matrix m) : grid(g), matrix(std::move(m)) {
  if (matrix.rows != grid.size() || matrix.cols != grid.size()) {
    throw std::invalid_argument("dense kernel must be " + std::to_string(grid.size()) + "x" +
                                std::to_string(grid.size()));
  }
  require_finite(matrix.data, "dense kernel");
}

std::vector<double> DenseKernel::apply(std::span<const double> z) const {
  const auto n = grid.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const auto row = matrix.row(i);
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * z[j];
    out[i] = acc;
  }
  return out;
}

DenseKernel to_dense(const TridiagonalKernel& kernel) {
  const auto& g = kernel.grid;
  Matrix m(g.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    m(i, i) += kernel.diag[i];
    if (auto l = left_of(g, i); l != npos) m(i, l) += kernel.sub[i];
    if (auto r = right_of(g, i); r != npos) m(i, r) += kernel.sup[i];
  }
  return DenseKernel(g, std::move(m));
}

ContinuumKernel make_gaussian_kernel(double amplitude, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  if (!std::isfinite(amplitude)) throw std::invalid_argument("gaussian amplitude must be finite");
  return GaussianKernel{amplitude, sigma};
}

ContinuumKernel make_normalized_gaussian(double sigma) {
  return make_gaussian_kernel(1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi)), sigma);
}

ContinuumKernel make_power_law_kernel(double amplitude, double exponent, double cutoff) {
  if (!(exponent > 0.0)) throw std::invalid_argument("power-law exponent must be positive");
  if (!(cutoff > 0.0)) throw std::invalid_argument("power-law cutoff must be positive");
  if (!std::isfinite(amplitude)) throw std::invalid_argument("power-law amplitude must be finite");
  return PowerLawKernel{amplitude, exponent, cutoff};
}

double evaluate(const ContinuumKernel& kernel, double r) {
  struct Visitor {
    double r;
    double operator()(const GaussianKernel& g) const {
      return g.amplitude * std::exp(-r * r / (2.0 * g.sigma * g.sigma));
    }
    double operator()(const PowerLawKernel& p) const {
      const double a = std::max(std::abs(r), p.cutoff);
      return p.amplitude * std::pow(a, -p.exponent);
    }
  };
  return std::visit(Visitor{r}, kernel);
}

std::string_view to_string(MomentTag tag) {
  switch (tag) {
    case MomentTag::AmplitudeRescaling: return "amplitude-rescaling";
    case MomentTag::Propagation: return "propagation";
    case MomentTag::Diffusion: return "diffusion";
    case MomentTag::Dispersion: return "dispersion";
    case MomentTag::HyperDiffusion: return "hyper-diffusion";
    case MomentTag::AntiDiffusive: return "anti-diffusive";
  }
  return "propagation";
}

StencilWeights adr_weights(double U, double D, double R, double delta) {
  const double adv = U / (2.0 * delta);
  const double dif = D / (delta * delta);
  return {.sub = -adv + dif, .sup = adv + dif, .diag = 1.0 - 2.0 * dif + R};
}

TridiagonalKernel assemble_adr_stencil(double U, double D, double R, const Grid1D& grid) {
  const auto w = adr_weights(U, D, R, grid.delta());
  const auto n = grid.size();
  return TridiagonalKernel(grid, std::vector<double>(n, w.sub), std::vector<double>(n, w.diag),
                           std::vector<double>(n, w.sup));
}

TridiagonalKernel assemble_heterogeneous_adr(std::span<const double> U, std::span<const double> D,
                                             std::span<const double> R, const Grid1D& grid) {
  const auto n = grid.size();
  if (U.size() != n || D.size() != n || R.size() != n) {
    throw std::invalid_argument("ADR coefficient arrays must have length " + std::to_string(n));
  }
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = adr_weights(U[i], D[i], R[i], grid.delta());
    a[i] = w.sub;
    b[i] = w.sup;
    c[i] = w.diag;
  }
  return TridiagonalKernel(grid, std::move(a), std::move(c), std::move(b));
}

MomentProfile kernel_moments(const TridiagonalKernel& kernel, std::size_t max_order) {
  const auto& g = kernel.grid;
  const auto n = g.size();
  MomentProfile out{max_order, std::vector<std::vector<double>>(max_order + 1, std::vector<double>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    // Neighbours cut off by a ZeroPad edge carry no weight.
    const double a = left_of(g, i) == npos ? 0.0 : kernel.sub[i];
    const double b = right_of(g, i) == npos ? 0.0 : kernel.sup[i];
    const double c = kernel.diag[i];
    out.moments[0][i] = a + b + c;
    double dk = 1.0;
    for (std::size_t k = 1; k <= max_order; ++k) {
      dk *= g.delta();
      out.moments[k][i] = k % 2 == 1 ? dk * (b - a) : dk * (a + b);
    }
  }
  return out;
}

MomentProfile kernel_moments(const DenseKernel& kernel, std::size_t max_order) {
  const auto& g = kernel.grid;
  const auto n = g.size();
  MomentProfile out{max_order, std::vector<std::vector<double>>(max_order + 1, std::vector<double>(n, 0.0))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = kernel.matrix(i, j);
      if (w == 0.0) continue;
      const double r = g.delta() * static_cast<double>(g.offset(i, j));
      if (g.antipodal(i, j)) {
        // Half a period away: split the weight between +r and -r.
        for (std::size_t k = 0; k <= max_order; ++k) {
          out.moments[k][i] += k % 2 == 0 ? w * int_pow(r, k) : 0.0;
        }
        continue;
      }
      double rk = 1.0;
      for (std::size_t k = 0; k <= max_order; ++k) {
        out.moments[k][i] += w * rk;
        rk *= r;
      }
    }
  }
  return out;
}

MomentTag classify_moment(std::size_t order, double value) {
  if (order == 0) return MomentTag::AmplitudeRescaling;
  if (order == 3) return MomentTag::Dispersion;
  if (order % 2 == 1) return MomentTag::Propagation;
  // Even orders smooth when the sign alternates: positive at 2, negative at 4, ...
  const bool smoothing_sign_positive = (order / 2) % 2 == 1;
  const bool smoothing = smoothing_sign_positive ? value >= 0.0 : value <= 0.0;
  if (!smoothing) return MomentTag::AntiDiffusive;
  return order == 2 ? MomentTag::Diffusion : MomentTag::HyperDiffusion;
}

ExplainReport explain_kernel(const MomentProfile& profile) {
  if (profile.max_order < 2 || profile.moments.size() < 3) {
    throw std::invalid_argument("explain_kernel needs moments up to order 2");
  }
  const auto n = profile.nodes();
  ExplainReport rep;
  rep.R_hat.resize(n);
  rep.U_hat.resize(n);
  rep.D_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.R_hat[i] = profile.moments[0][i] - 1.0;
    rep.U_hat[i] = profile.moments[1][i];
    rep.D_hat[i] = profile.moments[2][i] / 2.0;
  }
  for (std::size_t k = 0; k <= profile.max_order; ++k) {
    OrderNote note{k, std::vector<MomentTag>(n)};
    for (std::size_t i = 0; i < n; ++i) note.tags[i] = classify_moment(k, profile.moments[k][i]);
    rep.notes.push_back(std::move(note));
  }
  return rep;
}

DenseKernel sample_continuum_kernel(const ContinuumKernel& kernel, const Grid1D& grid) {
  const auto n = grid.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = grid.delta() * static_cast<double>(grid.offset(i, j));
      m(i, j) = evaluate(kernel, r) * grid.delta();
    }
  }
  return DenseKernel(grid, std::move(m));
}

double sampled_moment(const ContinuumKernel& kernel, std::size_t order, double half_width,
                      std::size_t nodes) {
  if (!(half_width > 0.0)) throw std::invalid_argument("half-width must be positive");
  const Grid1D grid(nodes, 2.0 * half_width / static_cast<double>(nodes), -half_width,
                    Boundary::Periodic);
  // Centre node sits at q = 0 for even counts; any row works for a homogeneous kernel.
  const std::size_t centre = nodes / 2;
  double acc = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double r = grid.delta() * static_cast<double>(grid.offset(centre, j));
    const double w = evaluate(kernel, r) * grid.delta();
    if (grid.antipodal(centre, j)) {
      acc += order % 2 == 0 ? w * int_pow(r, order) : 0.0;
    } else {
      acc += w * int_pow(r, order);
    }
  }
  return acc;
}

std::vector<ScanPoint> moment_convergence_scan(const ContinuumKernel& kernel, std::size_t order,
                                               std::span<const double> half_widths,
                                               std::size_t nodes) {
  if (half_widths.empty()) throw std::invalid_argument("moment scan needs at least one domain size");
  for (std::size_t s = 1; s < half_widths.size(); ++s) {
    if (!(half_widths[s] > half_widths[s - 1])) {
      throw std::invalid_argument("moment scan domain sizes must be increasing");
    }
  }
  std::vector<ScanPoint> out;
  out.reserve(half_widths.size());
  for (double h : half_widths) {
    const double delta = 2.0 * h / static_cast<double>(nodes);
    out.push_back({h, delta, std::abs(sampled_moment(kernel, order, h, nodes))});
  }
  return out;
}

CapacityReport capacity_report(std::uint64_t width, std::uint64_t depth) {
  if (width < 1 || depth < 1) throw std::invalid_argument("capacity report needs N >= 1 and L >= 1");
  constexpr auto max = std::numeric_limits<std::uint64_t>::max();
  if (width > max / width || width * width > max / depth) {
    throw std::overflow_error("weight count N^2 L overflows 64 bits");
  }
  CapacityReport rep{width * width * depth,
                     static_cast<double>(depth) * std::log10(static_cast<double>(width)),
                     std::nullopt};
  std::uint64_t paths = 1;
  bool fits = true;
  for (std::uint64_t l = 0; l < depth && fits; ++l) {
    if (paths > max / width) {
      fits = false;
    } else {
      paths *= width;
    }
    if (width == 1) break;
  }
  if (fits) rep.paths = paths;
  return rep;
}

}  // namespace npde
