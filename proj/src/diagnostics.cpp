#include "fmkdv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fmkdv {

namespace {

double sup_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.samples) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double hamiltonian(const RealField& u, double beta) {
  const RealField uxx = derivative(u, 2);
  double s = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double u2 = u[n] * u[n];
    s += 0.5 * uxx[n] * uxx[n] + (5.0 / 6.0) * beta * u2 * u2 * u2;
  }
  return s * u.grid.dx();
}

double corrected_energy(const RealField& u, double alpha) {
  const RealField ux = derivative(u, 1);
  const RealField uxx = derivative(u, 2);
  double a = 0.0, b = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    a += uxx[n] * uxx[n];
    b += u[n] * u[n] * ux[n] * ux[n];
  }
  return (a - 12.0 * alpha * b) * u.grid.dx();
}

double hs_norm(const RealField& u, double s) {
  const SpectralField f = multiplier(to_spectral(u), [s](double xi) { return cplx(std::pow(1.0 + xi * xi, 0.5 * s)); });
  return l2_norm(f);
}

RealField vector_field_J(const FieldState& state) {
  const RealField d4 = to_physical(derivative(state.spectrum, 4));
  RealField out(state.u.grid);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = state.u.grid.x(n) * state.u[n] + state.t * d4[n];
  return out;
}

RealField lambda_u(const FieldState& state, double alpha, double beta) {
  RealField out = vector_field_J(state);
  if (alpha == 0.0 && beta == 0.0) return out;
  try {
    const RealField nl = nonlinearity(state.u, alpha, beta, state.u.grid.n_points / 2);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += 5.0 * state.t * nl[n];
  } catch (const BlowUp&) {
    // state is about to blow up; report it as unbounded
    for (auto& x : out.samples) x = std::numeric_limits<double>::infinity();
  }
  return out;
}

double weight_limit(const SimConfig& cfg) {
  const double L = cfg.grid.half_length;
  return cfg.sponge.enabled ? (1.0 - cfg.sponge.fraction) * L : kNoLimit;
}

double l2_norm_within(const RealField& f, double limit) {
  double s = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n)
    if (std::abs(f.grid.x(n)) <= limit) s += f[n] * f[n];
  return std::sqrt(s * f.grid.dx());
}

double xtilde_norm(const FieldState& state, double limit) {
  const double t = state.t;
  const double t25 = std::pow(t, 0.4);
  const SpectralField low = multiplier(state.spectrum, [t25](double xi) { return cplx(1.0 / std::sqrt(1.0 + t25 * xi * xi)); });
  return l2_norm_within(vector_field_J(state), limit) + std::pow(t, 0.2) * l2_norm(low);
}

double xs_norm(const FieldState& state, double alpha, double beta, double limit) {
  return hs_norm(state.u, 2.0) + l2_norm_within(lambda_u(state, alpha, beta), limit);
}

double decay_constant(const FieldState& state, int k) {
  if (k < 0 || k > 3) throw std::out_of_range("decay_constant: k must lie in 0..3");
  const double t = state.t;
  const RealField d = to_physical(derivative(state.spectrum, k));
  const double p = -static_cast<double>(k) / 4.0 + 3.0 / 8.0;
  const double s = std::pow(t, -0.2);
  double m = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    const double z = s * d.grid.x(n);
    m = std::max(m, std::pow(1.0 + z * z, 0.5 * p) * std::abs(d[n]));
  }
  return std::pow(t, (k + 1) / 5.0) * m;
}

double boundary_mass(const RealField& u) {
  const double edge = 0.95 * u.grid.half_length;
  double total = 0.0, outer = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double w = u[n] * u[n];
    total += w;
    if (std::abs(u.grid.x(n)) >= edge) outer += w;
  }
  return total > 0.0 ? outer / total : 0.0;
}

std::size_t RegionMask::count(Region r) const { return static_cast<std::size_t>(std::count(region.begin(), region.end(), r)); }

RegionMask region_masks(const GridSpec& grid, double t, double eps_reg) {
  if (!(t >= 1.0)) throw std::invalid_argument("region_masks: t must be >= 1");
  if (!(eps_reg > 0.0 && eps_reg < 0.1)) throw std::invalid_argument("region_masks: eps_reg must lie in (0, 1/10)");
  RegionMask m;
  m.t = t;
  m.eps_reg = eps_reg;
  m.threshold = std::pow(t, 0.2 + 0.8 * (0.1 - eps_reg));
  m.region.resize(grid.n_points);
  for (std::size_t n = 0; n < grid.n_points; ++n) {
    const double x = grid.x(n);
    if (std::abs(x) <= m.threshold)
      m.region[n] = Region::selfsimilar;
    else
      m.region[n] = x > 0 ? Region::decaying : Region::oscillatory;
  }
  return m;
}

ExponentFit fit_exponent(std::span<const double> t, std::span<const double> value) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_exponent: series lengths differ");
  if (t.size() < 4) throw std::invalid_argument("fit_exponent: need at least 4 samples");
  const std::size_t n = t.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 0.0) || !(value[i] > 0.0)) throw std::domain_error("fit_exponent: nonpositive sample");
    lx[i] = std::log(t[i]);
    ly[i] = std::log(value[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::domain_error("fit_exponent: all times equal");
  ExponentFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    r += e * e;
  }
  f.residual = std::sqrt(r / static_cast<double>(n));
  return f;
}

DiagnosticRecord diagnose(const FieldState& state, double alpha, double beta, double limit) {
  DiagnosticRecord r;
  r.t = state.t;
  r.l2 = l2_norm(state.u);
  for (int s = 1; s <= 2; ++s) r.hs[s] = hs_norm(state.u, s);
  r.hamiltonian = hamiltonian(state.u, beta);
  r.corrected_energy = corrected_energy(state.u, alpha);
  r.boundary_mass = boundary_mass(state.u);
  r.boundary_ok = r.boundary_mass < kBoundaryMassThreshold;
  r.j_norm = l2_norm_within(vector_field_J(state), limit);
  r.lambda_norm = l2_norm_within(lambda_u(state, alpha, beta), limit);
  r.xs_norm = r.hs[2] + r.lambda_norm;
  r.sup = sup_abs(state.u);
  if (state.t >= 1.0) {
    r.xtilde = xtilde_norm(state, limit);
    for (int k = 0; k < 4; ++k) r.decay_constants[static_cast<std::size_t>(k)] = decay_constant(state, k);
  }
  return r;
}

}  // namespace fmkdv
