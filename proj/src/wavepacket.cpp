#include "fmkdv/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fmkdv/diagnostics.hpp"
#include "fmkdv/parallel.hpp"

namespace fmkdv {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double z) {
  const double r = z / kChiSupport;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

// The bump is flat to all orders at +-s, so the uniform rule converges very fast.
double bump_integral() {
  constexpr int n = 200000;
  const double h = 2.0 * kChiSupport / n;
  double s = 0.0;
  for (int i = 1; i < n; ++i) s += bump(-kChiSupport + i * h);
  return s * h;
}

struct Support {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
};

Support packet_support(double t, double v, const GridSpec& grid) {
  if (!(t > 0.0)) throw std::invalid_argument("packet: t must be positive");
  if (!(v < 0.0)) throw std::invalid_argument("packet: v must be negative");
  const double centre = v * t;
  const double half = kChiSupport / packet_scale(t, v);
  const double lo = centre - half, hi = centre + half;
  if (lo < -grid.half_length) throw std::out_of_range("packet support leaves the domain");
  if (hi >= 0.0) throw std::out_of_range("packet support reaches x >= 0");
  const double dx = grid.dx();
  Support s;
  s.first = static_cast<std::size_t>(std::ceil((lo + grid.half_length) / dx));
  s.last = static_cast<std::size_t>(std::floor((hi + grid.half_length) / dx));
  s.last = std::min(s.last, grid.n_points - 1);
  return s;
}

cplx packet_value(double t, double v, double lambda, double x) {
  const double c = chi(lambda * (x - v * t));
  if (c == 0.0) return 0.0;
  return std::polar(c, phase_phi(t, x));
}

}  // namespace

double phase_phi(double t, double x) {
  if (!(t > 0.0)) throw std::invalid_argument("phase_phi: t must be positive");
  if (!(x < 0.0)) throw std::domain_error("phase_phi: x must be negative");
  return -0.8 * std::pow(t, -0.25) * std::pow(-x, 1.25) + kPi / 4.0;
}

double chi(double z) {
  static const double norm = 1.0 / bump_integral();
  return norm * bump(z);
}

double packet_frequency(double v) { return std::pow(std::abs(v), 0.25); }
double packet_scale(double t, double v) { return 1.0 / (std::sqrt(t) * std::pow(std::abs(v), 0.375)); }
double packet_resolution(double t, double v) { return std::pow(t, 0.8) * std::abs(v); }

ComplexField packet(double t, double v, const GridSpec& grid) {
  const Support s = packet_support(t, v, grid);
  const double lambda = packet_scale(t, v);
  ComplexField out(grid);
  for (std::size_t n = s.first; n <= s.last; ++n) out[n] = packet_value(t, v, lambda, grid.x(n));
  return out;
}

double packet_offband_fraction(double t, double v, const GridSpec& grid) {
  const SpectralField f = to_spectral(packet(t, v, grid));
  const double xv = packet_frequency(v);
  double total = 0.0, off = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double w = std::norm(f.coeffs[k]);
    const double xi = grid.wavenumber(k);
    total += w;
    if (xi < 0.5 * xv || xi > 2.0 * xv) off += w;
  }
  return total > 0.0 ? off / total : 0.0;
}

PacketSample gamma(const FieldState& state, double v) {
  const GridSpec& g = state.u.grid;
  const double t = state.t;
  const Support s = packet_support(t, v, g);
  const double lambda = packet_scale(t, v);
  cplx acc = 0.0;
  for (std::size_t n = s.first; n <= s.last; ++n) acc += state.u[n] * std::conj(packet_value(t, v, lambda, g.x(n)));
  PacketSample p;
  p.t = t;
  p.v = v;
  p.xi_v = packet_frequency(v);
  p.lambda = lambda;
  p.gamma = acc * g.dx();
  return p;
}

std::vector<PacketSample> gamma(const FieldState& state, std::span<const double> velocities) {
  std::vector<PacketSample> out(velocities.size());
  parallel_for(velocities.size(), [&](std::size_t i) { out[i] = gamma(state, velocities[i]); });
  return out;
}

std::vector<double> velocity_grid(double vmin, double vmax, std::size_t count) {
  if (!(vmin > 0.0 && vmax >= vmin)) throw std::invalid_argument("velocity_grid: need 0 < vmin <= vmax");
  if (count == 0) throw std::invalid_argument("velocity_grid: count must be positive");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = -vmin;
    return v;
  }
  const double r = std::log(vmax / vmin) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) v[i] = -vmin * std::exp(r * static_cast<double>(i));
  return v;
}

VelocityRange resolved_velocity_range(double t_first, double t_last, double window, double xi_cut,
                                      double resolution, double usable) {
  VelocityRange r;
  r.vmin = resolution * std::pow(t_first, -0.8);
  const double freq_cap = std::pow(0.5 * xi_cut, 4);
  auto reach = [&](double a) { return a * t_last + kChiSupport / packet_scale(t_last, -a); };
  const double limit = usable * window;
  double lo = 0.0, hi = limit / t_last;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (reach(mid) <= limit ? lo : hi) = mid;
  }
  r.vmax = std::min(freq_cap, lo);
  return r;
}

std::vector<OdeResidualPoint> gamma_ode_residual(std::span<const PacketSample> samples, double alpha) {
  if (samples.size() < 3) throw std::invalid_argument("gamma_ode_residual: need at least 3 samples");
  std::vector<OdeResidualPoint> out;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    const auto& c = samples[i + 1];
    const double h1 = std::log(b.t / a.t);
    const double h2 = std::log(c.t / b.t);
    if (!(h1 > 0.0 && h2 > 0.0)) throw std::invalid_argument("gamma_ode_residual: times must increase");
    // three-point derivative in s = log t on a nonuniform grid
    const cplx ds = -h2 / (h1 * (h1 + h2)) * a.gamma + (h2 - h1) / (h1 * h2) * b.gamma + h1 / (h2 * (h1 + h2)) * c.gamma;
    const cplx res = ds + cplx(0.0, 3.0 * alpha * std::norm(b.gamma)) * b.gamma;
    out.push_back({b.t, b.v, std::pow(packet_resolution(b.t, b.v), 3.0 / 16.0) * std::abs(res)});
  }
  return out;
}

double ScatteringProfile::symmetry_defect() const {
  double worst = 0.0;
  std::size_t j = xi.size();
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] <= 0.0) continue;
    // mirror of xi[i], searched from the left half
    auto it = std::lower_bound(xi.begin(), xi.end(), -xi[i] - 1e-12 * xi[i]);
    if (it == xi.end() || std::abs(*it + xi[i]) > 1e-9 * xi[i]) continue;
    j = static_cast<std::size_t>(it - xi.begin());
    worst = std::max(worst, std::abs(W[j] - std::conj(W[i])));
  }
  return worst;
}

double ScatteringProfile::l2_norm() const {
  if (xi.size() < 2) return 0.0;
  double dmin = xi[1] - xi[0];
  for (std::size_t i = 1; i < xi.size(); ++i) dmin = std::min(dmin, xi[i] - xi[i - 1]);
  double s = 0.0;
  for (const cplx& w : W) s += std::norm(w);
  return std::sqrt(s * dmin);
}

WPoint extract_W_packet(const PacketSample& sample, double alpha) {
  const cplx w0 = 2.0 * sample.gamma;
  const double logarithm = std::log(sample.t * std::pow(std::abs(sample.v), 1.25));
  return {sample.xi_v, w0 * std::polar(1.0, 0.75 * alpha * std::norm(w0) * logarithm)};
}

ScatteringProfile packet_profile(std::span<const PacketSample> samples, double alpha) {
  ScatteringProfile p;
  p.source = ScatteringProfile::Source::packet;
  std::vector<WPoint> pts;
  for (const auto& s : samples) pts.push_back(extract_W_packet(s, alpha));
  std::sort(pts.begin(), pts.end(), [](const WPoint& a, const WPoint& b) { return a.xi < b.xi; });
  for (const auto& q : pts) {
    p.xi.push_back(q.xi);
    p.W.push_back(q.W);
  }
  if (!samples.empty()) p.t = samples.front().t;
  return p;
}

ScatteringProfile extract_W_spectrum_range(const FieldState& state, double alpha, double xi_min, double xi_max) {
  const GridSpec& g = state.u.grid;
  const double t = state.t;
  const std::vector<cplx> uhat = continuous_spectrum(state.spectrum);
  ScatteringProfile p;
  p.source = ScatteringProfile::Source::spectrum;
  p.t = t;
  const long half = static_cast<long>(g.n_points / 2);
  for (long j = -(half - 1); j <= half - 1; ++j) {
    const double xi = g.dk() * static_cast<double>(j);
    const double a = std::abs(xi);
    if (a < xi_min || a > xi_max) continue;
    const cplx u = uhat[g.slot(j)];
    double phase = -t * std::pow(xi, 5) / 5.0;
    if (j != 0) phase += (xi > 0 ? 1.0 : -1.0) * 0.75 * alpha * std::norm(u) * std::log(t * std::pow(a, 5));
    p.xi.push_back(xi);
    p.W.push_back(u * std::polar(1.0, phase));
  }
  return p;
}

ScatteringProfile extract_W_spectrum(const FieldState& state, double alpha, double xi_max, double eps_reg) {
  const double t = state.t;
  const double xi_min = std::pow(t, -0.2) * std::pow(t, 0.2 * (0.1 - eps_reg));
  return extract_W_spectrum_range(state, alpha, xi_min, xi_max);
}

WDiscrepancy cross_check_W(const ScatteringProfile& packets, const ScatteringProfile& spectrum) {
  const auto& xs = spectrum.xi;
  if (xs.size() < 2) throw std::invalid_argument("cross_check_W: spectrum profile too short");
  WDiscrepancy d;
  double sq = 0.0;
  const double t = spectrum.t;
  for (std::size_t i = 0; i < packets.xi.size(); ++i) {
    const double xi = packets.xi[i];
    if (xi <= 0.0 || xi < xs.front() || xi > xs.back()) continue;
    auto it = std::upper_bound(xs.begin(), xs.end(), xi);
    if (it == xs.end()) --it;
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (xi - xs[lo]) / (xs[hi] - xs[lo]);
    const cplx ws = (1.0 - w) * spectrum.W[lo] + w * spectrum.W[hi];
    const double diff = std::abs(std::abs(packets.W[i]) - std::abs(ws));
    d.sup_abs = std::max(d.sup_abs, diff);
    if (std::abs(ws) > 0.0) d.sup_rel = std::max(d.sup_rel, diff / std::abs(ws));
    sq += diff * diff;
    const double weight = std::pow(std::pow(t, 0.8) * std::pow(xi, 4), 3.0 / 16.0);
    d.weighted_sup = std::max(d.weighted_sup, weight * std::abs(packets.W[i] - ws));
    ++d.points;
  }
  if (d.points == 0) throw std::invalid_argument("cross_check_W: profiles do not overlap");
  d.l2_abs = std::sqrt(sq / static_cast<double>(d.points));
  return d;
}

PhysicalResidual physical_approx_check(const FieldState& state, double v, int k, bool interpolate_point) {
  if (k < 0 || k > 3) throw std::out_of_range("physical_approx_check: k must lie in 0..3");
  const PacketSample s = gamma(state, v);
  const GridSpec& g = state.u.grid;
  const SpectralField plus = derivative(project_halfline(state.spectrum, HalfLine::positive), k);
  const double x0 = v * state.t;
  cplx value;
  if (interpolate_point) {
    value = interpolate(plus, x0);
  } else {
    const auto n = static_cast<std::size_t>(std::lround((x0 + g.half_length) / g.dx())) % g.n_points;
    value = to_physical_complex(plus)[n];
  }
  const double amp = s.lambda * std::pow(std::abs(v), k / 4.0);
  cplx ik = 1.0;
  for (int p = 0; p < k; ++p) ik *= cplx(0.0, 1.0);
  const cplx model = ik * amp * std::polar(1.0, phase_phi(state.t, x0)) * s.gamma;
  PhysicalResidual r;
  r.raw = std::abs(value - model);
  r.reference = std::abs(s.gamma) * amp;
  r.weighted = r.raw * std::pow(state.t, (k + 1) / 5.0) * std::pow(packet_resolution(state.t, v), -k / 4.0 + 9.0 / 16.0);
  return r;
}

namespace {

bool unwrap(std::span<const cplx> z, std::vector<double>& out) {
  out.resize(z.size());
  bool ok = true;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == 0.0) ok = false;
    out[i] = std::arg(z[i]);
    if (i == 0) continue;
    double d = out[i] - out[i - 1];
    d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
    // jumps near pi cannot be attributed to either branch
    if (std::abs(d) > 0.5 * kPi) ok = false;
    out[i] = out[i - 1] + d;
  }
  return ok;
}

double slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

PhaseFit phase_law_fit(std::span<const PacketSample> samples, double alpha, std::span<const PacketSample> reference) {
  if (samples.size() < 6) throw std::invalid_argument("phase_law_fit: need at least 6 samples");
  if (samples.back().t < 10.0 * samples.front().t * (1.0 - 1e-9))
    throw std::invalid_argument("phase_law_fit: samples must span a decade in t");
  if (!reference.empty() && reference.size() != samples.size())
    throw std::invalid_argument("phase_law_fit: reference length differs");
  std::vector<double> logt, phase;
  std::vector<cplx> g;
  double mean = 0.0;
  for (const auto& s : samples) {
    logt.push_back(std::log(s.t));
    g.push_back(s.gamma);
    mean += std::abs(s.gamma);
  }
  mean /= static_cast<double>(samples.size());
  PhaseFit f;
  f.unwrap_ok = unwrap(g, phase);
  f.slope = slope(logt, phase);
  f.mean_modulus = mean;
  f.prediction = -3.0 * alpha * mean * mean;
  f.relative_error = f.prediction != 0.0 ? std::abs(f.slope - f.prediction) / std::abs(f.prediction) : 0.0;
  if (!reference.empty()) {
    std::vector<cplx> q;
    for (std::size_t i = 0; i < samples.size(); ++i) q.push_back(samples[i].gamma / reference[i].gamma);
    std::vector<double> rp;
    f.unwrap_ok = unwrap(q, rp) && f.unwrap_ok;
    f.referenced_slope = slope(logt, rp);
  }
  return f;
}

}  // namespace fmkdv
