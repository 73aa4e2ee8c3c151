#include "fmkdv/bands.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmkdv {

double hyperbolic_cutoff(double t, double x, double band_center, double delta) {
  if (x >= 0.0) return 0.0;
  const double n4 = std::pow(band_center, 4);
  return cutoff_between(-x, t * n4 / 3.0, 3.0 * t * n4, delta);
}

HypEllSplit split(const FieldState& state, double delta) {
  const double floor_center = std::pow(state.t, -0.2);
  return split(state, dyadic_bands(state.u.grid, floor_center, delta));
}

HypEllSplit split(const FieldState& state, const std::vector<DyadicBand>& bands) {
  if (!(state.t >= 1.0)) throw std::invalid_argument("split: t must be >= 1");
  const GridSpec& g = state.u.grid;
  HypEllSplit s;
  s.t = state.t;
  s.delta = bands.empty() ? 1.0 : bands.front().delta;
  const double floor_center = std::pow(state.t, -0.2);
  const SpectralField plus = project_halfline(state.spectrum, HalfLine::positive);
  s.u_plus = to_physical_complex(plus);
  s.hyp = ComplexField(g);
  for (const DyadicBand& b : bands) {
    if (b.center < floor_center) continue;
    ComplexField part = to_physical_complex(project_dyadic(plus, b));
    for (std::size_t n = 0; n < g.n_points; ++n) {
      part[n] *= hyperbolic_cutoff(s.t, g.x(n), b.center, b.delta);
      s.hyp[n] += part[n];
    }
    s.bands.push_back(b);
    s.hyp_bands.push_back(std::move(part));
  }
  s.ell = s.u_plus;
  for (std::size_t n = 0; n < g.n_points; ++n) s.ell[n] -= s.hyp[n];
  return s;
}

namespace {

double japanese(double t, double x) {
  const double z = std::pow(t, -0.2) * x;
  return std::sqrt(1.0 + z * z);
}

// ||w(x) f||
double weighted_l2(const ComplexField& f, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) s += w[n] * w[n] * std::norm(f[n]);
  return std::sqrt(s * f.grid.dx());
}

}  // namespace

PointwiseRatios check_pointwise_bounds(const HypEllSplit& s, double xtilde, int k, double limit) {
  if (k < 0 || k > 3) throw std::out_of_range("check_pointwise_bounds: k must lie in 0..3");
  if (!(xtilde > 0.0)) {
    double m = 0.0;
    for (auto z : s.u_plus.samples) m = std::max(m, std::abs(z));
    if (m == 0.0) return {};
    throw std::domain_error("check_pointwise_bounds: xtilde must be positive");
  }
  const ComplexField dh = derivative(s.hyp, k);
  const ComplexField de = derivative(s.ell, k);
  const double t = s.t;
  const double wh = -(k - 1) / 4.0;
  const double we = -k / 4.0 + 7.0 / 8.0;
  double mh = 0.0, me = 0.0;
  for (std::size_t n = 0; n < dh.size(); ++n) {
    if (std::abs(dh.grid.x(n)) > limit) continue;
    const double j = japanese(t, dh.grid.x(n));
    mh = std::max(mh, std::pow(j, wh) * std::abs(dh[n]));
    me = std::max(me, std::pow(j, we) * std::abs(de[n]));
  }
  const double scale = std::pow(t, (k + 1) / 5.0) / (std::pow(t, -0.1) * xtilde);
  return {mh * scale, me * scale};
}

std::map<std::string, double> check_l2_bounds(const HypEllSplit& s, double xtilde, double limit) {
  std::map<std::string, double> out{{"hyp_weighted", 0.0}, {"hyp_J", 0.0}, {"ell_weighted", 0.0}};
  double m = 0.0;
  for (auto z : s.u_plus.samples) m = std::max(m, std::abs(z));
  if (m == 0.0) {
    for (int k = 0; k < 4; ++k)
      for (const char* name : {"hyp_weighted", "hyp_J", "ell_weighted"}) out[std::string(name) + "_k" + std::to_string(k)] = 0.0;
    return out;
  }
  if (!(xtilde > 0.0)) throw std::domain_error("check_l2_bounds: xtilde must be positive");

  const GridSpec& g = s.hyp.grid;
  const std::size_t n_pts = g.n_points;
  const double t = s.t;
  std::vector<double> ax(n_pts);
  for (std::size_t n = 0; n < n_pts; ++n) ax[n] = std::abs(g.x(n));

  std::vector<ComplexField> dh;
  for (int l = 0; l <= 4; ++l) dh.push_back(derivative(s.hyp, l));

  // negative powers of |x| only where the hyperbolic part lives
  auto power = [&](double p) {
    std::vector<double> w(n_pts, 0.0);
    for (std::size_t n = 0; n < n_pts; ++n)
      if (ax[n] > 0.0 && ax[n] <= limit) w[n] = std::pow(ax[n], p);
    return w;
  };

  for (int k = 0; k <= 3; ++k) {
    double term = 0.0;
    for (int l = 0; l <= k; ++l) {
      std::vector<double> w = power(-(5.0 * k + 1.0) / 4.0 + l);
      for (double& v : w) v *= std::pow(t, (k + 1) / 4.0);
      term += weighted_l2(dh[static_cast<std::size_t>(l)], w);
    }
    out["hyp_weighted_k" + std::to_string(k)] = term / xtilde;
    out["hyp_weighted"] += term / xtilde;
  }

  const double t14 = std::pow(t, 0.25);
  for (int k = 0; k <= 3; ++k) {
    ComplexField jf(g);
    const auto& d0 = dh[static_cast<std::size_t>(k)];
    const auto& d1 = dh[static_cast<std::size_t>(k + 1)];
    for (std::size_t n = 0; n < n_pts; ++n) jf[n] = std::pow(ax[n], 0.25) * d0[n] + cplx(0.0, t14) * d1[n];
    std::vector<double> w = power(-(k - 3.0) / 4.0);
    for (double& v : w) v *= std::pow(t, k / 4.0);
    const double term = weighted_l2(jf, w) / xtilde;
    out["hyp_J_k" + std::to_string(k)] = term;
    out["hyp_J"] += term;
  }

  for (int k = 0; k <= 3; ++k) {
    const ComplexField de = derivative(s.ell, k);
    std::vector<double> w(n_pts);
    for (std::size_t n = 0; n < n_pts; ++n)
      w[n] = ax[n] <= limit ? std::pow(t, (k + 1) / 5.0) * std::pow(japanese(t, g.x(n)), -k / 4.0 + 1.0) : 0.0;
    const double term = weighted_l2(de, w) / xtilde;
    out["ell_weighted_k" + std::to_string(k)] = term;
    out["ell_weighted"] += term;
  }
  return out;
}

}  // namespace fmkdv
