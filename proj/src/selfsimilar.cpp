#include "fmkdv/selfsimilar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fmkdv/parallel.hpp"

namespace fmkdv {

double Profile::sup() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> uniform_grid(double ymax, std::size_t n) {
  if (!(ymax > 0.0) || n < 2) throw std::invalid_argument("uniform_grid: need ymax > 0 and n >= 2");
  std::vector<double> y(n);
  const double h = 2.0 * ymax / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = -ymax + h * static_cast<double>(i);
  return y;
}

Profile rescale(const FieldState& state, std::span<const double> y) {
  if (!(state.t > 0.0)) throw std::invalid_argument("rescale: t must be positive");
  const double s = std::pow(state.t, 0.2);
  std::vector<double> xs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    xs[i] = s * y[i];
    if (!(std::abs(xs[i]) < state.u.grid.half_length)) throw std::out_of_range("rescale: t^{1/5} y leaves the domain");
  }
  const std::vector<cplx> ux = interpolate(state.spectrum, xs);
  Profile p;
  p.y.assign(y.begin(), y.end());
  p.values.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) p.values[i] = s * ux[i].real();
  p.t_source = state.t;
  return p;
}

ProfileExtraction extract_Q(std::span<const FieldState> snapshots, std::span<const double> y) {
  if (snapshots.size() < 3) throw std::invalid_argument("extract_Q: need at least 3 snapshots");
  std::vector<const FieldState*> order;
  for (const auto& s : snapshots) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](auto a, auto b) { return a->t < b->t; });
  ProfileExtraction e;
  e.Q = rescale(*order.back(), y);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const Profile u = rescale(*order[i], y);
    double d = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) d = std::max(d, std::abs(u.values[j] - e.Q.values[j]));
    e.times.push_back(order[i]->t);
    e.certificates.push_back(d);
  }
  for (std::size_t i = 1; i < e.certificates.size(); ++i)
    if (e.certificates[i] > e.certificates[i - 1]) e.converging = false;
  return e;
}

namespace {

constexpr int kHalfStencil = 5;

// Fornberg's recursion: weights for derivatives 0..4 at offsets -r..r (unit spacing, centre 0).
std::array<std::array<long double, 2 * kHalfStencil + 1>, 5> stencil_weights() {
  constexpr int n = 2 * kHalfStencil + 1;
  constexpr int m = 4;
  long double x[n];
  for (int i = 0; i < n; ++i) x[i] = i - kHalfStencil;
  long double c[n][m + 1] = {};
  long double c1 = 1.0L, c4 = x[0];
  c[0][0] = 1.0L;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    long double c2 = 1.0L;
    const long double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const long double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<std::array<long double, n>, m + 1> w{};
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = c[j][k];
  return w;
}

}  // namespace

std::vector<double> ode_residual_field(const Profile& q, double alpha, double beta) {
  const std::size_t n = q.y.size();
  if (n < 64) throw std::invalid_argument("ode_residual_Q: need at least 64 samples");
  static const auto w = stencil_weights();
  const long double h = static_cast<long double>(q.y.back() - q.y.front()) / static_cast<long double>(n - 1);
  auto val = [&](std::size_t i) -> long double {
    return q.precise.size() == n ? q.precise[i] : static_cast<long double>(q.values[i]);
  };
  std::vector<double> r(n, std::numeric_limits<double>::quiet_NaN());
  const std::size_t r0 = kHalfStencil;
  for (std::size_t i = r0; i + r0 < n; ++i) {
    long double d[5] = {};
    for (int k = 1; k <= 4; ++k) {
      long double s = 0.0L;
      for (int j = 0; j < 2 * kHalfStencil + 1; ++j) s += w[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] * val(i + static_cast<std::size_t>(j) - r0);
      d[k] = s / std::pow(h, static_cast<long double>(k));
    }
    const long double u = val(i);
    const long double y = static_cast<long double>(q.y[i]);
    const long double res = d[4] + y * u + 5.0L * alpha * (2.0L * u * u * d[2] + 3.0L * u * d[1] * d[1]) +
                            5.0L * beta * u * u * u * u * u;
    r[i] = static_cast<double>(res);
  }
  return r;
}

double ode_residual_Q(const Profile& q, double alpha, double beta) {
  const std::vector<double> r = ode_residual_field(q, alpha, beta);
  const double lo = q.y.front(), hi = q.y.back();
  const double mid = 0.5 * (lo + hi), half = 0.4 * (hi - lo);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(q.y[i] - mid) > half) continue;
    if (std::isnan(r[i])) throw std::invalid_argument("ode_residual_Q: grid too coarse for the stencil");
    s += r[i] * r[i];
  }
  return std::sqrt(s * q.dy());
}

// --- Q0 oracle -----------------------------------------------------------------

namespace {

using ld = long double;
using cld = std::complex<long double>;

constexpr int kGauss = 20;

struct GaussRule {
  std::array<ld, kGauss> node{};
  std::array<ld, kGauss> weight{};
};

const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    GaussRule g;
    const ld pi = std::numbers::pi_v<ld>;
    for (int i = 0; i < kGauss; ++i) {
      ld z = std::cos(pi * (i + 0.75L) / (kGauss + 0.5L));
      ld dp = 0.0L;
      for (int it = 0; it < 100; ++it) {
        ld p0 = 1.0L, p1 = z;
        for (int k = 2; k <= kGauss; ++k) {
          const ld p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kGauss * (z * p1 - p0) / (z * z - 1.0L);
        const ld dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-19L) break;
      }
      g.node[static_cast<std::size_t>(i)] = z;
      g.weight[static_cast<std::size_t>(i)] = 2.0L / ((1.0L - z * z) * dp * dp);
    }
    return g;
  }();
  return rule;
}

// Panel length keeping the phase change per panel near one radian.
template <class T>
ld panel_length(T xi, ld y) {
  const ld a = std::abs(static_cast<cld>(y) + static_cast<cld>(xi) * static_cast<cld>(xi) * static_cast<cld>(xi) * static_cast<cld>(xi));
  const ld b = std::abs(static_cast<cld>(xi));
  const ld scale = a + std::sqrt(4.0L * b * b * b) + std::cbrt(12.0L * b * b) + 1.0L;
  return std::min(0.25L, 1.0L / scale);
}

}  // namespace

long double q0_extended(long double y) {
  if (!std::isfinite(y)) throw std::domain_error("q0: y must be finite");
  const GaussRule& g = gauss_rule();
  const ld cap = std::max(2.0L, std::pow(2.0L * std::abs(y), 0.25L));
  auto phase = [y](cld z) { return y * z + z * z * z * z * z / 5.0L; };

  // real segment [0, cap]
  cld total = 0.0L;
  ld a = 0.0L;
  while (a < cap) {
    const ld h = std::min(panel_length(a, y), cap - a);
    cld s = 0.0L;
    for (int i = 0; i < kGauss; ++i) {
      const ld xi = a + 0.5L * h * (g.node[static_cast<std::size_t>(i)] + 1.0L);
      s += g.weight[static_cast<std::size_t>(i)] * std::exp(cld(0.0L, 1.0L) * phase(cld(xi, 0.0L)));
    }
    total += 0.5L * h * s;
    a += h;
  }

  // tail along cap + r e^{i pi/10}: the imaginary part of the phase grows monotonically
  const cld dir = std::polar(1.0L, std::numbers::pi_v<ld> / 10.0L);
  ld r = 0.0L;
  for (int panels = 0;; ++panels) {
    if (panels > 1000000) throw std::runtime_error("q0: tail quadrature did not converge");
    const cld z0 = cap + r * dir;
    const ld h = panel_length(z0, y);
    cld s = 0.0L;
    for (int i = 0; i < kGauss; ++i) {
      const cld z = cap + (r + 0.5L * h * (g.node[static_cast<std::size_t>(i)] + 1.0L)) * dir;
      s += g.weight[static_cast<std::size_t>(i)] * std::exp(cld(0.0L, 1.0L) * phase(z));
    }
    total += 0.5L * h * s * dir;
    r += h;
    if (std::exp(-std::imag(phase(cap + r * dir))) < 1e-24L) break;
  }
  return std::real(total) / std::numbers::pi_v<ld>;
}

double q0(double y) { return static_cast<double>(q0_extended(y)); }

double q0_at_origin() {
  return std::pow(5.0, 0.2) * std::tgamma(1.2) * std::cos(std::numbers::pi / 10.0) / std::numbers::pi;
}

Profile linear_profile_Q0(std::span<const double> y, double y_max) {
  for (double v : y)
    if (!(std::abs(v) <= y_max)) throw std::out_of_range("linear_profile_Q0: |y| exceeds y_max");
  Profile p;
  p.y.assign(y.begin(), y.end());
  p.values.resize(y.size());
  p.precise.resize(y.size());
  parallel_for(y.size(), [&](std::size_t i) {
    p.precise[i] = q0_extended(static_cast<long double>(y[i]));
    p.values[i] = static_cast<double>(p.precise[i]);
  });
  return p;
}

}  // namespace fmkdv
