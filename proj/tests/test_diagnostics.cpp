#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "fmkdv/diagnostics.hpp"

using namespace fmkdv;

namespace {

constexpr double kPi = std::numbers::pi;

FieldState gaussian_state(const GridSpec& g, double t, double width = 1.0) {
  const RealField u0 = sample(g, [&](double x) { return 0.05 * std::exp(-x * x / (width * width)); });
  return FieldState::from_spectral(t, linear_propagate(to_spectral(u0), t));
}

}  // namespace

TEST_CASE("Hamiltonian and corrected energy of cos x") {
  const GridSpec g = make_grid(kPi, 64);
  const RealField c = sample(g, [](double x) { return std::cos(x); });
  CHECK(hamiltonian(c, 0.0) == doctest::Approx(kPi / 2).epsilon(1e-13));
  // (5/6) int cos^6 = (5/6)(5/8) pi
  CHECK(hamiltonian(c, 1.0) == doctest::Approx(kPi / 2 + 25.0 * kPi / 48.0).epsilon(1e-13));
  CHECK(corrected_energy(c, 1.0) == doctest::Approx(-2 * kPi).epsilon(1e-13));
}

TEST_CASE("functionals do not depend on the resolution") {
  auto energy = [](std::size_t n) {
    const GridSpec g = make_grid(12.0, n);
    const RealField u = sample(g, [](double x) { return std::exp(-x * x) * std::cos(2 * x); });
    return std::array<double, 3>{hamiltonian(u, 1.0), corrected_energy(u, 1.0), hs_norm(u, 2.0)};
  };
  const auto a = energy(256), b = energy(1024);
  for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("Sobolev norm of a single mode") {
  const GridSpec g = make_grid(kPi, 64);
  const RealField u = sample(g, [](double x) { return std::sin(3 * x); });
  CHECK(hs_norm(u, 0.0) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(hs_norm(u, 2.0) == doctest::Approx(10.0 * std::sqrt(kPi)).epsilon(1e-13));
}

TEST_CASE("J commutes with the linear flow") {
  const GridSpec g = make_grid(400.0, 8192);
  const double j0 = l2_norm(vector_field_J(gaussian_state(g, 0.0, 3.0)));
  for (double t : {0.5, 1.0, 2.0}) {
    const double j = l2_norm(vector_field_J(gaussian_state(g, t, 3.0)));
    CHECK(j == doctest::Approx(j0).epsilon(1e-9));
  }
  // at t = 0 it is multiplication by x
  const FieldState s = gaussian_state(g, 0.0);
  const RealField ju = vector_field_J(s);
  for (std::size_t n = 0; n < ju.size(); n += 97) CHECK(ju[n] == doctest::Approx(g.x(n) * s.u[n]).epsilon(1e-9));
}

TEST_CASE("Lambda reduces to J without nonlinearity") {
  const GridSpec g = make_grid(60.0, 2048);
  const FieldState s = gaussian_state(g, 1.5);
  const RealField a = lambda_u(s, 0.0, 0.0), b = vector_field_J(s);
  for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] == b[n]);
}

TEST_CASE("windowed norm") {
  const GridSpec g = make_grid(10.0, 512);
  const RealField one = sample(g, [](double) { return 1.0; });
  CHECK(l2_norm_within(one, kNoLimit) == doctest::Approx(std::sqrt(20.0)));
  CHECK(l2_norm_within(one, 2.5) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-2));

  SimConfig cfg;
  cfg.grid = make_grid(100.0, 1024);
  CHECK(weight_limit(cfg) == kNoLimit);
  cfg.sponge.enabled = true;
  CHECK(weight_limit(cfg) == doctest::Approx(90.0));
}

TEST_CASE("region masks") {
  const GridSpec g = make_grid(64.0, 4096);
  const RegionMask m = region_masks(g, 32.0);
  CHECK(m.threshold == doctest::Approx(std::pow(32.0, 0.24)).epsilon(1e-12));
  CHECK(m.threshold == doctest::Approx(2.2974).epsilon(1e-4));
  for (std::size_t n = 0; n < g.n_points; ++n) {
    const double x = g.x(n);
    if (std::abs(x) <= m.threshold)
      CHECK(m.region[n] == Region::selfsimilar);
    else
      CHECK(m.region[n] == (x > 0 ? Region::decaying : Region::oscillatory));
  }
  CHECK(m.count(Region::selfsimilar) + m.count(Region::decaying) + m.count(Region::oscillatory) == g.n_points);
}

TEST_CASE("boundary mass") {
  const GridSpec g = make_grid(30.0, 1024);
  CHECK(boundary_mass(sample(g, [](double x) { return std::exp(-x * x); })) < 1e-20);
  // |x| >= 0.95 L
  const double flat = boundary_mass(sample(g, [](double) { return 1.0; }));
  CHECK(flat == doctest::Approx(0.05).epsilon(1e-2));
}

TEST_CASE("exponent fit") {
  std::vector<double> t, v;
  for (double s = 10.0; s <= 100.0; s *= 1.3) {
    t.push_back(s);
    v.push_back(3.0 * std::pow(s, -0.2));
  }
  const ExponentFit f = fit_exponent(t, v);
  CHECK(f.slope == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  const std::vector<double> few{1.0, 2.0, 3.0};
  CHECK_THROWS(fit_exponent(few, few));
  v[2] = -1.0;
  CHECK_THROWS(fit_exponent(t, v));
}

TEST_CASE("linear dispersive decay") {
  const GridSpec g = make_grid(2048.0, 1u << 16);
  std::vector<double> ts, sups, c0, xt;
  for (double t : {25.0, 40.0, 63.0, 100.0}) {
    const DiagnosticRecord r = diagnose(gaussian_state(g, t, 3.0), 0.0, 0.0);
    ts.push_back(t);
    sups.push_back(r.sup);
    c0.push_back(r.decay_constants[0]);
    xt.push_back(r.xtilde);
    CHECK(r.boundary_ok);
    CHECK(r.decay_constants[0] >= std::pow(t, 0.2) * r.sup);
  }
  CHECK(fit_exponent(ts, sups).slope == doctest::Approx(-0.2).epsilon(0.1));
  for (double c : c0) CHECK(c == doctest::Approx(c0.back()).epsilon(0.2));
  CHECK(fit_exponent(ts, xt).slope <= 0.13);
}
