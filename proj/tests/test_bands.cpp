#include <doctest.h>

#include <cmath>

#include "fmkdv/bands.hpp"

using namespace fmkdv;

namespace {

FieldState linear_state(const GridSpec& g, double t, double center = 0.0) {
  const RealField u0 = sample(g, [&](double x) { return 0.05 * std::exp(-(x - center) * (x - center)); });
  return FieldState::from_spectral(t, linear_propagate(to_spectral(u0), t));
}

double norm(const ComplexField& f) { return l2_norm(f); }

}  // namespace

TEST_CASE("hyperbolic cutoff support") {
  const double t = 10.0, c = 0.5, n4t = t * std::pow(c, 4);
  for (double x : {0.0, 1.0, 100.0}) CHECK(hyperbolic_cutoff(t, x, c, 1.0) == 0.0);
  CHECK(hyperbolic_cutoff(t, -n4t, c, 1.0) == 1.0);
  CHECK(hyperbolic_cutoff(t, -n4t / 3.0, c, 1.0) == 1.0);
  CHECK(hyperbolic_cutoff(t, -3.0 * n4t, c, 1.0) == 1.0);
  CHECK(hyperbolic_cutoff(t, -n4t / 6.0 * 0.99, c, 1.0) == 0.0);
  CHECK(hyperbolic_cutoff(t, -6.0 * n4t * 1.01, c, 1.0) == 0.0);
  const double mid = hyperbolic_cutoff(t, -4.0 * n4t, c, 1.0);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("split bookkeeping") {
  const GridSpec g = make_grid(256.0, 4096);
  const FieldState s = linear_state(g, 20.0);
  const HypEllSplit sp = split(s);
  REQUIRE(!sp.bands.empty());
  CHECK(sp.bands.front().center >= std::pow(20.0, -0.2));
  CHECK(sp.bands.front().center / 2 < std::pow(20.0, -0.2));
  ComplexField sum(g);
  for (const auto& part : sp.hyp_bands)
    for (std::size_t n = 0; n < g.n_points; ++n) {
      sum[n] += part[n];
      if (g.x(n) >= 0.0) CHECK(part[n] == cplx(0.0));
    }
  for (std::size_t n = 0; n < g.n_points; ++n) {
    CHECK(std::abs(sum[n] - sp.hyp[n]) < 1e-15);
    CHECK(std::abs(sp.hyp[n] + sp.ell[n] - sp.u_plus[n]) < 1e-15);
  }
  CHECK_THROWS(split(linear_state(g, 0.5)));
}

TEST_CASE("data to the right has no hyperbolic part") {
  const GridSpec g = make_grid(256.0, 4096);
  RealField u = sample(g, [](double x) { return 0.05 * std::exp(-(x - 60.0) * (x - 60.0)); });
  const HypEllSplit sp = split(FieldState::from_physical(1.0, u));
  CHECK(norm(sp.hyp) < 1e-3 * norm(sp.u_plus));
}

TEST_CASE("linear flow puts hyperbolic mass on the left") {
  const GridSpec g = make_grid(512.0, 8192);
  const double t = 50.0;
  const HypEllSplit sp = split(linear_state(g, t));
  const double edge = t * std::pow(sp.bands.front().center, 4) / 6.0;
  double hyp_far = 0.0, ell_far = 0.0, plus_far = 0.0;
  for (std::size_t n = 0; n < g.n_points; ++n) {
    if (g.x(n) > -edge) CHECK(sp.hyp[n] == cplx(0.0));
    if (g.x(n) < -10.0) {
      hyp_far += std::norm(sp.hyp[n]);
      ell_far += std::norm(sp.ell[n]);
      plus_far += std::norm(sp.u_plus[n]);
    }
  }
  CHECK(std::sqrt(hyp_far / plus_far) > 0.8);
  CHECK(norm(sp.hyp) > 0.2 * norm(sp.u_plus));
}

TEST_CASE("bound ratios") {
  const GridSpec g = make_grid(512.0, 8192);
  const double t = 20.0;
  const FieldState s = linear_state(g, t);
  const HypEllSplit sp = split(s);
  const double xt = xtilde_norm(s);

  SUBCASE("elliptic k = 0 term by hand") {
    const auto l2 = check_l2_bounds(sp, xt);
    double acc = 0.0;
    for (std::size_t n = 0; n < g.n_points; ++n) {
      const double z = std::pow(t, -0.2) * g.x(n);
      const double w = std::pow(t, 0.2) * std::sqrt(1.0 + z * z);
      acc += w * w * std::norm(sp.ell[n]);
    }
    CHECK(l2.at("ell_weighted_k0") == doctest::Approx(std::sqrt(acc * g.dx()) / xt).epsilon(1e-12));
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) sum += l2.at("hyp_J_k" + std::to_string(k));
    CHECK(l2.at("hyp_J") == doctest::Approx(sum));
    for (const auto& [name, value] : l2) CHECK(std::isfinite(value));
  }
  SUBCASE("pointwise") {
    for (int k = 0; k <= 3; ++k) {
      const PointwiseRatios r = check_pointwise_bounds(sp, xt, k);
      CHECK(std::isfinite(r.hyp));
      CHECK(r.ell > 0.0);
    }
    CHECK_THROWS(check_pointwise_bounds(sp, xt, 4));
    // restricting the window can only lower the maxima
    const PointwiseRatios full = check_pointwise_bounds(sp, xt, 1);
    const PointwiseRatios inner = check_pointwise_bounds(sp, xt, 1, 50.0);
    CHECK(inner.hyp <= full.hyp);
    CHECK(inner.ell <= full.ell);
  }
  SUBCASE("zero field") {
    const HypEllSplit z = split(FieldState::from_physical(t, RealField(g)));
    const PointwiseRatios r = check_pointwise_bounds(z, 0.0, 2);
    CHECK(r.hyp == 0.0);
    CHECK(r.ell == 0.0);
    CHECK(check_l2_bounds(z, 0.0).at("hyp_weighted") == 0.0);
  }
}
