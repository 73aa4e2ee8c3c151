#pragma once

// Self-similar variables U(t, y) = t^{1/5} u(t, t^{1/5} y), the flow-limit profile Q,
// the residual of
//
//   Q'''' + y Q + 5 alpha (2 Q^2 Q'' + 3 Q Q'^2) + 5 beta Q^5 = 0,
//
// and the linear profile Q0(y) = (1/pi) int_0^inf cos(y xi + xi^5/5) d xi.

#include <optional>
#include <span>
#include <vector>

#include "fmkdv/evolve.hpp"

namespace fmkdv {

struct Profile {
  std::vector<double> y;       // uniform, ascending
  std::vector<double> values;
  std::optional<double> t_source;  // nullopt for the oracle
  double residual_norm = 0.0;
  std::vector<long double> precise;  // extended-precision values (oracle only)

  double dy() const { return y.size() > 1 ? y[1] - y[0] : 0.0; }
  double sup() const;
};

// n equispaced points on [-ymax, ymax].
std::vector<double> uniform_grid(double ymax, std::size_t n);

// Spectral interpolation of u at x = t^{1/5} y. Throws std::out_of_range if the
// rescaled window leaves the domain.
Profile rescale(const FieldState& state, std::span<const double> y);

struct ProfileExtraction {
  Profile Q;                         // U at the latest snapshot
  std::vector<double> times;         // earlier snapshot times
  std::vector<double> certificates;  // ||U(t_i) - Q||_inf
  bool converging = true;            // certificates decrease towards the latest time
};

// snapshots: >= 3, any order; the latest one defines Q.
ProfileExtraction extract_Q(std::span<const FieldState> snapshots, std::span<const double> y);

// Pointwise residual via 8th-order (or better) centered differences; NaN where the
// stencil does not fit.
std::vector<double> ode_residual_field(const Profile& q, double alpha, double beta);
// L2 norm of the residual over the inner 80% of the y range; needs >= 64 points.
double ode_residual_Q(const Profile& q, double alpha, double beta);

long double q0_extended(long double y);
double q0(double y);

// Oracle samples of Q0; |y| <= y_max required.
Profile linear_profile_Q0(std::span<const double> y, double y_max = 10.0);

// Closed form Q0(0) = 5^{1/5} Gamma(6/5) cos(pi/10) / pi.
double q0_at_origin();

}  // namespace fmkdv
