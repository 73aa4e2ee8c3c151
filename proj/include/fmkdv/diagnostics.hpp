#pragma once

// Norms, conserved and almost-conserved quantities, vector-field functionals,
// region masks and log-log decay fits.

#include <array>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "fmkdv/evolve.hpp"
#include "fmkdv/spectral.hpp"

namespace fmkdv {

// x-weighted functionals are trusted only below this boundary-mass fraction.
inline constexpr double kBoundaryMassThreshold = 1e-6;

struct DiagnosticRecord {
  double t = 0.0;
  double l2 = 0.0;
  std::map<int, double> hs;  // order -> ||u||_{H^s}
  double hamiltonian = 0.0;
  double corrected_energy = 0.0;
  double xtilde = 0.0;
  double xs_norm = 0.0;  // ||u||_{H^2} + ||Lambda u||
  double lambda_norm = 0.0;
  double j_norm = 0.0;
  double sup = 0.0;
  double boundary_mass = 0.0;
  std::array<double, 4> decay_constants{};
  bool boundary_ok = true;
};

// int (1/2 u_xx^2 + (5/6) beta u^6) dx
double hamiltonian(const RealField& u, double beta);
// ||u_xx||^2 - 12 alpha int u^2 u_x^2 dx
double corrected_energy(const RealField& u, double alpha);

// Sobolev norm ||<xi>^s u_hat||.
double hs_norm(const RealField& u, double s);

// J u = x u + t u_xxxx with x the grid coordinate.
RealField vector_field_J(const FieldState& state);
// Lambda u = J u + 5 t N(u); the nonlinearity is evaluated on the full band.
RealField lambda_u(const FieldState& state, double alpha, double beta);

inline constexpr double kNoLimit = std::numeric_limits<double>::infinity();

// Half width of the window |x| <= limit on which x-weighted norms are taken: the
// grid minus the absorbing layers. J does not commute with the damping there.
double weight_limit(const SimConfig& cfg);

// L2 norm over |x| <= limit.
double l2_norm_within(const RealField& f, double limit);

// ||J u|| + t^{1/5} ||(1 + t^{2/5} xi^2)^{-1/2} u_hat||, the first term over |x| <= limit
double xtilde_norm(const FieldState& state, double limit = kNoLimit);
// ||u||_{H^2} + ||Lambda u||
double xs_norm(const FieldState& state, double alpha, double beta, double limit = kNoLimit);

// C_k(t) = t^{(k+1)/5} max_x <t^{-1/5} x>^{-k/4 + 3/8} |d_x^k u|, k = 0..3.
double decay_constant(const FieldState& state, int k);

// Fraction of ||u||^2 carried by the outer 5% of the domain on each side.
double boundary_mass(const RealField& u);

enum class Region { decaying, selfsimilar, oscillatory };

struct RegionMask {
  double t = 1.0;
  double eps_reg = 0.05;
  double threshold = 1.0;
  std::vector<Region> region;  // per grid point

  std::size_t count(Region r) const;
};

// |x| <= t^{1/5} t^{(4/5)(1/10 - eps_reg)} is self-similar; beyond, x > 0 decaying, x < 0 oscillatory.
RegionMask region_masks(const GridSpec& grid, double t, double eps_reg = 0.05);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of log residuals
};

// Least-squares slope of log(value) against log(t). Requires >= 4 samples, positive values.
ExponentFit fit_exponent(std::span<const double> t, std::span<const double> value);

DiagnosticRecord diagnose(const FieldState& state, double alpha, double beta, double limit = kNoLimit);

}  // namespace fmkdv
