#pragma once

// Wave packets Psi_v(t, x) = chi(lambda (x - v t)) exp(i phi(t, x)) moving with
// velocity v < 0, the test functional gamma(t, v) = int u conj(Psi_v) dx, and the
// scattering profile W extracted from gamma or directly from the spectrum.

#include <optional>
#include <span>
#include <vector>

#include "fmkdv/evolve.hpp"
#include "fmkdv/spectral.hpp"

namespace fmkdv {

// phi(t, x) = -(4/5) t^{-1/4} |x|^{5/4} + pi/4, defined for x < 0.
double phase_phi(double t, double x);

inline constexpr double kChiSupport = 0.9;

// c exp(-1 / (1 - (z/s)^2)) on |z| < s, normalized so that int chi = 1.
double chi(double z);

double packet_frequency(double v);           // xi_v = |v|^{1/4}
double packet_scale(double t, double v);     // lambda = t^{-1/2} |v|^{-3/8}
double packet_resolution(double t, double v);  // t^{4/5} |v|

// Samples Psi_v on the grid. Throws std::out_of_range if the support leaves [-L, L).
ComplexField packet(double t, double v, const GridSpec& grid);

// Fraction of ||Psi_v_hat||^2 outside [xi_v/2, 2 xi_v].
double packet_offband_fraction(double t, double v, const GridSpec& grid);

struct PacketSample {
  double t = 0.0;
  double v = 0.0;
  double xi_v = 0.0;
  double lambda = 0.0;
  cplx gamma{};
};

// gamma(t, v) by the uniform-grid rule restricted to the packet support.
PacketSample gamma(const FieldState& state, double v);
std::vector<PacketSample> gamma(const FieldState& state, std::span<const double> velocities);

// Geometric velocity grid -vmin ... -vmax (vmin, vmax > 0 are magnitudes).
std::vector<double> velocity_grid(double vmin, double vmax, std::size_t count);

struct VelocityRange {
  double vmin = 0.0;  // magnitudes
  double vmax = 0.0;
};

// Magnitudes |v| with t^{4/5}|v| >= resolution at t_first, xi_v <= xi_cut / 2, and the
// packet at t_last inside the fraction `usable` of |x| <= window. Pass the grid half
// length, or the interior half width when absorbing layers are present.
VelocityRange resolved_velocity_range(double t_first, double t_last, double window, double xi_cut,
                                      double resolution = 10.0, double usable = 0.85);

struct OdeResidualPoint {
  double t = 0.0;
  double v = 0.0;
  double residual = 0.0;  // t (t^{4/5}|v|)^{3/16} |gamma_dot + 3 i alpha |gamma|^2 gamma / t|
};

// samples: one velocity, increasing t, at least 3 entries. Returns interior points.
std::vector<OdeResidualPoint> gamma_ode_residual(std::span<const PacketSample> samples, double alpha);

struct ScatteringProfile {
  enum class Source { packet, spectrum };

  std::vector<double> xi;  // ascending
  std::vector<cplx> W;
  Source source = Source::spectrum;
  double t = 0.0;

  // max |W(-xi) - conj W(xi)| over pairs present in the profile
  double symmetry_defect() const;
  // (sum |W|^2 dxi)^{1/2} with dxi from the grid spacing (spectrum profiles)
  double l2_norm() const;
};

struct WPoint {
  double xi = 0.0;
  cplx W{};
};

// W = 2 gamma exp(+(3/4) i alpha |2 gamma|^2 log(t |v|^{5/4})).
WPoint extract_W_packet(const PacketSample& sample, double alpha);
ScatteringProfile packet_profile(std::span<const PacketSample> samples, double alpha);

// W(xi) = u_hat exp(-i t xi^5 / 5 + sgn(xi) (3/4) i alpha |u_hat|^2 log(t |xi|^5)) for
// xi_min <= |xi| <= xi_max (both signs). xi_min = 0 includes the zero mode, where W = u_hat.
ScatteringProfile extract_W_spectrum_range(const FieldState& state, double alpha, double xi_min, double xi_max);
// Band t^{1/5}|xi| >= t^{(1/5)(1/10 - eps_reg)} up to xi_max.
ScatteringProfile extract_W_spectrum(const FieldState& state, double alpha, double xi_max, double eps_reg = 0.05);

struct WDiscrepancy {
  std::size_t points = 0;
  double sup_abs = 0.0;       // max ||W_p| - |W_s||
  double sup_rel = 0.0;       // max ||W_p| - |W_s|| / |W_s|
  double l2_abs = 0.0;        // rms of ||W_p| - |W_s||
  double weighted_sup = 0.0;  // max (t^{4/5} xi^4)^{3/16} |W_p - W_s|
};

// Linear interpolation of the spectrum profile at the packet frequencies (xi > 0 only).
// Throws std::invalid_argument when the ranges do not overlap.
WDiscrepancy cross_check_W(const ScatteringProfile& packets, const ScatteringProfile& spectrum);

struct PhysicalResidual {
  double raw = 0.0;        // |d^k u+(t, vt) - i^k lambda |v|^{k/4} e^{i phi} gamma|
  double reference = 0.0;  // |gamma| lambda |v|^{k/4}
  double weighted = 0.0;   // raw * t^{(k+1)/5} (t^{4/5}|v|)^{-k/4 + 9/16}
};

// u+ evaluated by spectral interpolation at vt, or at the nearest sample.
PhysicalResidual physical_approx_check(const FieldState& state, double v, int k, bool interpolate_point = true);

struct PhaseFit {
  double slope = 0.0;       // d arg(gamma) / d log t
  double prediction = 0.0;  // -3 alpha mean|gamma|^2
  double mean_modulus = 0.0;
  double relative_error = 0.0;  // |slope - prediction| / |prediction| (0 when prediction is 0)
  bool unwrap_ok = true;
  std::optional<double> referenced_slope;  // slope of arg(gamma / gamma_ref)
};

// samples: one velocity, >= 6 entries spanning a decade. reference (optional) holds the
// same (t, v) tested against a comparison flow, typically the linear flow of the datum.
PhaseFit phase_law_fit(std::span<const PacketSample> samples, double alpha,
                       std::span<const PacketSample> reference = {});

}  // namespace fmkdv
