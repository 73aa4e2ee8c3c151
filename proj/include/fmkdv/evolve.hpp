#pragma once

// Time integration of
//
//   u_t - (1/5) u_xxxxx = d_x [ alpha (2 u^2 u_xx + 3 u u_x^2) + beta u^5 ]
//
// with an integrating-factor RK4 scheme: the dispersive factor
// exp(i tau xi^5 / 5) is applied exactly, the nonlinearity explicitly on a
// truncated (alias-free) band.

#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmkdv/spectral.hpp"

namespace fmkdv {

// A configuration field failed validation. field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct InitialDatum {
  enum class Kind { gaussian, sech, custom };

  Kind kind = Kind::gaussian;
  double amplitude = 0.05;  // epsilon
  double width = 1.0;
  double center = 0.0;
  std::vector<double> samples;  // Kind::custom only

  // Samples the datum; throws ConfigError if it does not decay below 1e-14 at the boundary.
  RealField sample(const GridSpec& grid) const;
};

// Multiplicative damping exp(-dt mu(x)) in the outer `fraction` of the domain on each side.
struct SpongeSpec {
  bool enabled = false;
  double strength = 50.0;  // peak mu
  double fraction = 0.1;

  double rate(double x, const GridSpec& grid) const;
};

struct SimConfig {
  double alpha = 0.0;
  double beta = 0.0;
  GridSpec grid{std::numbers::pi, 16};
  double t0 = 0.0;
  double t_final = 1.0;
  std::optional<double> dt;  // nullopt: automatic from the stability heuristic
  double cfl = 0.5;
  double dt_max = 0.01;
  double dealias_fraction = 0.0;  // 0: widest alias-free band for the nonlinearity degree
  InitialDatum initial;
  SpongeSpec sponge;
  std::vector<double> snapshot_times;

  // Polynomial degree of the nonlinearity: 5 if beta != 0, 3 if alpha != 0, else 1.
  int nonlinear_degree() const;
  // Largest retained mode number K; products of p fields are alias-free when (p+1)K < N.
  std::size_t retained_modes() const;
  double cutoff_wavenumber() const { return grid.dk() * static_cast<double>(retained_modes()); }
  void validate() const;
  // Sorted output times, always including t0.
  std::vector<double> output_times() const;
};

struct FieldState {
  double t = 0.0;
  RealField u;
  SpectralField spectrum;

  static FieldState from_physical(double t, RealField u);
  static FieldState from_spectral(double t, SpectralField spectrum);
};

class BlowUp : public std::runtime_error {
 public:
  explicit BlowUp(double t);
  double time() const { return t_; }

 private:
  double t_;
};

struct BlowUpRecord {
  double t = 0.0;
  std::string message;
};

struct RunResult {
  std::vector<FieldState> snapshots;
  std::optional<BlowUpRecord> failure;
  std::vector<std::string> warnings;
  std::size_t steps = 0;
};

// Multiply each coefficient by exp(i tau xi^5 / 5).
SpectralField linear_propagate(const SpectralField& spectrum, double tau);

// N(u) = alpha (2 u^2 u_xx + 3 u u_x^2) + beta u^5 on the band |mode| <= retained.
// Throws BlowUp(0) on non-finite output.
RealField nonlinearity(const RealField& u, double alpha, double beta, std::size_t retained);
RealField nonlinearity(const RealField& u, const SimConfig& cfg);

// (1/5) u_xxxxx + d_x N(u).
RealField rhs(const FieldState& state, const SimConfig& cfg);

// Step size suggested for the explicit nonlinear part at state u, capped at dt_max.
double stable_dt(const RealField& u, const SimConfig& cfg);

// One IF-RK4 step; sponge applied if configured. Throws BlowUp on non-finite state.
FieldState step(const FieldState& state, double dt, const SimConfig& cfg);

using SnapshotObserver = std::function<void(const FieldState&)>;

// Integrates cfg from t0 to t_final, emitting snapshots at cfg.output_times().
// On blow-up returns the snapshots reached so far plus a failure record.
RunResult run(const SimConfig& cfg, const SnapshotObserver& observer = {});

// u(x) -> u(-x) on the periodic grid (index n -> N - n).
RealField reflect(const RealField& u);

}  // namespace fmkdv
