#include "fmkdv/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "fft_plan.hpp"
#include "fmkdv/diagnostics.hpp"

namespace fmkdv {

// --- configuration ------------------------------------------------------------

RealField InitialDatum::sample(const GridSpec& grid) const {
  RealField u(grid);
  switch (kind) {
    case Kind::gaussian:
      for (std::size_t n = 0; n < grid.n_points; ++n) {
        const double z = (grid.x(n) - center) / width;
        u[n] = amplitude * std::exp(-z * z);
      }
      break;
    case Kind::sech:
      for (std::size_t n = 0; n < grid.n_points; ++n) {
        const double z = (grid.x(n) - center) / width;
        u[n] = amplitude / std::cosh(z);
      }
      break;
    case Kind::custom:
      if (samples.size() != grid.n_points) throw ConfigError("initial.samples", "length must equal N");
      u.samples = samples;
      break;
  }
  for (double v : u.samples)
    if (!std::isfinite(v)) throw ConfigError("initial", "datum has non-finite samples");
  const double edge = std::max(std::abs(u[0]), std::abs(u[grid.n_points - 1]));
  if (edge >= 1e-14) throw ConfigError("initial", "datum does not decay below 1e-14 at the domain boundary");
  return u;
}

double SpongeSpec::rate(double x, const GridSpec& grid) const {
  if (!enabled) return 0.0;
  const double inner = (1.0 - fraction) * grid.half_length;
  const double a = std::abs(x);
  if (a <= inner) return 0.0;
  const double s = std::min(1.0, (a - inner) / (fraction * grid.half_length));
  const double r = std::sin(0.5 * std::numbers::pi * s);
  return strength * r * r;
}

int SimConfig::nonlinear_degree() const {
  if (beta != 0.0) return 5;
  if (alpha != 0.0) return 3;
  return 1;
}

std::size_t SimConfig::retained_modes() const {
  const std::size_t n = grid.n_points;
  const std::size_t p1 = static_cast<std::size_t>(nonlinear_degree() + 1);
  const std::size_t widest = (n - 1) / p1;
  if (dealias_fraction <= 0.0) return widest;
  return static_cast<std::size_t>(std::floor(dealias_fraction * static_cast<double>(n / 2)));
}

void SimConfig::validate() const {
  if (!std::isfinite(alpha)) throw ConfigError("alpha", "must be finite");
  if (!std::isfinite(beta)) throw ConfigError("beta", "must be finite");
  try {
    (void)make_grid(grid.half_length, grid.n_points);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }
  if (!std::isfinite(t0)) throw ConfigError("t0", "must be finite");
  if (!std::isfinite(t_final) || t_final < t0) throw ConfigError("t_final", "must be >= t0");
  if (dt && !(*dt > 0.0 && std::isfinite(*dt))) throw ConfigError("dt", "must be positive or \"auto\"");
  if (!(cfl > 0.0)) throw ConfigError("cfl", "must be positive");
  if (!(dt_max > 0.0)) throw ConfigError("dt_max", "must be positive");
  if (dealias_fraction < 0.0 || dealias_fraction > 1.0)
    throw ConfigError("dealias_fraction", "must lie in [0, 1]");
  const std::size_t k = retained_modes();
  const std::size_t p1 = static_cast<std::size_t>(nonlinear_degree() + 1);
  if (k == 0 || p1 * k >= grid.n_points)
    throw ConfigError("dealias_fraction", "retained band is not alias-free for the nonlinearity degree");
  if (initial.kind != InitialDatum::Kind::custom) {
    if (!(initial.amplitude > 0.0)) throw ConfigError("initial.amplitude", "must be positive");
    if (!(initial.width > 0.0)) throw ConfigError("initial.width", "must be positive");
  }
  if (sponge.enabled) {
    if (!(sponge.strength > 0.0)) throw ConfigError("sponge.strength", "must be positive");
    if (!(sponge.fraction > 0.0 && sponge.fraction < 0.5)) throw ConfigError("sponge.fraction", "must lie in (0, 0.5)");
  }
  for (double t : snapshot_times)
    if (!(t >= t0 && t <= t_final)) throw ConfigError("snapshot_times", "every time must lie in [t0, t_final]");
  (void)initial.sample(grid);
}

std::vector<double> SimConfig::output_times() const {
  std::vector<double> ts = snapshot_times;
  ts.push_back(t0);
  if (snapshot_times.empty()) ts.push_back(t_final);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

FieldState FieldState::from_physical(double t, RealField u) {
  SpectralField s = to_spectral(u);
  return FieldState{t, std::move(u), std::move(s)};
}

FieldState FieldState::from_spectral(double t, SpectralField spectrum) {
  RealField u = to_physical(spectrum);
  return FieldState{t, std::move(u), std::move(spectrum)};
}

namespace {

std::string blowup_message(double t) {
  std::ostringstream os;
  os << "solution blew up (non-finite or overflowing values) at t = " << t;
  return os.str();
}

constexpr double kOverflow = 1e100;

}  // namespace

BlowUp::BlowUp(double t) : std::runtime_error(blowup_message(t)), t_(t) {}

RealField reflect(const RealField& u) {
  RealField out(u.grid);
  const std::size_t n = u.size();
  for (std::size_t j = 0; j < n; ++j) out[j] = u[(n - j) % n];
  return out;
}

namespace {

// exp(i tau xi^5 / 5). The phase reaches 1e10 on fine grids, so it is reduced
// mod 2 pi in extended precision before rounding.
cplx dispersive_factor(double xi, double tau) {
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  const long double x = xi;
  long double p = x * x * x * x * x * static_cast<long double>(tau) / 5.0L;
  p -= two_pi * std::nearbyint(p / two_pi);
  return std::polar(1.0, static_cast<double>(p));
}

}  // namespace

SpectralField linear_propagate(const SpectralField& spectrum, double tau) {
  SpectralField out = spectrum;
  for (std::size_t k = 0; k < out.size(); ++k) out.coeffs[k] *= dispersive_factor(spectrum.grid.wavenumber(k), tau);
  return out;
}

// --- integrator -----------------------------------------------------------------

namespace {

// Half-spectrum IF-RK4 integrator; the state holds unnormalized DFT
// coefficients for modes 0..N/2, zero beyond the retained band.
class Integrator {
 public:
  explicit Integrator(const SimConfig& cfg)
      : cfg_(cfg),
        n_(cfg.grid.n_points),
        nh_(n_ / 2 + 1),
        k_(std::min(cfg.retained_modes(), n_ / 2 - 1)),
        plan_(n_),
        u_(n_), ux_(n_), uxx_(n_), mu_(n_, 0.0) {
    xi_.resize(nh_);
    for (std::size_t k = 0; k < nh_; ++k) xi_[k] = cfg.grid.dk() * static_cast<double>(k);
    if (cfg.sponge.enabled)
      for (std::size_t j = 0; j < n_; ++j) mu_[j] = cfg.sponge.rate(cfg.grid.x(j), cfg.grid);
  }

  std::vector<cplx> load(const RealField& u) {
    std::copy(u.samples.begin(), u.samples.end(), plan_.real());
    plan_.forward();
    std::vector<cplx> v(plan_.half(), plan_.half() + nh_);
    truncate(v);
    return v;
  }

  SpectralField full_spectrum(const std::vector<cplx>& v) const {
    SpectralField s(cfg_.grid);
    s.coeffs[0] = v[0];
    for (std::size_t k = 1; k < nh_ - 1; ++k) {
      s.coeffs[k] = v[k];
      s.coeffs[n_ - k] = std::conj(v[k]);
    }
    s.coeffs[n_ / 2] = v[nh_ - 1];
    return s;
  }

  RealField physical(const std::vector<cplx>& v) {
    synthesize(v, 0, u_);
    return RealField(cfg_.grid, u_);
  }

  // Physical-space stability estimate from the current u, u_x, u_xx buffers.
  double suggested_dt() const {
    const double a = std::abs(cfg_.alpha);
    const double b = std::abs(cfg_.beta);
    if (a == 0.0 && b == 0.0) return cfg_.dt_max;
    double u2 = 0.0, uux = 0.0, uuxx = 0.0, ux2 = 0.0, u4 = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double s = u_[j] * u_[j];
      u2 = std::max(u2, s);
      u4 = std::max(u4, s * s);
      uux = std::max(uux, std::abs(u_[j] * ux_[j]));
      uuxx = std::max(uuxx, std::abs(u_[j] * uxx_[j]));
      ux2 = std::max(ux2, ux_[j] * ux_[j]);
    }
    const double xk = xi_[k_];
    const double rate = a * (2.0 * u2 * xk * xk * xk + 6.0 * uux * xk * xk + (4.0 * uuxx + 3.0 * ux2) * xk) +
                        5.0 * b * u4 * xk;
    if (!(rate > 0.0)) return cfg_.dt_max;
    // RK4 stability reaches 2.8 along the imaginary axis
    return std::min(cfg_.dt_max, cfg_.cfl * 2.8 / rate);
  }

  // d_x N(u) in half-spectrum form, written into out.
  void nonlinear_term(const std::vector<cplx>& v, std::vector<cplx>& out) {
    synthesize(v, 0, u_);
    synthesize(v, 1, ux_);
    synthesize(v, 2, uxx_);
    double* r = plan_.real();
    const double a = cfg_.alpha;
    const double b = cfg_.beta;
    for (std::size_t j = 0; j < n_; ++j) {
      const double u = u_[j];
      const double u2 = u * u;
      r[j] = a * (2.0 * u2 * uxx_[j] + 3.0 * u * ux_[j] * ux_[j]) + b * u2 * u2 * u;
    }
    plan_.forward();
    const cplx* h = plan_.half();
    out.assign(nh_, cplx{});
    for (std::size_t k = 1; k <= k_; ++k) out[k] = cplx(0.0, xi_[k]) * h[k];
  }

  void set_step(double h) {
    if (h == h_) return;
    auto& entry = factors_[h];
    if (entry.first.empty()) {
      entry.first.resize(nh_);
      entry.second.resize(nh_);
      for (std::size_t k = 0; k < nh_; ++k) {
        entry.first[k] = dispersive_factor(xi_[k], h);
        entry.second[k] = dispersive_factor(xi_[k], 0.5 * h);
      }
    }
    e_ = &entry.first;
    e2_ = &entry.second;
    h_ = h;
  }

  // Advances v by h (factors must be set). Stage-one physical buffers remain in u_, ux_, uxx_.
  void advance(std::vector<cplx>& v, double h, bool linear_only) {
    set_step(h);
    const auto& e = *e_;
    const auto& e2 = *e2_;
    if (linear_only) {
      for (std::size_t k = 0; k < nh_; ++k) v[k] *= e[k];
      return;
    }
    nonlinear_term(v, k1_);
    stage_.resize(nh_);
    for (std::size_t k = 0; k < nh_; ++k) stage_[k] = e2[k] * (v[k] + 0.5 * h * k1_[k]);
    nonlinear_term(stage_, k2_);
    for (std::size_t k = 0; k < nh_; ++k) stage_[k] = e2[k] * v[k] + 0.5 * h * k2_[k];
    nonlinear_term(stage_, k3_);
    for (std::size_t k = 0; k < nh_; ++k) stage_[k] = e[k] * v[k] + h * e2[k] * k3_[k];
    nonlinear_term(stage_, k4_);
    for (std::size_t k = 0; k < nh_; ++k)
      v[k] = e[k] * v[k] + (h / 6.0) * (e[k] * k1_[k] + 2.0 * e2[k] * (k2_[k] + k3_[k]) + k4_[k]);
  }

  void apply_sponge(std::vector<cplx>& v, double h) {
    if (!cfg_.sponge.enabled) return;
    synthesize(v, 0, u_);
    double* r = plan_.real();
    for (std::size_t j = 0; j < n_; ++j) r[j] = u_[j] * std::exp(-h * mu_[j]);
    plan_.forward();
    std::copy(plan_.half(), plan_.half() + nh_, v.begin());
    truncate(v);
  }

  bool finite(const std::vector<cplx>& v) const {
    const double limit = kOverflow * static_cast<double>(n_);
    for (std::size_t k = 0; k <= k_; ++k) {
      const double re = v[k].real(), im = v[k].imag();
      if (!std::isfinite(re) || !std::isfinite(im) || std::abs(re) > limit || std::abs(im) > limit) return false;
    }
    return true;
  }

  // Evaluates u, u_x, u_xx for v into the physical buffers.
  void refresh_physical(const std::vector<cplx>& v) {
    synthesize(v, 0, u_);
    synthesize(v, 1, ux_);
    synthesize(v, 2, uxx_);
  }

 private:
  void truncate(std::vector<cplx>& v) const {
    for (std::size_t k = k_ + 1; k < nh_; ++k) v[k] = 0.0;
  }

  // Inverse transform of (i xi)^order v into dst (normalized).
  void synthesize(const std::vector<cplx>& v, int order, std::vector<double>& dst) {
    cplx* h = plan_.half();
    for (std::size_t k = 0; k < nh_; ++k) {
      cplx m = v[k];
      for (int p = 0; p < order; ++p) m *= cplx(0.0, xi_[k]);
      h[k] = m;
    }
    if (order % 2 == 1) h[nh_ - 1] = 0.0;
    plan_.backward();
    const double scale = 1.0 / static_cast<double>(n_);
    const double* r = plan_.real();
    for (std::size_t j = 0; j < n_; ++j) dst[j] = r[j] * scale;
  }

  const SimConfig& cfg_;
  std::size_t n_, nh_, k_;
  RealPlan plan_;
  std::vector<double> xi_;
  std::vector<double> u_, ux_, uxx_, mu_;
  std::vector<cplx> k1_, k2_, k3_, k4_, stage_;
  std::map<double, std::pair<std::vector<cplx>, std::vector<cplx>>> factors_;
  const std::vector<cplx>* e_ = nullptr;
  const std::vector<cplx>* e2_ = nullptr;
  double h_ = -1.0;
};

bool is_linear(const SimConfig& cfg) { return cfg.alpha == 0.0 && cfg.beta == 0.0; }

// Largest dt_max * 2^-m not exceeding the suggestion; quantized so that the
// exponential factors can be cached.
double quantize_step(double suggestion, double dt_max) {
  double h = dt_max;
  while (h > suggestion && h > 1e-12) h *= 0.5;
  return h;
}

}  // namespace

RealField nonlinearity(const RealField& u, double alpha, double beta, std::size_t retained) {
  const auto& g = u.grid;
  SpectralField s = to_spectral(u);
  const std::size_t n = g.n_points;
  for (std::size_t k = 0; k < n; ++k)
    if (static_cast<std::size_t>(std::abs(g.mode(k))) > retained) s.coeffs[k] = 0.0;
  const RealField v = to_physical(s);
  const RealField vx = to_physical(derivative(s, 1));
  const RealField vxx = to_physical(derivative(s, 2));
  RealField out(g);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = v[j];
    out[j] = alpha * (2.0 * w * w * vxx[j] + 3.0 * w * vx[j] * vx[j]) + beta * w * w * w * w * w;
  }
  SpectralField ns = to_spectral(out);
  for (std::size_t k = 0; k < n; ++k)
    if (static_cast<std::size_t>(std::abs(g.mode(k))) > retained) ns.coeffs[k] = 0.0;
  out = to_physical(ns);
  for (double x : out.samples)
    if (!std::isfinite(x) || std::abs(x) > kOverflow) throw BlowUp(0.0);
  return out;
}

RealField nonlinearity(const RealField& u, const SimConfig& cfg) {
  return nonlinearity(u, cfg.alpha, cfg.beta, cfg.retained_modes());
}

RealField rhs(const FieldState& state, const SimConfig& cfg) {
  SpectralField lin = derivative(state.spectrum, 5);
  for (auto& c : lin.coeffs) c *= 0.2;
  if (is_linear(cfg)) return to_physical(lin);
  const SpectralField nl = derivative(to_spectral(nonlinearity(state.u, cfg)), 1);
  for (std::size_t k = 0; k < lin.size(); ++k) lin.coeffs[k] += nl.coeffs[k];
  return to_physical(lin);
}

double stable_dt(const RealField& u, const SimConfig& cfg) {
  Integrator in(cfg);
  in.refresh_physical(in.load(u));
  return in.suggested_dt();
}

FieldState step(const FieldState& state, double dt, const SimConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  Integrator in(cfg);
  std::vector<cplx> v = in.load(state.u);
  const double t = state.t + dt;
  try {
    in.advance(v, dt, is_linear(cfg));
  } catch (const BlowUp&) {
    throw BlowUp(t);
  }
  in.apply_sponge(v, dt);
  if (!in.finite(v)) throw BlowUp(t);
  return FieldState::from_spectral(t, in.full_spectrum(v));
}

RunResult run(const SimConfig& cfg, const SnapshotObserver& observer) {
  cfg.validate();
  RunResult result;
  Integrator in(cfg);
  const bool linear = is_linear(cfg);
  std::vector<cplx> v = in.load(cfg.initial.sample(cfg.grid));
  double t = cfg.t0;

  auto emit = [&](double time) {
    FieldState s = FieldState::from_spectral(time, in.full_spectrum(v));
    const double bm = boundary_mass(s.u);
    if (bm > kBoundaryMassThreshold) {
      std::ostringstream os;
      os << "t = " << time << ": boundary mass " << bm << " exceeds " << kBoundaryMassThreshold;
      result.warnings.push_back(os.str());
    }
    if (observer) observer(s);
    result.snapshots.push_back(std::move(s));
  };

  const std::vector<double> outputs = cfg.output_times();
  std::size_t next = 0;
  while (next < outputs.size() && outputs[next] <= t) emit(outputs[next++]);

  double h_nominal = cfg.dt.value_or(cfg.dt_max);
  if (!cfg.dt && !linear) {
    in.refresh_physical(v);
    h_nominal = quantize_step(in.suggested_dt(), cfg.dt_max);
  }

  // t + t_err is the exact sum of the steps taken; the flow phase depends on it
  double t_err = 0.0;
  while (next < outputs.size()) {
    const double target = outputs[next];
    const double remaining = (target - t) - t_err;
    const bool last = remaining <= h_nominal * (1.0 + 1e-9);
    const double h = last ? remaining : h_nominal;
    try {
      in.advance(v, h, linear);
    } catch (const BlowUp&) {
      result.failure = BlowUpRecord{t + h, blowup_message(t + h)};
      return result;
    }
    in.apply_sponge(v, h);
    ++result.steps;
    if (last) {
      t = target;
      t_err = 0.0;
    } else {
      const double sum = t + h;
      const double bp = sum - t;
      t_err += (t - (sum - bp)) + (h - bp);
      t = sum;
    }
    if (!in.finite(v)) {
      result.failure = BlowUpRecord{t, blowup_message(t)};
      return result;
    }
    if (last) emit(outputs[next++]);
    if (!cfg.dt && !linear) {
      // stage-one buffers hold the previous state; refresh at the new one
      in.refresh_physical(v);
      h_nominal = quantize_step(in.suggested_dt(), cfg.dt_max);
    }
  }
  return result;
}

}  // namespace fmkdv
