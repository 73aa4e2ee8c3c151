#include "fmkdv/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "fft_plan.hpp"

namespace fmkdv {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw GridMismatch();
}

}  // namespace

// --- plan cache --------------------------------------------------------------

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

ComplexPlan::ComplexPlan(std::size_t n) : n_(n) {
  buffer_ = static_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n));
  std::lock_guard lock(fftw_planner_mutex());
  auto* buf = reinterpret_cast<fftw_complex*>(buffer_);
  forward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexPlan::~ComplexPlan() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
  fftw_free(buffer_);
}

void ComplexPlan::forward() { fftw_execute(forward_); }
void ComplexPlan::backward() { fftw_execute(backward_); }

ComplexPlan& complex_plan(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<ComplexPlan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<ComplexPlan>(n);
  return *slot;
}

// --- grid --------------------------------------------------------------------

double GridSpec::dk() const { return std::numbers::pi / half_length; }

std::vector<double> GridSpec::coordinates() const {
  std::vector<double> xs(n_points);
  for (std::size_t n = 0; n < n_points; ++n) xs[n] = x(n);
  return xs;
}

std::vector<double> GridSpec::wavenumbers() const {
  std::vector<double> ks(n_points);
  for (std::size_t k = 0; k < n_points; ++k) ks[k] = wavenumber(k);
  return ks;
}

GridSpec make_grid(double half_length, std::size_t n_points) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw std::invalid_argument("grid half-length must be positive and finite");
  if (n_points < 16 || !is_power_of_two(n_points))
    throw std::invalid_argument("grid size must be a power of two >= 16");
  return GridSpec{half_length, n_points};
}

RealField::RealField(const GridSpec& g, std::vector<double> s) : grid(g), samples(std::move(s)) {
  if (samples.size() != grid.n_points) throw std::invalid_argument("sample count does not match grid");
}

ComplexField::ComplexField(const GridSpec& g, std::vector<cplx> s) : grid(g), samples(std::move(s)) {
  if (samples.size() != grid.n_points) throw std::invalid_argument("sample count does not match grid");
}

SpectralField::SpectralField(const GridSpec& g, std::vector<cplx> c) : grid(g), coeffs(std::move(c)) {
  if (coeffs.size() != grid.n_points) throw std::invalid_argument("coefficient count does not match grid");
}

RealField sample(const GridSpec& grid, const std::function<double(double)>& f) {
  RealField out(grid);
  for (std::size_t n = 0; n < grid.n_points; ++n) out[n] = f(grid.x(n));
  return out;
}

// --- transforms --------------------------------------------------------------

SpectralField to_spectral(const RealField& f) {
  auto& plan = complex_plan(f.grid.n_points);
  cplx* buf = plan.data();
  for (std::size_t n = 0; n < f.size(); ++n) buf[n] = f[n];
  plan.forward();
  return SpectralField(f.grid, std::vector<cplx>(buf, buf + f.size()));
}

SpectralField to_spectral(const ComplexField& f) {
  auto& plan = complex_plan(f.grid.n_points);
  std::copy(f.samples.begin(), f.samples.end(), plan.data());
  plan.forward();
  return SpectralField(f.grid, std::vector<cplx>(plan.data(), plan.data() + f.size()));
}

ComplexField to_physical_complex(const SpectralField& spectrum) {
  const std::size_t n = spectrum.size();
  auto& plan = complex_plan(n);
  std::copy(spectrum.coeffs.begin(), spectrum.coeffs.end(), plan.data());
  plan.backward();
  ComplexField out(spectrum.grid);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = plan.data()[j] * scale;
  return out;
}

RealField to_physical(const SpectralField& spectrum) {
  const std::size_t n = spectrum.size();
  auto& plan = complex_plan(n);
  std::copy(spectrum.coeffs.begin(), spectrum.coeffs.end(), plan.data());
  plan.backward();
  RealField out(spectrum.grid);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = plan.data()[j].real() * scale;
  return out;
}

namespace {

cplx ik_power(double xi, int order) {
  cplx m(1.0, 0.0);
  const cplx ik(0.0, xi);
  for (int p = 0; p < order; ++p) m *= ik;
  return m;
}

void check_order(int order) {
  if (order < 0 || order > 5) throw std::invalid_argument("derivative order must be in [0, 5]");
}

}  // namespace

SpectralField derivative(const SpectralField& spectrum, int order) {
  check_order(order);
  SpectralField out = spectrum;
  const auto& g = spectrum.grid;
  for (std::size_t k = 0; k < out.size(); ++k) out.coeffs[k] *= ik_power(g.wavenumber(k), order);
  if (order % 2 == 1) out.coeffs[g.nyquist()] = 0.0;
  return out;
}

RealField derivative(const RealField& f, int order) {
  check_order(order);
  if (order == 0) return f;
  return to_physical(derivative(to_spectral(f), order));
}

ComplexField derivative(const ComplexField& f, int order) {
  check_order(order);
  if (order == 0) return f;
  return to_physical_complex(derivative(to_spectral(f), order));
}

SpectralField multiplier(const SpectralField& spectrum, const Symbol& m) {
  SpectralField out = spectrum;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const cplx v = m(spectrum.grid.wavenumber(k));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::domain_error("multiplier symbol is not finite on the wavenumber table");
    out.coeffs[k] *= v;
  }
  return out;
}

RealField apply_multiplier(const RealField& f, const Symbol& m) {
  return to_physical(multiplier(to_spectral(f), m));
}

double l2_norm(const RealField& f) {
  double s = 0.0;
  for (double v : f.samples) s += v * v;
  return std::sqrt(s * f.grid.dx());
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const cplx& v : f.samples) s += std::norm(v);
  return std::sqrt(s * f.grid.dx());
}

double l2_norm(const SpectralField& spectrum) {
  double s = 0.0;
  for (const cplx& c : spectrum.coeffs) s += std::norm(c);
  const double n = static_cast<double>(spectrum.size());
  return std::sqrt(s * spectrum.grid.dx() / n);
}

double inner_product(const RealField& f, const RealField& g) {
  require_same_grid(f.grid, g.grid);
  double s = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) s += f[n] * g[n];
  return s * f.grid.dx();
}

std::vector<cplx> continuous_spectrum(const SpectralField& spectrum) {
  const auto& g = spectrum.grid;
  const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
  std::vector<cplx> out(spectrum.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    // exp(i xi_k L) = (-1)^{j(k)} accounts for the grid origin at -L
    const double sign = (g.mode(k) % 2 == 0) ? 1.0 : -1.0;
    out[k] = spectrum.coeffs[k] * (scale * sign);
  }
  return out;
}

SpectralField from_continuous_spectrum(const GridSpec& grid, std::span<const cplx> uhat) {
  if (uhat.size() != grid.n_points) throw std::invalid_argument("spectrum length does not match grid");
  const double scale = std::sqrt(2.0 * std::numbers::pi) / grid.dx();
  SpectralField out(grid);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double sign = (grid.mode(k) % 2 == 0) ? 1.0 : -1.0;
    out.coeffs[k] = uhat[k] * (scale * sign);
  }
  return out;
}

cplx interpolate(const SpectralField& spectrum, double x) {
  const auto& g = spectrum.grid;
  const std::size_t n = g.n_points;
  const double s = x - g.x(0);
  const double dk = g.dk();
  // positive modes 1..N/2-1 and negative modes -1..-(N/2-1) by recurrence
  const cplx step = std::polar(1.0, dk * s);
  cplx rot = step;
  cplx acc = spectrum.coeffs[0];
  for (std::size_t j = 1; j < n / 2; ++j) {
    acc += spectrum.coeffs[j] * rot + spectrum.coeffs[n - j] * std::conj(rot);
    if (j % 64 == 0) rot = std::polar(1.0, dk * s * static_cast<double>(j + 1));
    else rot *= step;
  }
  acc += spectrum.coeffs[n / 2] * std::cos(dk * static_cast<double>(n / 2) * s);
  return acc / static_cast<double>(n);
}

std::vector<cplx> interpolate(const SpectralField& spectrum, std::span<const double> xs) {
  std::vector<cplx> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = interpolate(spectrum, xs[i]);
  return out;
}

// --- cutoffs -----------------------------------------------------------------

double smooth_cutoff(double s, double delta) {
  const double a = std::abs(s);
  if (a <= 1.0) return 1.0;
  const double edge = std::exp2(delta);
  if (a >= edge) return 0.0;
  // exp(-1/r) blend in r = log2|s| / delta, flat to all orders at both ends
  const double r = std::log2(a) / delta;
  const double p = std::exp(-1.0 / (1.0 - r));
  const double q = std::exp(-1.0 / r);
  return p / (p + q);
}

double cutoff_le(double s, double radius, double delta) { return smooth_cutoff(s / radius, delta); }

double cutoff_band(double s, double center, double delta) {
  return smooth_cutoff(s / center, delta) - smooth_cutoff(std::exp2(delta) * s / center, delta);
}

double cutoff_between(double s, double r1, double r2, double delta) {
  // sigma_{<= r2} - sigma_{< r1}, with sigma_{< r}(s) = sigma(2^delta s / r)
  return smooth_cutoff(s / r2, delta) - smooth_cutoff(std::exp2(delta) * s / r1, delta);
}

std::vector<DyadicBand> dyadic_bands(const GridSpec& grid, double lowest, double delta) {
  if (!(lowest > 0.0) || !(delta > 0.0)) throw std::invalid_argument("band parameters must be positive");
  std::vector<DyadicBand> bands;
  const double m0 = std::ceil(std::log2(lowest) / delta - 1e-12);
  const double top = grid.dk() * static_cast<double>(grid.n_points / 2);
  for (double m = m0;; m += 1.0) {
    const double c = std::exp2(delta * m);
    bands.push_back({c, delta});
    if (c >= top) break;
  }
  return bands;
}

SpectralField project_dyadic(const SpectralField& spectrum, const DyadicBand& band) {
  if (!(band.center > 0.0)) throw std::invalid_argument("band center must be positive");
  SpectralField out = spectrum;
  for (std::size_t k = 0; k < out.size(); ++k) out.coeffs[k] *= band.symbol(spectrum.grid.wavenumber(k));
  return out;
}

RealField project_dyadic(const RealField& f, const DyadicBand& band) {
  return to_physical(project_dyadic(to_spectral(f), band));
}

RealField project_low(const RealField& f, double lowest_center, double delta) {
  SpectralField s = to_spectral(f);
  const double r = lowest_center / std::exp2(delta);
  for (std::size_t k = 0; k < s.size(); ++k) s.coeffs[k] *= cutoff_le(s.grid.wavenumber(k), r, delta);
  return to_physical(s);
}

SpectralField project_halfline(const SpectralField& spectrum, HalfLine side) {
  SpectralField out(spectrum.grid);
  const std::size_t n = spectrum.size();
  const std::size_t ny = spectrum.grid.nyquist();
  // positive slots 1..N/2-1, negative slots N/2+1..N-1
  if (side == HalfLine::positive) {
    for (std::size_t k = 1; k < ny; ++k) out.coeffs[k] = spectrum.coeffs[k];
  } else {
    for (std::size_t k = ny + 1; k < n; ++k) out.coeffs[k] = spectrum.coeffs[k];
  }
  out.coeffs[ny] = 0.5 * spectrum.coeffs[ny];
  return out;
}

ComplexField project_halfline(const RealField& f, HalfLine side) {
  return to_physical_complex(project_halfline(to_spectral(f), side));
}

double zero_mode_mean(const RealField& f) {
  double s = 0.0;
  for (double v : f.samples) s += v;
  return s / static_cast<double>(f.size());
}

}  // namespace fmkdv
