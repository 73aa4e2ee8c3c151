#pragma once

// Periodic grid, FFT-backed transforms, Fourier multipliers, and frequency
// projections (smooth dyadic bands and half-line projections).
//
// Conventions
//   grid points      x_n = -L + n*dx,  n = 0..N-1,  dx = 2L/N
//   wavenumbers      xi_k = (pi/L)*j(k), j(k) = k for k < N/2, k - N otherwise
//   forward DFT      c_k = sum_n f_n exp(-2 pi i k n / N)   (unnormalized)
//   inverse DFT      f_n = (1/N) sum_k c_k exp(+2 pi i k n / N)
//
// SpectralField stores the full length-N coefficient array in FFT order.
// The unitary continuous transform on R, u_hat(xi) = (2 pi)^{-1/2} int u e^{-ix xi},
// is approximated by continuous_spectrum().

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fmkdv {

using cplx = std::complex<double>;

struct GridSpec {
  double half_length = 0.0;  // L, domain [-L, L)
  std::size_t n_points = 0;  // N

  double dx() const { return 2.0 * half_length / static_cast<double>(n_points); }
  double x(std::size_t n) const { return -half_length + static_cast<double>(n) * dx(); }
  // Signed mode number of FFT slot k.
  long mode(std::size_t k) const {
    const long nk = static_cast<long>(k);
    const long nn = static_cast<long>(n_points);
    return nk < nn / 2 ? nk : nk - nn;
  }
  double wavenumber(std::size_t k) const { return dk() * static_cast<double>(mode(k)); }
  double dk() const;
  // Largest positive wavenumber (N/2 - 1) * pi / L.
  double xi_max() const { return dk() * static_cast<double>(n_points / 2 - 1); }
  std::size_t nyquist() const { return n_points / 2; }
  // FFT slot of signed mode j.
  std::size_t slot(long j) const {
    return static_cast<std::size_t>(j >= 0 ? j : j + static_cast<long>(n_points));
  }
  std::vector<double> coordinates() const;
  std::vector<double> wavenumbers() const;

  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double half_length, std::size_t n_points);

class GridMismatch : public std::invalid_argument {
 public:
  GridMismatch() : std::invalid_argument("fields live on different grids") {}
};

struct RealField {
  GridSpec grid;
  std::vector<double> samples;

  RealField() = default;
  explicit RealField(const GridSpec& g) : grid(g), samples(g.n_points, 0.0) {}
  RealField(const GridSpec& g, std::vector<double> s);

  std::size_t size() const { return samples.size(); }
  double operator[](std::size_t n) const { return samples[n]; }
  double& operator[](std::size_t n) { return samples[n]; }
};

// Complex samples in physical space (half-line projections, wave packets).
struct ComplexField {
  GridSpec grid;
  std::vector<cplx> samples;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), samples(g.n_points) {}
  ComplexField(const GridSpec& g, std::vector<cplx> s);

  std::size_t size() const { return samples.size(); }
  cplx operator[](std::size_t n) const { return samples[n]; }
  cplx& operator[](std::size_t n) { return samples[n]; }
};

struct SpectralField {
  GridSpec grid;
  std::vector<cplx> coeffs;  // FFT order

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g) : grid(g), coeffs(g.n_points) {}
  SpectralField(const GridSpec& g, std::vector<cplx> c);

  std::size_t size() const { return coeffs.size(); }
};

RealField sample(const GridSpec& grid, const std::function<double(double)>& f);

SpectralField to_spectral(const RealField& f);
SpectralField to_spectral(const ComplexField& f);
RealField to_physical(const SpectralField& spectrum);  // real part; input assumed Hermitian
ComplexField to_physical_complex(const SpectralField& spectrum);

// (i xi)^k applied in frequency; Nyquist slot zeroed for odd k. 0 <= k <= 5.
RealField derivative(const RealField& f, int order);
SpectralField derivative(const SpectralField& spectrum, int order);
ComplexField derivative(const ComplexField& f, int order);

using Symbol = std::function<cplx(double)>;

// Pointwise product with m(xi_k). Throws std::domain_error on non-finite symbol values.
SpectralField multiplier(const SpectralField& spectrum, const Symbol& m);
RealField apply_multiplier(const RealField& f, const Symbol& m);

// Discrete L2 norm sqrt(dx * sum |f|^2) and its spectral counterpart.
double l2_norm(const RealField& f);
double l2_norm(const ComplexField& f);
double l2_norm(const SpectralField& spectrum);
double inner_product(const RealField& f, const RealField& g);

// u_hat(xi_k) of the unitary continuous transform, FFT order.
std::vector<cplx> continuous_spectrum(const SpectralField& spectrum);
SpectralField from_continuous_spectrum(const GridSpec& grid, std::span<const cplx> uhat);

// Band-limited evaluation sum_k c_k e^{i xi_k (x - x_0)} / N at an arbitrary point.
// The Nyquist slot contributes its cosine part only.
cplx interpolate(const SpectralField& spectrum, double x);
std::vector<cplx> interpolate(const SpectralField& spectrum, std::span<const double> xs);

// --- smooth cutoffs ---------------------------------------------------------

// Even bump: 1 on |s| <= 1, 0 on |s| >= 2^delta, C-infinity blend in log2|s| between.
double smooth_cutoff(double s, double delta);
// sigma_{<=R}, sigma_R and sigma_{R1 <= . <= R2} built from smooth_cutoff.
double cutoff_le(double s, double radius, double delta);
double cutoff_band(double s, double center, double delta);
double cutoff_between(double s, double r1, double r2, double delta);

struct DyadicBand {
  double center = 1.0;  // N_dyad > 0
  double delta = 1.0;   // band spacing exponent: centers lie in 2^{delta Z}

  double symbol(double xi) const { return cutoff_band(xi, center, delta); }
};

// Bands with centers 2^{delta m} from the first center >= lowest up to the first
// center above xi_max, so that the bands plus low_pass(lowest) reconstruct any field.
std::vector<DyadicBand> dyadic_bands(const GridSpec& grid, double lowest, double delta = 1.0);

RealField project_dyadic(const RealField& f, const DyadicBand& band);
SpectralField project_dyadic(const SpectralField& spectrum, const DyadicBand& band);
// Complement of a family of bands starting at `lowest_center`: sigma_{<= lowest/2^delta}.
RealField project_low(const RealField& f, double lowest_center, double delta = 1.0);

enum class HalfLine { positive, negative };

// Frequency-side indicator of R_+ or R_-. The zero mode belongs to neither side;
// the Nyquist coefficient is split evenly so that u_- = conj(u_+) for real input.
ComplexField project_halfline(const RealField& f, HalfLine side);
SpectralField project_halfline(const SpectralField& spectrum, HalfLine side);
double zero_mode_mean(const RealField& f);

}  // namespace fmkdv
