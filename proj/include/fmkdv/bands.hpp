#pragma once

// Hyperbolic / elliptic splitting of the positive-frequency part u+ and the
// weighted bounds it satisfies.
//
//   u_hyp,N = sigma_hyp_N(t, x) P_N u+,   sigma_hyp_N = sigma_{tN^4/3 <= . <= 3tN^4}(|x|) 1_{x<0}
//   u_hyp   = sum over bands with N >= t^{-1/5},   u_ell = u+ - u_hyp

#include <map>
#include <string>
#include <vector>

#include "fmkdv/diagnostics.hpp"
#include "fmkdv/evolve.hpp"
#include "fmkdv/spectral.hpp"

namespace fmkdv {

struct HypEllSplit {
  double t = 1.0;
  double delta = 1.0;
  std::vector<DyadicBand> bands;        // bands with N >= t^{-1/5}
  std::vector<ComplexField> hyp_bands;  // u_hyp,N per band
  ComplexField u_plus;
  ComplexField hyp;
  ComplexField ell;
};

// Spatial cutoff sigma_hyp_N at (t, x).
double hyperbolic_cutoff(double t, double x, double band_center, double delta);

HypEllSplit split(const FieldState& state, double delta = 1.0);
HypEllSplit split(const FieldState& state, const std::vector<DyadicBand>& bands);

struct PointwiseRatios {
  double hyp = 0.0;
  double ell = 0.0;
};

// sup_x t^{(k+1)/5} <t^{-1/5}x>^{w} |d^k u_*| / (t^{-1/10} xtilde), with
// w = -(k-1)/4 for the hyperbolic part and -k/4 + 7/8 for the elliptic part.
// Both checks look only at |x| <= limit.
PointwiseRatios check_pointwise_bounds(const HypEllSplit& s, double xtilde, int k, double limit = kNoLimit);

// Left-hand sides of the three weighted L2 bounds divided by xtilde:
//   "hyp_weighted"  sum_{k<=3} sum_{l<=k} || t^{(k+1)/4} |x|^{-(5k+1)/4+l} d^l u_hyp ||
//   "hyp_J"         sum_{k<=3} || t^{k/4} |x|^{-(k-3)/4} J+ d^k u_hyp ||,  J+ = |x|^{1/4} + i t^{1/4} d_x
//   "ell_weighted"  sum_{k<=3} || t^{(k+1)/5} <t^{-1/5}x>^{-k/4+1} d^k u_ell ||
// plus the individual k terms as "<name>_k<k>".
std::map<std::string, double> check_l2_bounds(const HypEllSplit& s, double xtilde, double limit = kNoLimit);

}  // namespace fmkdv
