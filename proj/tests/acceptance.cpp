// Desk-scale acceptance run. One PASS/FAIL line per criterion; exit status 1 if any fails.
//
//   acceptance              all criteria
//   acceptance --only 3 9   a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmkdv/bands.hpp"
#include "fmkdv/diagnostics.hpp"
#include "fmkdv/evolve.hpp"
#include "fmkdv/parallel.hpp"
#include "fmkdv/selfsimilar.hpp"
#include "fmkdv/wavepacket.hpp"

using namespace fmkdv;

namespace {

constexpr double kEps = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

SimConfig base_config(double alpha, double beta, double L, std::size_t N, double t_final) {
  SimConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.grid = make_grid(L, N);
  c.t0 = 0.0;
  c.t_final = t_final;
  c.initial.kind = InitialDatum::Kind::gaussian;
  c.initial.amplitude = kEps;
  c.initial.width = 1.0;
  return c;
}

// geometric 10..100 plus the extraction times 25 and 50
std::vector<double> late_times() {
  std::set<double> s{25.0, 50.0};
  for (int i = 0; i <= 18; ++i) s.insert(i == 18 ? 100.0 : 10.0 * std::pow(10.0, i / 18.0));
  return {s.begin(), s.end()};
}

bool in_window(double t) { return t >= 10.0 - 1e-9 && t <= 100.0 + 1e-9; }

struct SharedRun {
  std::string name;
  SimConfig cfg;
  RunResult result;
  FieldState initial;
  std::vector<FieldState> late;  // t in [10, 100]
  double seconds = 0.0;
};

SharedRun do_shared(std::string name, double alpha, double beta) {
  SharedRun r;
  r.name = std::move(name);
  r.cfg = base_config(alpha, beta, 2048.0, std::size_t{1} << 16, 100.0);
  r.cfg.sponge.enabled = true;
  r.cfg.snapshot_times = late_times();
  r.cfg.validate();
  const auto t0 = Clock::now();
  r.result = run(r.cfg);
  r.seconds = seconds_since(t0);
  r.initial = r.result.snapshots.front();
  for (const auto& s : r.result.snapshots)
    if (in_window(s.t)) r.late.push_back(s);
  return r;
}

class Shared {
 public:
  void start() {
    if (started_) return;
    started_ = true;
    t0_ = Clock::now();
    linear_ = std::async(std::launch::async, do_shared, "linear", 0.0, 0.0).share();
    cubic_ = std::async(std::launch::async, do_shared, "alpha=1", 1.0, 0.0).share();
    quintic_ = std::async(std::launch::async, do_shared, "beta=1", 0.0, 1.0).share();
  }
  const SharedRun& linear() { return get(linear_); }
  const SharedRun& cubic() { return get(cubic_); }
  const SharedRun& quintic() { return get(quintic_); }
  std::vector<const SharedRun*> all() { return {&linear(), &cubic(), &quintic()}; }
  // wall time until all three runs finished
  double wall() {
    all();
    return *wall_;
  }

 private:
  const SharedRun& get(std::shared_future<SharedRun>& f) {
    start();
    const SharedRun& r = f.get();
    if (!wall_ && linear_.wait_for(std::chrono::seconds(0)) == std::future_status::ready &&
        cubic_.wait_for(std::chrono::seconds(0)) == std::future_status::ready &&
        quintic_.wait_for(std::chrono::seconds(0)) == std::future_status::ready)
      wall_ = seconds_since(t0_);
    return r;
  }

  bool started_ = false;
  Clock::time_point t0_;
  std::shared_future<SharedRun> linear_, cubic_, quintic_;
  std::optional<double> wall_;
};

bool complete(const SharedRun& r, std::string& note) {
  if (!r.result.failure && r.late.size() == late_times().size()) return true;
  note += " " + r.name + (r.result.failure ? " blew up at t=" + g(r.result.failure->t) : " missing snapshots");
  return false;
}

std::vector<double> times_of(const std::vector<FieldState>& v) {
  std::vector<double> t;
  for (const auto& s : v) t.push_back(s.t);
  return t;
}

double slope(const std::vector<double>& t, const std::vector<double>& v) { return fit_exponent(t, v).slope; }

// ---- 1 ------------------------------------------------------------------------

Verdict linear_exactness() {
  SimConfig c = base_config(0.0, 0.0, 256.0, std::size_t{1} << 14, 50.0);
  for (int i = 1; i <= 10; ++i) c.snapshot_times.push_back(5.0 * i);
  const auto t0 = Clock::now();
  const RunResult r = run(c);
  const double secs = seconds_since(t0);
  const FieldState s0 = FieldState::from_physical(0.0, c.initial.sample(c.grid));
  double worst = 0.0;
  for (const auto& s : r.snapshots) {
    const SpectralField ref = linear_propagate(s0.spectrum, s.t);
    SpectralField d = s.spectrum;
    for (std::size_t k = 0; k < d.size(); ++k) d.coeffs[k] -= ref.coeffs[k];
    worst = std::max(worst, l2_norm(d) / l2_norm(ref));
  }
  const bool ok = !r.failure && r.snapshots.size() == 11 && worst < 1e-11 && secs < 10.0;
  return {ok, "max relative L2 error " + g(worst) + " (< 1e-11), " + g(secs) + " s (< 10 s)"};
}

// ---- 2 ------------------------------------------------------------------------

Verdict conservation() {
  SimConfig c = base_config(0.0, 1.0, 1024.0, std::size_t{1} << 15, 10.0);
  for (int i = 1; i <= 10; ++i) c.snapshot_times.push_back(i);
  const auto t0 = Clock::now();
  const RunResult r = run(c);
  const double secs = seconds_since(t0);
  const double m0 = l2_norm(r.snapshots.front().u);
  const double h0 = hamiltonian(r.snapshots.front().u, c.beta);
  double dm = 0.0, dh = 0.0;
  for (const auto& s : r.snapshots) {
    dm = std::max(dm, std::abs(l2_norm(s.u) - m0) / m0);
    dh = std::max(dh, std::abs(hamiltonian(s.u, c.beta) - h0) / std::abs(h0));
  }
  const bool ok = !r.failure && r.snapshots.size() == 11 && dm < 1e-8 && dh < 1e-6 && secs < 120.0;
  return {ok, "L2 drift " + g(dm) + " (< 1e-8), Hamiltonian drift " + g(dh) + " (< 1e-6), " + g(secs) + " s (< 120 s)"};
}

// ---- 3 ------------------------------------------------------------------------

Verdict decay_exponent(Shared& sh) {
  std::string note;
  bool ok = true;
  std::string detail;
  for (const SharedRun* r : sh.all()) {
    if (!complete(*r, note)) {
      ok = false;
      continue;
    }
    const auto t = times_of(r->late);
    std::vector<double> sup;
    std::vector<std::vector<double>> ck(4);
    for (const auto& s : r->late) {
      const DiagnosticRecord d = diagnose(s, r->cfg.alpha, r->cfg.beta, weight_limit(r->cfg));
      sup.push_back(d.sup);
      for (std::size_t k = 0; k < 4; ++k) ck[k].push_back(d.decay_constants[k]);
    }
    const double sp = slope(t, sup);
    ok = ok && std::abs(sp + 0.2) <= 0.02;
    detail += " " + r->name + ": sup " + g(sp) + " C0..3";
    for (std::size_t k = 0; k < 4; ++k) {
      const double cs = slope(t, ck[k]);
      ok = ok && std::abs(cs) < 0.05;
      detail += " " + g(cs);
    }
    detail += ";";
  }
  const double wall = sh.wall();
  ok = ok && wall < 900.0;
  return {ok, "exponents (sup -0.2 +- 0.02, |C_k| < 0.05):" + detail + note + " runs " + g(wall) + " s (< 900 s)"};
}

// ---- shared packet machinery ----------------------------------------------------

struct PacketTable {
  std::vector<double> v;
  std::vector<std::vector<PacketSample>> by_v;  // increasing t, all of [10, 100]
};

std::vector<double> resolved_velocities(const SharedRun& r) {
  const VelocityRange range = resolved_velocity_range(r.late.front().t, r.late.back().t, weight_limit(r.cfg),
                                                      r.cfg.cutoff_wavenumber(), 10.0, 0.85);
  return velocity_grid(range.vmin, range.vmax, 12);
}

PacketTable packets(const std::vector<FieldState>& states, const std::vector<double>& vs) {
  PacketTable tab;
  tab.v = vs;
  std::vector<std::vector<PacketSample>> per_t(states.size());
  parallel_for(states.size(), [&](std::size_t i) { per_t[i] = gamma(states[i], std::span<const double>(vs)); });
  tab.by_v.assign(vs.size(), {});
  for (std::size_t j = 0; j < vs.size(); ++j)
    for (std::size_t i = 0; i < states.size(); ++i) tab.by_v[j].push_back(per_t[i][j]);
  return tab;
}

std::vector<FieldState> linear_flow(const SharedRun& r) {
  std::vector<FieldState> out;
  for (const auto& s : r.late)
    out.push_back(FieldState::from_spectral(s.t, linear_propagate(r.initial.spectrum, s.t - r.initial.t)));
  return out;
}

// ---- 4 ------------------------------------------------------------------------

Verdict phase_law(Shared& sh) {
  std::string note;
  const SharedRun& a = sh.cubic();
  const SharedRun& b = sh.quintic();
  if (!complete(a, note) | !complete(b, note)) return {false, "runs incomplete:" + note};
  const auto vs = resolved_velocities(a);
  const PacketTable pa = packets(a.late, vs);
  const PacketTable pb = packets(b.late, vs);
  const PacketTable ref = packets(linear_flow(a), vs);
  std::size_t matched = 0, controlled = 0;
  double worst_rel = 0.0, best_rel = 1e300, worst_ctrl = 0.0, worst_ref = 0.0;
  for (std::size_t j = 0; j < vs.size(); ++j) {
    const PhaseFit fa = phase_law_fit(pa.by_v[j], a.cfg.alpha, ref.by_v[j]);
    const PhaseFit fb = phase_law_fit(pb.by_v[j], b.cfg.alpha);
    if (fa.unwrap_ok && fa.relative_error <= 0.1) ++matched;
    worst_rel = std::max(worst_rel, fa.relative_error);
    best_rel = std::min(best_rel, fa.relative_error);
    const double c = std::abs(fb.slope) / std::abs(fa.prediction);
    if (fb.unwrap_ok && c < 0.1) ++controlled;
    worst_ctrl = std::max(worst_ctrl, c);
    if (fa.referenced_slope)
      worst_ref = std::max(worst_ref, std::abs(*fa.referenced_slope - fa.prediction) / std::abs(fa.prediction));
  }
  const bool ok = matched >= 5 && controlled == vs.size();
  return {ok, std::to_string(matched) + "/" + std::to_string(vs.size()) + " velocities within 10% (need 5; relative error " +
                  g(best_rel) + ".." + g(worst_rel) + "), control |slope|/|3 alpha |gamma|^2| max " + g(worst_ctrl) +
                  " (< 0.1); slope of arg(gamma/gamma_linear): worst relative error " + g(worst_ref) + " (not gated)"};
}

// ---- 5 ------------------------------------------------------------------------

Verdict gamma_ode(Shared& sh) {
  std::string note;
  const SharedRun& a = sh.cubic();
  if (!complete(a, note)) return {false, "run incomplete:" + note};
  const PacketTable pa = packets(a.late, resolved_velocities(a));
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& series : pa.by_v)
    for (const auto& r : gamma_ode_residual(series, a.cfg.alpha)) {
      worst = std::max(worst, r.residual);
      ++points;
    }
  return {worst <= 5.0 * kEps && points > 0,
          "max weighted residual " + g(worst) + " over " + std::to_string(points) + " points (<= " + g(5.0 * kEps) + ")"};
}

// ---- 6 ------------------------------------------------------------------------

Verdict w_consistency(Shared& sh) {
  std::string note;
  const SharedRun& a = sh.cubic();
  const SharedRun& b = sh.quintic();
  if (!complete(a, note) | !complete(b, note)) return {false, "runs incomplete:" + note};
  const auto vs = resolved_velocities(a);
  const PacketTable pa = packets(a.late, vs);
  double rel = 0.0, sym = 0.0;
  for (std::size_t i = 0; i < a.late.size(); ++i) {
    std::vector<PacketSample> at;
    for (const auto& series : pa.by_v) at.push_back(series[i]);
    const ScatteringProfile sp = extract_W_spectrum(a.late[i], a.cfg.alpha, a.cfg.cutoff_wavenumber());
    rel = std::max(rel, cross_check_W(packet_profile(at, a.cfg.alpha), sp).sup_rel);
    sym = std::max(sym, sp.symmetry_defect());
  }
  const double u0 = l2_norm(b.initial.u);
  double l2 = 0.0;
  for (const auto& s : b.late) {
    const ScatteringProfile w = extract_W_spectrum_range(s, b.cfg.alpha, 0.0, s.u.grid.xi_max() + s.u.grid.dk());
    sym = std::max(sym, w.symmetry_defect());
    // |W| = |u_hat| mode by mode; the continuous L2 norm carries dxi = pi / L
    l2 = std::max(l2, std::abs(w.l2_norm() - u0) / u0);
  }
  const bool ok = rel < 0.05 && sym < 1e-12 && l2 < 0.02;
  return {ok, "packet/spectrum |W| max relative gap " + g(rel) + " (< 0.05), symmetry defect " + g(sym) +
                  " (< 1e-12), alpha=0 ||W||/||u0|| - 1 max " + g(l2) + " (< 0.02)"};
}

// ---- 7 ------------------------------------------------------------------------

Verdict selfsimilar(Shared& sh) {
  // oracle checks
  const double q00 = q0(0.0);
  const double closed = std::pow(5.0, 0.2) * std::tgamma(1.2) * std::cos(std::numbers::pi / 10.0) / std::numbers::pi;
  const double e_origin = std::abs(q00 - closed);

  // int Q0 e^{-(s y)^2} dy equals E[cos(xi^5/5)], xi ~ N(0, 2 s^2); at s = 0.05 that is 1 - 6e-11
  const double s = 0.05, h = 0.05;
  const long n_lo = static_cast<long>(-130.0 / h), n_hi = static_cast<long>(40.0 / h);
  std::vector<double> ys;
  for (long i = n_lo; i <= n_hi; ++i) ys.push_back(h * static_cast<double>(i));
  std::vector<double> qs(ys.size());
  parallel_for(ys.size(), [&](std::size_t i) { qs[i] = q0(ys[i]); });
  double integral = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) integral += qs[i] * std::exp(-s * s * ys[i] * ys[i]);
  integral *= h;
  const double e_int = std::abs(integral - 1.0);

  const std::vector<double> yr = uniform_grid(4.0 + 10.0 * 8.0 / 1023.0, 1024);
  const Profile oracle = linear_profile_Q0(yr);
  const std::vector<double> res = ode_residual_field(oracle, 0.0, 0.0);
  double e_ode = 0.0;
  for (std::size_t i = 0; i < yr.size(); ++i)
    if (std::abs(yr[i]) <= 4.0 && std::isfinite(res[i])) e_ode = std::max(e_ode, std::abs(res[i]));
  bool ok = e_origin < 1e-6 && e_int < 1e-6 && e_ode < 1e-6;
  std::string detail = "Q0(0) error " + g(e_origin) + ", int Q0 error " + g(e_int) + ", ODE residual " + g(e_ode) + " (all < 1e-6)";

  std::string note;
  const SharedRun& lin = sh.linear();
  if (complete(lin, note)) {
    const double mass = lin.initial.spectrum.coeffs[0].real() * lin.cfg.grid.dx();
    const std::vector<double> y2 = uniform_grid(2.0, 257);
    std::vector<FieldState> last(lin.late.end() - 3, lin.late.end());
    const ProfileExtraction ex = extract_Q(last, y2);
    const Profile q0p = linear_profile_Q0(y2);
    double gap = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < y2.size(); ++i) {
      gap = std::max(gap, std::abs(ex.Q.values[i] - mass * q0p.values[i]));
      scale = std::max(scale, std::abs(mass * q0p.values[i]));
    }
    ok = ok && gap <= 0.05 * scale;
    detail += "; linear Q vs (int u0) Q0 at t=" + g(*ex.Q.t_source) + ": sup gap/sup " + g(gap / scale) + " (<= 0.05)";
  } else {
    ok = false;
  }

  const std::vector<double> y = uniform_grid(10.0, 1025);
  for (const SharedRun* r : {&sh.cubic(), &sh.quintic()}) {
    if (!complete(*r, note)) {
      ok = false;
      continue;
    }
    std::vector<double> resid;
    double sup = 0.0;
    for (double te : {25.0, 50.0, 100.0}) {
      const auto it = std::find_if(r->late.begin(), r->late.end(), [te](const FieldState& f) { return std::abs(f.t - te) < 1e-9; });
      if (it == r->late.end()) {
        ok = false;
        continue;
      }
      const Profile p = rescale(*it, y);
      resid.push_back(ode_residual_Q(p, r->cfg.alpha, r->cfg.beta));
      sup = std::max(sup, p.sup());
    }
    const bool decreasing = resid.size() == 3 && resid[1] < resid[0] && resid[2] < resid[1];
    ok = ok && decreasing && sup <= 3.0 * kEps;
    detail += "; " + r->name + " residual at t=25,50,100:";
    for (double v : resid) detail += " " + g(v);
    detail += std::string(decreasing ? " (decreasing)" : " (not decreasing)") + ", sup Q " + g(sup) + " (<= " + g(3 * kEps) + ")";
  }
  return {ok, detail + note};
}

// ---- 8 ------------------------------------------------------------------------

Verdict physical_approximation(Shared& sh) {
  std::string note;
  const SharedRun& a = sh.cubic();
  if (!complete(a, note)) return {false, "run incomplete:" + note};
  const auto vs = resolved_velocities(a);
  const auto t = times_of(a.late);
  std::vector<std::vector<double>> w(vs.size(), std::vector<double>(t.size()));
  std::vector<double> bound(t.size());
  parallel_for(t.size(), [&](std::size_t i) {
    bound[i] = 5.0 * std::pow(t[i], -0.1) * xtilde_norm(a.late[i], weight_limit(a.cfg));
    for (std::size_t j = 0; j < vs.size(); ++j) w[j][i] = physical_approx_check(a.late[i], vs[j], 0).weighted;
  });
  double worst_ratio = 0.0, worst_slope = -1e300;
  for (std::size_t j = 0; j < vs.size(); ++j) {
    for (std::size_t i = 0; i < t.size(); ++i) worst_ratio = std::max(worst_ratio, w[j][i] / bound[i]);
    worst_slope = std::max(worst_slope, slope(t, w[j]));
  }
  const bool ok = worst_ratio <= 1.0 && worst_slope <= 0.05;
  return {ok, "max residual / (5 t^-0.1 xtilde) " + g(worst_ratio) + " (<= 1), largest fitted exponent " + g(worst_slope) +
                  " (<= 0.05)"};
}

// ---- 9 ------------------------------------------------------------------------

Verdict band_bounds(Shared& sh) {
  std::string note;
  bool ok = true;
  std::string detail;
  for (const SharedRun* r : sh.all()) {
    if (!complete(*r, note)) {
      ok = false;
      continue;
    }
    const auto t = times_of(r->late);
    const double lim = weight_limit(r->cfg);
    std::vector<std::vector<double>> series(t.size());
    std::vector<std::string> names;
    for (int k = 0; k < 4; ++k) {
      names.push_back("hyp_k" + std::to_string(k));
      names.push_back("ell_k" + std::to_string(k));
    }
    for (const char* n : {"hyp_weighted", "hyp_J", "ell_weighted"}) names.push_back(n);
    parallel_for(t.size(), [&](std::size_t i) {
      const FieldState& s = r->late[i];
      const double xt = xtilde_norm(s, lim);
      const HypEllSplit sp = split(s);
      for (int k = 0; k < 4; ++k) {
        const PointwiseRatios p = check_pointwise_bounds(sp, xt, k, lim);
        series[i].push_back(p.hyp);
        series[i].push_back(p.ell);
      }
      const auto l2 = check_l2_bounds(sp, xt, lim);
      for (const char* n : {"hyp_weighted", "hyp_J", "ell_weighted"}) series[i].push_back(l2.at(n));
    });
    double worst = 0.0;
    std::string which;
    for (std::size_t c = 0; c < names.size(); ++c) {
      std::vector<double> v;
      for (std::size_t i = 0; i < t.size(); ++i) v.push_back(series[i][c]);
      const double e = std::abs(slope(t, v));
      if (e > worst) {
        worst = e;
        which = names[c];
      }
    }
    ok = ok && worst < 0.05;
    detail += " " + r->name + " " + g(worst) + " (" + which + ");";
  }
  return {ok, "largest |fitted exponent| of " + std::to_string(11) + " ratios (< 0.05):" + detail + note};
}

// ---- 10 -----------------------------------------------------------------------

Verdict integrator_order() {
  SimConfig c = base_config(1.0, 1.0, 16.0, 128, 2.0);
  c.initial.amplitude = 0.3;
  c.initial.center = 0.5;
  const auto t0 = Clock::now();
  std::vector<RealField> u;
  for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
    c.dt = dt;
    const RunResult r = run(c);
    if (r.failure) return {false, "blew up at dt = " + g(dt)};
    u.push_back(r.snapshots.back().u);
  }
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    RealField e = u[i];
    for (std::size_t n = 0; n < e.size(); ++n) e[n] -= u[i + 1][n];
    d.push_back(l2_norm(e));
  }
  const double p1 = std::log2(d[0] / d[1]), p2 = std::log2(d[1] / d[2]);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(p1 - 4.0) <= 0.3 && std::abs(p2 - 4.0) <= 0.3 && secs < 60.0;
  return {ok, "orders " + g(p1) + ", " + g(p2) + " (4 +- 0.3), " + g(secs) + " s (< 60 s)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (1..10)");
  CLI11_PARSE(app, argc, argv);

  Shared sh;
  const std::vector<Criterion> all{
      {1, "linear_exactness", linear_exactness},
      {2, "conservation", conservation},
      {3, "dispersive_decay", [&] { return decay_exponent(sh); }},
      {4, "phase_law", [&] { return phase_law(sh); }},
      {5, "gamma_ode_residual", [&] { return gamma_ode(sh); }},
      {6, "W_consistency", [&] { return w_consistency(sh); }},
      {7, "selfsimilar_profile", [&] { return selfsimilar(sh); }},
      {8, "physical_approximation", [&] { return physical_approximation(sh); }},
      {9, "hyperbolic_elliptic_bounds", [&] { return band_bounds(sh); }},
      {10, "integrator_order", integrator_order},
  };
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  for (int id = 3; id <= 9; ++id)
    if (wanted(id)) sh.start();

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted(c.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s %2d %-27s %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
