#include "fmkdv/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "fmkdv/bands.hpp"
#include "fmkdv/diagnostics.hpp"
#include "fmkdv/io.hpp"
#include "fmkdv/parallel.hpp"
#include "fmkdv/selfsimilar.hpp"
#include "fmkdv/svg.hpp"
#include "fmkdv/wavepacket.hpp"

#ifndef FMKDV_VERSION
#define FMKDV_VERSION "dev"
#endif

namespace fmkdv {

namespace fs = std::filesystem;

namespace {

const std::string kConfigName = "config.json";

std::string snapshot_stem(std::size_t i) {
  char b[32];
  std::snprintf(b, sizeof b, "snap_%04zu", i);
  return b;
}

// Adds artifacts to the run manifest, replacing entries with the same path.
void record_artifacts(const fs::path& dir, const std::string& command, const std::vector<Artifact>& add,
                      const std::string& config_hash = {}) {
  RunManifest m;
  if (fs::exists(dir / "manifest.json")) m = read_manifest(dir);
  if (!config_hash.empty()) m.config_hash = config_hash;
  if (m.config_hash.empty() && fs::exists(dir / kConfigName)) m.config_hash = hex64(fnv1a64(read_file(dir / kConfigName)));
  m.version = FMKDV_VERSION;
  m.created_at = utc_timestamp();
  m.command = command;
  for (const auto& a : add) {
    auto it = std::find_if(m.artifacts.begin(), m.artifacts.end(), [&](const Artifact& b) { return b.path == a.path; });
    if (it != m.artifacts.end())
      *it = a;
    else
      m.artifacts.push_back(a);
  }
  write_manifest(dir, m);
}

std::string f(double v) { return format_double(v); }

struct RunInputs {
  SimConfig cfg;
  std::vector<SnapshotMeta> metas;
};

// Loads config and snapshot list; returns an exit code on failure.
std::optional<int> load_run(const fs::path& dir, RunInputs& in, std::ostream& err, std::size_t min_snapshots) {
  std::vector<std::string> missing;
  if (!fs::is_directory(dir)) {
    err << "error: run directory " << dir << " does not exist\n";
    return kExitMissing;
  }
  if (!fs::exists(dir / kConfigName)) missing.push_back((dir / kConfigName).string());
  try {
    in.metas = list_snapshots(dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissing;
  }
  for (const auto& m : in.metas)
    if (!fs::exists(m.data)) missing.push_back(m.data.string());
  if (in.metas.size() < min_snapshots) {
    std::ostringstream os;
    os << dir.string() << "/snap_*.json + .f64 (found " << in.metas.size() << ", need " << min_snapshots << ")";
    missing.push_back(os.str());
  }
  if (!missing.empty()) {
    err << "error: missing inputs:\n";
    for (const auto& m : missing) err << "  " << m << "\n";
    return kExitMissing;
  }
  try {
    in.cfg = parse_config_text(read_file(dir / kConfigName));
  } catch (const ConfigError& e) {
    err << "error: " << kConfigName << ": " << e.what() << "\n";
    return kExitConfig;
  }
  return std::nullopt;
}

std::vector<FieldState> load_states(const std::vector<SnapshotMeta>& metas) {
  std::vector<FieldState> s(metas.size());
  parallel_for(metas.size(), [&](std::size_t i) { s[i] = read_snapshot(metas[i]); });
  return s;
}

CsvTable diagnostics_table(const std::vector<DiagnosticRecord>& recs) {
  CsvTable t;
  t.header = {"t", "l2", "h1", "h2", "hamiltonian", "corrected_energy", "j_norm", "lambda_norm", "xs_norm", "xtilde",
              "sup", "C0", "C1", "C2", "C3", "boundary_mass", "boundary_ok"};
  for (const auto& r : recs)
    t.add_row({f(r.t), f(r.l2), f(r.hs.at(1)), f(r.hs.at(2)), f(r.hamiltonian), f(r.corrected_energy), f(r.j_norm),
               f(r.lambda_norm), f(r.xs_norm), f(r.xtilde), f(r.sup), f(r.decay_constants[0]), f(r.decay_constants[1]),
               f(r.decay_constants[2]), f(r.decay_constants[3]), f(r.boundary_mass), format_bool(r.boundary_ok)});
  return t;
}

}  // namespace

// --- simulate -------------------------------------------------------------------

int cmd_simulate(const fs::path& config, const fs::path& out_dir, std::ostream& log, std::ostream& err) {
  std::string text;
  try {
    text = read_file(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissing;
  }
  SimConfig cfg;
  try {
    cfg = parse_config_text(text);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  fs::create_directories(out_dir);
  for (const auto& e : fs::directory_iterator(out_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("snap_", 0) == 0) fs::remove(e.path());
  }
  const std::string hash = hex64(fnv1a64(text));
  {
    std::ofstream c(out_dir / kConfigName, std::ios::binary);
    c << text;
  }
  std::vector<Artifact> arts{{kConfigName, "config"}};
  std::vector<DiagnosticRecord> recs;
  std::size_t index = 0;
  auto observer = [&](const FieldState& s) {
    const SnapshotMeta m = write_snapshot(out_dir, snapshot_stem(index++), s, cfg.alpha, cfg.beta);
    arts.push_back({m.data.filename().string(), "snapshot"});
    arts.push_back({m.sidecar.filename().string(), "snapshot-meta"});
    recs.push_back(diagnose(s, cfg.alpha, cfg.beta, weight_limit(cfg)));
    log << "t = " << s.t << "  l2 = " << recs.back().l2 << "  sup = " << recs.back().sup << "\n";
  };
  const RunResult res = run(cfg, observer);
  write_csv(out_dir / "diagnostics.csv", diagnostics_table(recs));
  arts.push_back({"diagnostics.csv", "table"});
  fs::remove(out_dir / "warnings.txt");
  if (!res.warnings.empty()) {
    std::ofstream w(out_dir / "warnings.txt");
    for (const auto& s : res.warnings) w << s << "\n";
    arts.push_back({"warnings.txt", "log"});
  }
  for (const auto& s : res.warnings) err << "warning: " << s << "\n";
  if (res.failure) {
    nlohmann::json j = {{"t", res.failure->t}, {"message", res.failure->message}, {"snapshots", res.snapshots.size()}};
    std::ofstream fl(out_dir / "failure.json");
    fl << j.dump(2) << "\n";
    fl.close();
    arts.push_back({"failure.json", "failure"});
  }
  fs::remove(out_dir / "manifest.json");
  record_artifacts(out_dir, "simulate", arts, hash);
  log << res.steps << " steps, " << res.snapshots.size() << " snapshots written to " << out_dir.string() << "\n";
  if (res.failure) {
    err << "blow-up: " << res.failure->message << " (partial trajectory kept)\n";
    return kExitBlowUp;
  }
  return kExitOk;
}

// --- analyze --------------------------------------------------------------------

int cmd_analyze(const fs::path& dir, std::ostream& log, std::ostream& err) {
  RunInputs in;
  if (auto code = load_run(dir, in, err, 1)) return *code;
  const SimConfig& cfg = in.cfg;
  const std::vector<FieldState> states = load_states(in.metas);
  std::vector<DiagnosticRecord> recs(states.size());
  parallel_for(states.size(), [&](std::size_t i) { recs[i] = diagnose(states[i], cfg.alpha, cfg.beta, weight_limit(cfg)); });
  std::vector<Artifact> arts;
  write_csv(dir / "diagnostics.csv", diagnostics_table(recs));
  arts.push_back({"diagnostics.csv", "table"});

  // decay fits
  CsvTable fits;
  fits.header = {"quantity", "k", "window", "samples", "slope", "intercept", "residual", "expected_slope"};
  auto fit_window = [&](const std::string& name, double lo, double hi) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].t >= lo && states[i].t <= hi) idx.push_back(i);
    if (idx.size() < 4) return;
    std::vector<double> t;
    for (auto i : idx) t.push_back(states[i].t);
    for (int k = 0; k < 4; ++k) {
      std::vector<double> sup, c;
      for (auto i : idx) {
        const RealField d = derivative(states[i].u, k);
        double m = 0;
        for (double v : d.samples) m = std::max(m, std::abs(v));
        sup.push_back(m);
        c.push_back(recs[i].decay_constants[static_cast<std::size_t>(k)]);
      }
      try {
        const ExponentFit a = fit_exponent(t, sup);
        fits.add_row({"sup_derivative", std::to_string(k), name, std::to_string(idx.size()), f(a.slope), f(a.intercept),
                      f(a.residual), f(-(k + 1) / 5.0)});
        const ExponentFit b = fit_exponent(t, c);
        fits.add_row({"decay_constant", std::to_string(k), name, std::to_string(idx.size()), f(b.slope), f(b.intercept),
                      f(b.residual), f(0.0)});
      } catch (const std::exception& e) {
        err << "warning: fit " << name << " k=" << k << ": " << e.what() << "\n";
      }
    }
    std::vector<double> xt, lam;
    for (auto i : idx) {
      xt.push_back(recs[i].xtilde);
      lam.push_back(recs[i].lambda_norm);
    }
    try {
      const ExponentFit a = fit_exponent(t, xt);
      fits.add_row({"xtilde", "", name, std::to_string(idx.size()), f(a.slope), f(a.intercept), f(a.residual), f(0.1)});
      const ExponentFit b = fit_exponent(t, lam);
      fits.add_row({"lambda_norm", "", name, std::to_string(idx.size()), f(b.slope), f(b.intercept), f(b.residual), f(0.0)});
    } catch (const std::exception& e) {
      err << "warning: fit " << name << ": " << e.what() << "\n";
    }
  };
  fit_window("t>=1", 1.0, 1e300);
  fit_window("10<=t<=100", 10.0, 100.0);
  write_csv(dir / "decay_fits.csv", fits);
  arts.push_back({"decay_fits.csv", "table"});

  // hyperbolic / elliptic ratios
  CsvTable ratios;
  ratios.header = {"t", "xtilde"};
  for (int k = 0; k < 4; ++k) {
    ratios.header.push_back("pointwise_hyp_k" + std::to_string(k));
    ratios.header.push_back("pointwise_ell_k" + std::to_string(k));
  }
  for (const char* n : {"hyp_weighted", "hyp_J", "ell_weighted"}) ratios.header.push_back(n);
  std::vector<std::vector<std::string>> rows(states.size());
  parallel_for(states.size(), [&](std::size_t i) {
    if (states[i].t < 1.0 || !(recs[i].xtilde > 0.0)) return;
    const HypEllSplit s = split(states[i]);
    std::vector<std::string> r{f(states[i].t), f(recs[i].xtilde)};
    for (int k = 0; k < 4; ++k) {
      const PointwiseRatios p = check_pointwise_bounds(s, recs[i].xtilde, k, weight_limit(cfg));
      r.push_back(f(p.hyp));
      r.push_back(f(p.ell));
    }
    const auto l2 = check_l2_bounds(s, recs[i].xtilde, weight_limit(cfg));
    for (const char* n : {"hyp_weighted", "hyp_J", "ell_weighted"}) r.push_back(f(l2.at(n)));
    rows[i] = std::move(r);
  });
  for (auto& r : rows)
    if (!r.empty()) ratios.add_row(std::move(r));
  write_csv(dir / "bound_ratios.csv", ratios);
  arts.push_back({"bound_ratios.csv", "table"});

  // plots
  PlotSpec decay;
  decay.title = "decay of sup|u| and weighted constants";
  decay.xlabel = "t";
  decay.ylabel = "value";
  decay.log_x = decay.log_y = true;
  PlotSeries sup{"sup |u|", {}, {}, true};
  std::vector<PlotSeries> cs;
  for (int k = 0; k < 4; ++k) cs.push_back({"C" + std::to_string(k), {}, {}, true});
  for (const auto& r : recs) {
    if (r.t < 1.0) continue;
    sup.x.push_back(r.t);
    sup.y.push_back(r.sup);
    for (std::size_t k = 0; k < 4; ++k) {
      cs[k].x.push_back(r.t);
      cs[k].y.push_back(r.decay_constants[k]);
    }
  }
  decay.series.push_back(sup);
  for (auto& c : cs) decay.series.push_back(c);
  write_svg(dir / "decay.svg", decay);
  arts.push_back({"decay.svg", "plot"});

  const FieldState& last = states.back();
  if (last.t >= 1.0) {
    const RegionMask m = region_masks(last.u.grid, last.t);
    PlotSpec reg;
    reg.title = "u at t = " + format_double(last.t) + " with region masks";
    reg.xlabel = "x";
    reg.ylabel = "u";
    PlotSeries u{"u", {}, {}, false};
    const std::size_t stride = std::max<std::size_t>(1, last.u.size() / 4000);
    for (std::size_t n = 0; n < last.u.size(); n += stride) {
      u.x.push_back(last.u.grid.x(n));
      u.y.push_back(last.u[n]);
    }
    reg.series.push_back(u);
    const double L = last.u.grid.half_length;
    reg.bands.push_back({-L, -m.threshold, "#d62728", "oscillatory"});
    reg.bands.push_back({-m.threshold, m.threshold, "#2ca02c", "self-similar"});
    reg.bands.push_back({m.threshold, L, "#1f77b4", "decaying"});
    write_svg(dir / "regions.svg", reg);
    arts.push_back({"regions.svg", "plot"});
  }
  record_artifacts(dir, "analyze", arts);
  for (const auto& r : fits.rows)
    log << r[0] << " k=" << r[1] << " [" << r[2] << "] slope " << r[4] << "\n";
  return kExitOk;
}

// --- packet ---------------------------------------------------------------------

int cmd_packet(const fs::path& dir, const PacketOptions& opts, std::ostream& log, std::ostream& err) {
  RunInputs in;
  if (auto code = load_run(dir, in, err, 6)) return *code;
  const SimConfig& cfg = in.cfg;
  std::vector<FieldState> all = load_states(in.metas);
  std::vector<FieldState> states;
  std::optional<FieldState> initial;
  for (auto& s : all) {
    if (s.t == cfg.t0) initial = s;
    if (s.t >= 1.0) states.push_back(std::move(s));
  }
  if (states.size() < 6 || states.back().t < 10.0 * states.front().t * (1.0 - 1e-9)) {
    err << "error: missing inputs: need >= 6 snapshots with t >= 1 spanning a decade in t\n";
    return kExitMissing;
  }
  const double t_first = states.front().t, t_last = states.back().t;
  const GridSpec& g = states.front().u.grid;
  VelocityRange range = resolved_velocity_range(t_first, t_last, std::min(g.half_length, weight_limit(cfg)),
                                                cfg.cutoff_wavenumber(), 10.0, cfg.sponge.enabled ? 0.85 : 0.95);
  if (opts.vmin) range.vmin = *opts.vmin;
  if (opts.vmax) range.vmax = *opts.vmax;
  if (!(range.vmax >= range.vmin && range.vmin > 0.0)) {
    err << "config error: empty velocity range [" << range.vmin << ", " << range.vmax << "]\n";
    return kExitConfig;
  }
  const std::vector<double> vs = velocity_grid(range.vmin, range.vmax, std::max<std::size_t>(1, opts.nv));
  const std::size_t nt = states.size(), nv = vs.size();

  // gamma[t][v]; reference gamma from the exact linear flow of the initial snapshot
  std::vector<std::vector<std::optional<PacketSample>>> gam(nt, std::vector<std::optional<PacketSample>>(nv));
  std::vector<std::vector<std::optional<PacketSample>>> ref(nt, std::vector<std::optional<PacketSample>>(nv));
  parallel_for(nt, [&](std::size_t i) {
    std::optional<FieldState> lin;
    if (initial) lin = FieldState::from_spectral(states[i].t, linear_propagate(initial->spectrum, states[i].t - initial->t));
    for (std::size_t j = 0; j < nv; ++j) {
      try {
        gam[i][j] = gamma(states[i], vs[j]);
        if (lin) ref[i][j] = gamma(*lin, vs[j]);
      } catch (const std::exception&) {
        // packet support outside the admissible window at this (t, v)
      }
    }
  });
  std::vector<Artifact> arts;

  CsvTable samples;
  samples.header = {"t", "v", "xi_v", "lambda", "resolution", "gamma_re", "gamma_im", "gamma_abs", "gamma_arg"};
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < nv; ++j)
      if (const auto& p = gam[i][j])
        samples.add_row({f(p->t), f(p->v), f(p->xi_v), f(p->lambda), f(packet_resolution(p->t, p->v)), f(p->gamma.real()),
                         f(p->gamma.imag()), f(std::abs(p->gamma)), f(std::arg(p->gamma))});
  write_csv(dir / "packet_samples.csv", samples);
  arts.push_back({"packet_samples.csv", "table"});

  CsvTable phase;
  phase.header = {"v", "xi_v", "samples", "fitted_slope", "predicted_slope", "relative_error", "mean_modulus",
                  "unwrap_ok", "referenced_slope", "referenced_relative_error"};
  CsvTable ode;
  ode.header = {"t", "v", "residual", "residual_over_amplitude"};
  PlotSpec phase_plot;
  phase_plot.title = "arg gamma(t, v)";
  phase_plot.xlabel = "t";
  phase_plot.ylabel = "unwrapped arg gamma - arg gamma(t_first)";
  phase_plot.log_x = true;
  const double eps = cfg.initial.amplitude;
  for (std::size_t j = 0; j < nv; ++j) {
    std::vector<PacketSample> series, rseries;
    for (std::size_t i = 0; i < nt; ++i)
      if (gam[i][j]) {
        series.push_back(*gam[i][j]);
        if (ref[i][j]) rseries.push_back(*ref[i][j]);
      }
    if (series.size() < 3) continue;
    for (const auto& r : gamma_ode_residual(series, cfg.alpha))
      ode.add_row({f(r.t), f(r.v), f(r.residual), f(eps > 0 ? r.residual / eps : r.residual)});
    PlotSeries ps{"xi_v = " + format_double(packet_frequency(vs[j])).substr(0, 6), {}, {}, true};
    double base = std::arg(series.front().gamma), prev = base, acc = 0;
    for (const auto& s : series) {
      double d = std::arg(s.gamma) - prev;
      d -= 2 * std::numbers::pi * std::round(d / (2 * std::numbers::pi));
      acc += d;
      prev = std::arg(s.gamma);
      ps.x.push_back(s.t);
      ps.y.push_back(acc);
    }
    phase_plot.series.push_back(ps);
    if (series.size() < 6 || series.back().t < 10.0 * series.front().t * (1.0 - 1e-9)) continue;
    const bool with_ref = rseries.size() == series.size();
    const PhaseFit fit = phase_law_fit(series, cfg.alpha, with_ref ? std::span<const PacketSample>(rseries) : std::span<const PacketSample>{});
    const double rr = fit.referenced_slope && fit.prediction != 0.0
                          ? std::abs(*fit.referenced_slope - fit.prediction) / std::abs(fit.prediction)
                          : 0.0;
    phase.add_row({f(vs[j]), f(packet_frequency(vs[j])), std::to_string(series.size()), f(fit.slope), f(fit.prediction),
                   f(fit.relative_error), f(fit.mean_modulus), format_bool(fit.unwrap_ok),
                   fit.referenced_slope ? f(*fit.referenced_slope) : "", fit.referenced_slope ? f(rr) : ""});
  }
  write_csv(dir / "phase_law.csv", phase);
  write_csv(dir / "gamma_ode_residual.csv", ode);
  write_svg(dir / "phase.svg", phase_plot);
  arts.push_back({"phase_law.csv", "table"});
  arts.push_back({"gamma_ode_residual.csv", "table"});
  arts.push_back({"phase.svg", "plot"});

  // W from both sides at every snapshot
  CsvTable cross;
  cross.header = {"t", "points", "sup_abs", "sup_rel", "l2_abs", "weighted_sup", "spectrum_symmetry_defect", "W_l2"};
  CsvTable wtab;
  wtab.header = {"source", "t", "xi", "W_re", "W_im", "W_abs"};
  const double xi_cut = cfg.cutoff_wavenumber();
  ScatteringProfile last_packet, last_spec;
  for (std::size_t i = 0; i < nt; ++i) {
    std::vector<PacketSample> at;
    for (std::size_t j = 0; j < nv; ++j)
      if (gam[i][j]) at.push_back(*gam[i][j]);
    const ScatteringProfile sp = extract_W_spectrum(states[i], cfg.alpha, xi_cut);
    if (at.empty() || sp.xi.size() < 2) continue;
    const ScatteringProfile pp = packet_profile(at, cfg.alpha);
    try {
      const WDiscrepancy d = cross_check_W(pp, sp);
      cross.add_row({f(states[i].t), std::to_string(d.points), f(d.sup_abs), f(d.sup_rel), f(d.l2_abs), f(d.weighted_sup),
                     f(sp.symmetry_defect()), f(sp.l2_norm())});
    } catch (const std::invalid_argument& e) {
      err << "warning: t = " << states[i].t << ": " << e.what() << "\n";
    }
    last_packet = pp;
    last_spec = sp;
  }
  for (std::size_t k = 0; k < last_packet.xi.size(); ++k)
    wtab.add_row({"packet", f(last_packet.t), f(last_packet.xi[k]), f(last_packet.W[k].real()), f(last_packet.W[k].imag()),
                  f(std::abs(last_packet.W[k]))});
  for (std::size_t k = 0; k < last_spec.xi.size(); ++k)
    if (last_spec.xi[k] > 0)
      wtab.add_row({"spectrum", f(last_spec.t), f(last_spec.xi[k]), f(last_spec.W[k].real()), f(last_spec.W[k].imag()),
                    f(std::abs(last_spec.W[k]))});
  write_csv(dir / "W_crosscheck.csv", cross);
  write_csv(dir / "W_profiles.csv", wtab);
  arts.push_back({"W_crosscheck.csv", "table"});
  arts.push_back({"W_profiles.csv", "table"});

  PlotSpec wplot;
  wplot.title = "|W(xi)| at t = " + format_double(last_spec.t);
  wplot.xlabel = "xi";
  wplot.ylabel = "|W|";
  PlotSeries ws{"spectrum", {}, {}, false}, wp{"packets", {}, {}, true};
  for (std::size_t k = 0; k < last_spec.xi.size(); ++k)
    if (last_spec.xi[k] > 0 && last_spec.xi[k] <= 1.2 * (last_packet.xi.empty() ? xi_cut : last_packet.xi.back())) {
      ws.x.push_back(last_spec.xi[k]);
      ws.y.push_back(std::abs(last_spec.W[k]));
    }
  for (std::size_t k = 0; k < last_packet.xi.size(); ++k) {
    wp.x.push_back(last_packet.xi[k]);
    wp.y.push_back(std::abs(last_packet.W[k]));
  }
  wplot.series = {ws, wp};
  write_svg(dir / "W.svg", wplot);
  arts.push_back({"W.svg", "plot"});

  // physical-space approximation at vt
  CsvTable phys;
  phys.header = {"t", "v", "k", "raw", "reference", "weighted", "bound_scale"};
  std::vector<std::vector<std::vector<std::string>>> prow(nt);
  parallel_for(nt, [&](std::size_t i) {
    const double xt = xtilde_norm(states[i], weight_limit(cfg));
    for (std::size_t j = 0; j < nv; ++j) {
      if (!gam[i][j]) continue;
      for (int k = 0; k < 4; ++k) {
        const PhysicalResidual r = physical_approx_check(states[i], vs[j], k);
        prow[i].push_back({f(states[i].t), f(vs[j]), std::to_string(k), f(r.raw), f(r.reference), f(r.weighted),
                           f(std::pow(states[i].t, -0.1) * xt)});
      }
    }
  });
  for (auto& rows : prow)
    for (auto& r : rows) phys.add_row(std::move(r));
  write_csv(dir / "physical_check.csv", phys);
  arts.push_back({"physical_check.csv", "table"});

  record_artifacts(dir, "packet", arts);
  for (const auto& r : phase.rows) log << "v = " << r[0] << "  slope " << r[3] << "  predicted " << r[4] << "\n";
  return kExitOk;
}

// --- selfsim --------------------------------------------------------------------

int cmd_selfsim(const fs::path& dir, const SelfsimOptions& opts, std::ostream& log, std::ostream& err) {
  RunInputs in;
  if (auto code = load_run(dir, in, err, 3)) return *code;
  const SimConfig& cfg = in.cfg;
  std::vector<FieldState> all = load_states(in.metas);
  double mass = 0.0;
  {
    const FieldState& s0 = all.front();
    mass = s0.spectrum.coeffs[0].real() * s0.u.grid.dx();
  }
  std::vector<FieldState> late;
  for (auto& s : all)
    if (s.t >= 1.0) late.push_back(std::move(s));
  if (late.size() < 3) {
    err << "error: missing inputs: need >= 3 snapshots with t >= 1\n";
    return kExitMissing;
  }
  const std::vector<double> y = uniform_grid(opts.ymax, std::max<std::size_t>(opts.ny, 64));
  ProfileExtraction ex;
  try {
    ex = extract_Q(late, y);
  } catch (const std::out_of_range& e) {
    err << "config error: " << e.what() << " (reduce --ymax)\n";
    return kExitConfig;
  }
  const bool linear = cfg.alpha == 0.0 && cfg.beta == 0.0;
  std::vector<Artifact> arts;

  CsvTable cert;
  cert.header = {"t", "certificate", "ode_residual", "sup"};
  for (const auto& s : late) {
    const Profile u = rescale(s, y);
    const auto it = std::find(ex.times.begin(), ex.times.end(), s.t);
    const std::string c = it == ex.times.end() ? f(0.0) : f(ex.certificates[static_cast<std::size_t>(it - ex.times.begin())]);
    cert.add_row({f(s.t), c, f(ode_residual_Q(u, cfg.alpha, cfg.beta)), f(u.sup())});
  }
  write_csv(dir / "selfsim_certificates.csv", cert);
  arts.push_back({"selfsim_certificates.csv", "table"});

  CsvTable q;
  q.header = {"y", "Q"};
  Profile q0p;
  if (linear) {
    q.header.insert(q.header.end(), {"Q0", "mass_times_Q0", "abs_diff"});
    q0p = linear_profile_Q0(y, std::max(10.0, opts.ymax));
  }
  const std::vector<double> resid = ode_residual_field(ex.Q, cfg.alpha, cfg.beta);
  q.header.push_back("ode_residual");
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::vector<std::string> r{f(y[i]), f(ex.Q.values[i])};
    if (linear) {
      const double m = mass * q0p.values[i];
      r.insert(r.end(), {f(q0p.values[i]), f(m), f(std::abs(ex.Q.values[i] - m))});
      if (std::abs(y[i]) <= 2.0) worst = std::max(worst, std::abs(ex.Q.values[i] - m));
    }
    r.push_back(f(resid[i]));
    q.add_row(std::move(r));
  }
  write_csv(dir / "q_profile.csv", q);
  arts.push_back({"q_profile.csv", "table"});

  nlohmann::json rep = {{"t_profile", *ex.Q.t_source},
                        {"converging", ex.converging},
                        {"ode_residual", ode_residual_Q(ex.Q, cfg.alpha, cfg.beta)},
                        {"sup", ex.Q.sup()},
                        {"mass", mass}};
  if (linear) rep["max_abs_diff_mass_Q0_y_le_2"] = worst;
  {
    std::ofstream o(dir / "selfsim_report.json");
    o << rep.dump(2) << "\n";
  }
  arts.push_back({"selfsim_report.json", "report"});

  PlotSpec plot;
  plot.title = "self-similar profile at t = " + format_double(*ex.Q.t_source);
  plot.xlabel = "y";
  plot.ylabel = "U(t, y)";
  PlotSeries qs{"Q", y, ex.Q.values, false};
  plot.series.push_back(qs);
  if (linear) {
    PlotSeries m{"(int u0) Q0", y, {}, false};
    for (double v : q0p.values) m.y.push_back(mass * v);
    plot.series.push_back(m);
  }
  write_svg(dir / "q_profile.svg", plot);
  arts.push_back({"q_profile.svg", "plot"});
  record_artifacts(dir, "selfsim", arts);

  if (!ex.converging) err << "warning: self-similar sequence is not converging monotonically\n";
  log << "Q extracted at t = " << *ex.Q.t_source << ", residual " << rep["ode_residual"].get<double>() << ", converging "
      << (ex.converging ? "yes" : "no") << "\n";
  return kExitOk;
}

}  // namespace fmkdv
