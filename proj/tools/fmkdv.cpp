// fmkdv: simulate the fifth-order mKdV-type equation and analyze the runs.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fmkdv/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral simulator and asymptotics harness for u_t - u_xxxxx/5 = d_x N(u)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(FMKDV_VERSION));

  std::string config, out = "run";
  auto* sim = app.add_subcommand("simulate", "integrate a JSON config, writing snapshots and diagnostics");
  sim->add_option("config", config, "config file (JSON)")->required();
  sim->add_option("--out", out, "run directory")->capture_default_str();

  std::string dir;
  auto* ana = app.add_subcommand("analyze", "diagnostics, decay fits, bound ratios and plots");
  ana->add_option("dir", dir, "run directory")->required();

  fmkdv::PacketOptions popt;
  double vmin = 0, vmax = 0;
  auto* pk = app.add_subcommand("packet", "wave-packet tests, phase law and scattering profile");
  pk->add_option("dir", dir, "run directory")->required();
  auto* o_vmin = pk->add_option("--vmin", vmin, "smallest |v|")->check(CLI::PositiveNumber);
  auto* o_vmax = pk->add_option("--vmax", vmax, "largest |v|")->check(CLI::PositiveNumber);
  pk->add_option("--nv", popt.nv, "number of velocities")->check(CLI::PositiveNumber)->capture_default_str();

  fmkdv::SelfsimOptions sopt;
  auto* ss = app.add_subcommand("selfsim", "self-similar profile extraction");
  ss->add_option("dir", dir, "run directory")->required();
  ss->add_option("--ymax", sopt.ymax, "half width of the y window")->check(CLI::PositiveNumber)->capture_default_str();
  ss->add_option("--ny", sopt.ny, "points in the y window")->check(CLI::Range(64, 1 << 20))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fmkdv::kExitConfig;
  }

  try {
    if (*sim) return fmkdv::cmd_simulate(config, out, std::cout, std::cerr);
    if (*ana) return fmkdv::cmd_analyze(dir, std::cout, std::cerr);
    if (*pk) {
      if (*o_vmin) popt.vmin = vmin;
      if (*o_vmax) popt.vmax = vmax;
      return fmkdv::cmd_packet(dir, popt, std::cout, std::cerr);
    }
    if (*ss) return fmkdv::cmd_selfsim(dir, sopt, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
