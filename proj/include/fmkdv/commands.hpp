#pragma once

// Command implementations behind the fmkdv executable. Each returns a process
// exit code: 0 ok, 2 configuration error, 3 blow-up, 4 missing inputs.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>

namespace fmkdv {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitBlowUp = 3, kExitMissing = 4 };

int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& log,
                 std::ostream& err);

int cmd_analyze(const std::filesystem::path& dir, std::ostream& log, std::ostream& err);

struct PacketOptions {
  std::optional<double> vmin;  // |v| magnitudes; defaults from the resolution rule
  std::optional<double> vmax;
  std::size_t nv = 12;
};

int cmd_packet(const std::filesystem::path& dir, const PacketOptions& opts, std::ostream& log, std::ostream& err);

struct SelfsimOptions {
  double ymax = 10.0;
  std::size_t ny = 1025;
};

int cmd_selfsim(const std::filesystem::path& dir, const SelfsimOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace fmkdv
