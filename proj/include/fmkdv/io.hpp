#pragma once

// Configuration parsing, snapshot persistence, CSV tables and run manifests.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmkdv/evolve.hpp"

namespace fmkdv {

inline constexpr int kSnapshotSchema = 1;

// Throws ConfigError naming the offending key (dotted path). Unknown keys are errors.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig parse_config_text(const std::string& text);
nlohmann::json config_to_json(const SimConfig& cfg);

std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

struct SnapshotMeta {
  double t = 0.0;
  double L = 0.0;
  std::size_t N = 0;
  double alpha = 0.0;
  double beta = 0.0;
  int schema_version = kSnapshotSchema;
  std::filesystem::path data;     // .f64 payload
  std::filesystem::path sidecar;  // .json
};

// Writes <stem>.f64 (little-endian doubles) and <stem>.json.
SnapshotMeta write_snapshot(const std::filesystem::path& dir, const std::string& stem, const FieldState& state,
                            double alpha, double beta);
SnapshotMeta read_snapshot_meta(const std::filesystem::path& sidecar);
FieldState read_snapshot(const SnapshotMeta& meta);
// Sidecars in dir sorted by t.
std::vector<SnapshotMeta> list_snapshots(const std::filesystem::path& dir);

// RFC 4180 tables; numbers printed with 17 significant digits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;  // throws std::out_of_range
};

std::string format_double(double v);
std::string format_bool(bool v);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

struct Artifact {
  std::string path;  // relative to the run directory
  std::string kind;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::string created_at;
  std::string command;
  std::vector<Artifact> artifacts;
};

std::string utc_timestamp();
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace fmkdv
