#include "fmkdv/io.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fmkdv {

namespace fs = std::filesystem;
using nlohmann::json;

// --- configuration ------------------------------------------------------------

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(join(where, it.key()), "unknown key");
}

double number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(where, key), "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(where, key), "must be finite");
  return d;
}

double required_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(join(where, key), "missing required key");
  return number(obj, where, key, 0.0);
}

std::vector<double> snapshot_list(const json& v) {
  const std::string where = "snapshot_times";
  std::vector<double> ts;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where, "entries must be numbers");
      ts.push_back(e.get<double>());
    }
    return ts;
  }
  reject_unknown(v, where, {"start", "stop", "count", "spacing"});
  const double a = required_number(v, where, "start");
  const double b = required_number(v, where, "stop");
  if (!v.contains("count") || !v.at("count").is_number_integer() || v.at("count").get<long>() < 1)
    throw ConfigError(join(where, "count"), "must be a positive integer");
  const long n = v.at("count").get<long>();
  std::string spacing = "log";
  if (v.contains("spacing")) {
    if (!v.at("spacing").is_string()) throw ConfigError(join(where, "spacing"), "must be \"log\" or \"linear\"");
    spacing = v.at("spacing").get<std::string>();
  }
  if (spacing != "log" && spacing != "linear") throw ConfigError(join(where, "spacing"), "must be \"log\" or \"linear\"");
  if (spacing == "log" && !(a > 0.0 && b > 0.0)) throw ConfigError(where, "log spacing needs positive start and stop");
  for (long i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    ts.push_back(spacing == "log" ? a * std::pow(b / a, s) : a + (b - a) * s);
  }
  // keep the endpoints exact
  if (n > 1) ts.back() = b;
  return ts;
}

}  // namespace

SimConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"alpha", "beta", "grid", "t0", "t_final", "dt", "cfl", "dt_max", "dealias_fraction",
                           "initial", "sponge", "snapshot_times"});
  SimConfig c;
  c.alpha = number(doc, "", "alpha", 0.0);
  c.beta = number(doc, "", "beta", 0.0);

  if (!doc.contains("grid")) throw ConfigError("grid", "missing required key");
  const json& g = doc.at("grid");
  reject_unknown(g, "grid", {"L", "N"});
  c.grid.half_length = required_number(g, "grid", "L");
  if (!g.contains("N") || !g.at("N").is_number_integer() || g.at("N").get<long long>() <= 0)
    throw ConfigError("grid.N", "must be a positive integer");
  c.grid.n_points = static_cast<std::size_t>(g.at("N").get<long long>());

  c.t0 = number(doc, "", "t0", 0.0);
  c.t_final = required_number(doc, "", "t_final");
  if (doc.contains("dt")) {
    const json& d = doc.at("dt");
    if (d.is_string()) {
      if (d.get<std::string>() != "auto") throw ConfigError("dt", "must be a positive number or \"auto\"");
    } else if (d.is_number()) {
      c.dt = d.get<double>();
    } else {
      throw ConfigError("dt", "must be a positive number or \"auto\"");
    }
  }
  c.cfl = number(doc, "", "cfl", c.cfl);
  c.dt_max = number(doc, "", "dt_max", c.dt_max);
  c.dealias_fraction = number(doc, "", "dealias_fraction", c.dealias_fraction);

  if (doc.contains("initial")) {
    const json& in = doc.at("initial");
    reject_unknown(in, "initial", {"kind", "amplitude", "width", "center", "samples"});
    std::string kind = "gaussian";
    if (in.contains("kind")) {
      if (!in.at("kind").is_string()) throw ConfigError("initial.kind", "must be a string");
      kind = in.at("kind").get<std::string>();
    }
    if (kind == "gaussian")
      c.initial.kind = InitialDatum::Kind::gaussian;
    else if (kind == "sech")
      c.initial.kind = InitialDatum::Kind::sech;
    else if (kind == "custom")
      c.initial.kind = InitialDatum::Kind::custom;
    else
      throw ConfigError("initial.kind", "must be gaussian, sech or custom");
    c.initial.amplitude = number(in, "initial", "amplitude", c.initial.amplitude);
    c.initial.width = number(in, "initial", "width", c.initial.width);
    c.initial.center = number(in, "initial", "center", c.initial.center);
    if (in.contains("samples")) {
      if (!in.at("samples").is_array()) throw ConfigError("initial.samples", "must be an array of numbers");
      for (const auto& e : in.at("samples")) {
        if (!e.is_number()) throw ConfigError("initial.samples", "must be an array of numbers");
        c.initial.samples.push_back(e.get<double>());
      }
    }
    if (c.initial.kind == InitialDatum::Kind::custom && c.initial.samples.empty())
      throw ConfigError("initial.samples", "required for kind custom");
  }

  if (doc.contains("sponge")) {
    const json& s = doc.at("sponge");
    reject_unknown(s, "sponge", {"enabled", "strength", "fraction"});
    if (s.contains("enabled")) {
      if (!s.at("enabled").is_boolean()) throw ConfigError("sponge.enabled", "must be a boolean");
      c.sponge.enabled = s.at("enabled").get<bool>();
    }
    c.sponge.strength = number(s, "sponge", "strength", c.sponge.strength);
    c.sponge.fraction = number(s, "sponge", "fraction", c.sponge.fraction);
  }

  if (doc.contains("snapshot_times")) c.snapshot_times = snapshot_list(doc.at("snapshot_times"));
  c.validate();
  return c;
}

SimConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const SimConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["grid"] = {{"L", c.grid.half_length}, {"N", c.grid.n_points}};
  j["t0"] = c.t0;
  j["t_final"] = c.t_final;
  if (c.dt)
    j["dt"] = *c.dt;
  else
    j["dt"] = "auto";
  j["cfl"] = c.cfl;
  j["dt_max"] = c.dt_max;
  j["dealias_fraction"] = c.dealias_fraction;
  const char* kinds[] = {"gaussian", "sech", "custom"};
  json in = {{"kind", kinds[static_cast<int>(c.initial.kind)]},
             {"amplitude", c.initial.amplitude},
             {"width", c.initial.width},
             {"center", c.initial.center}};
  if (c.initial.kind == InitialDatum::Kind::custom) in["samples"] = c.initial.samples;
  j["initial"] = in;
  j["sponge"] = {{"enabled", c.sponge.enabled}, {"strength", c.sponge.strength}, {"fraction", c.sponge.fraction}};
  j["snapshot_times"] = c.snapshot_times;
  return j;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// --- snapshots ------------------------------------------------------------------

namespace {

void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_le(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

SnapshotMeta write_snapshot(const fs::path& dir, const std::string& stem, const FieldState& state, double alpha,
                            double beta) {
  SnapshotMeta m;
  m.t = state.t;
  m.L = state.u.grid.half_length;
  m.N = state.u.grid.n_points;
  m.alpha = alpha;
  m.beta = beta;
  m.data = dir / (stem + ".f64");
  m.sidecar = dir / (stem + ".json");
  {
    std::ofstream out(m.data, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + m.data.string());
    for (double v : state.u.samples) put_le(out, v);
    if (!out) throw std::runtime_error("write failed: " + m.data.string());
  }
  json side = {{"t", m.t}, {"L", m.L}, {"N", m.N}, {"alpha", alpha}, {"beta", beta}, {"schema_version", kSnapshotSchema},
               {"data", m.data.filename().string()}};
  write_text(m.sidecar, side.dump(2) + "\n");
  return m;
}

SnapshotMeta read_snapshot_meta(const fs::path& sidecar) {
  const json j = json::parse(read_file(sidecar));
  SnapshotMeta m;
  try {
    m.t = j.at("t").get<double>();
    m.L = j.at("L").get<double>();
    m.N = j.at("N").get<std::size_t>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.schema_version = j.at("schema_version").get<int>();
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed snapshot sidecar " + sidecar.string() + ": " + e.what());
  }
  if (m.schema_version != kSnapshotSchema) throw std::runtime_error("unsupported snapshot schema in " + sidecar.string());
  m.sidecar = sidecar;
  const std::string data = j.contains("data") ? j.at("data").get<std::string>() : sidecar.stem().string() + ".f64";
  m.data = sidecar.parent_path() / data;
  return m;
}

FieldState read_snapshot(const SnapshotMeta& m) {
  const std::string bytes = read_file(m.data);
  if (bytes.size() != 8 * m.N) throw std::runtime_error("snapshot payload size mismatch: " + m.data.string());
  const GridSpec g = make_grid(m.L, m.N);
  RealField u(g);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t n = 0; n < m.N; ++n) u[n] = get_le(p + 8 * n);
  return FieldState::from_physical(m.t, std::move(u));
}

std::vector<SnapshotMeta> list_snapshots(const fs::path& dir) {
  std::vector<SnapshotMeta> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto& p = e.path();
    if (p.extension() != ".json" || p.filename().string().rfind("snap_", 0) != 0) continue;
    out.push_back(read_snapshot_meta(p));
  }
  std::sort(out.begin(), out.end(), [](const SnapshotMeta& a, const SnapshotMeta& b) { return a.t < b.t; });
  return out;
}

// --- CSV ------------------------------------------------------------------------

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::invalid_argument("csv row width differs from header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("no csv column " + name);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << quote(cells[i]);
    os << "\r\n";
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  write_text(path, os.str());
}

CsvTable read_csv(const fs::path& path) {
  const std::string s = read_file(path);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(cell);
      cell.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        rec.push_back(cell);
        records.push_back(rec);
      }
      rec.clear();
      cell.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quote in " + path.string());
  if (any || !cell.empty()) {
    rec.push_back(cell);
    records.push_back(rec);
  }
  if (records.empty()) throw std::runtime_error("empty csv " + path.string());
  CsvTable t;
  t.header = records.front();
  for (std::size_t i = 1; i < records.size(); ++i) t.add_row(records[i]);
  return t;
}

// --- manifest -------------------------------------------------------------------

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  json arts = json::array();
  for (const auto& a : m.artifacts) arts.push_back({{"path", a.path}, {"kind", a.kind}});
  json j = {{"config_hash", m.config_hash}, {"version", m.version}, {"created_at", m.created_at},
            {"command", m.command}, {"artifacts", arts}};
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& dir) {
  const json j = json::parse(read_file(dir / "manifest.json"));
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.created_at = j.at("created_at").get<std::string>();
  m.command = j.value("command", "");
  for (const auto& a : j.at("artifacts")) m.artifacts.push_back({a.at("path").get<std::string>(), a.at("kind").get<std::string>()});
  return m;
}

}  // namespace fmkdv
