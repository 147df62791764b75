#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include <openssl/evp.h>

#include "gasnet/ensemble.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/metrics.hpp"
#include "gasnet/simulate.hpp"
#include "gasnet/solver.hpp"

namespace gasnet {

inline constexpr const char* artifact_version = "1.0.0";

/// Shortest round-trip decimal, independent of the locale.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Collects written files so the manifest can list them with checksums.
class OutputDir {
public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
      throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& path() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << content;
    out.close();
    if (!out) throw IoError("write failed for '" + p.string() + "'");
    files_.push_back({name, sha256_hex(content), content.size()});
  }

  struct Entry {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  const std::vector<Entry>& files() const { return files_; }

private:
  std::filesystem::path dir_;
  std::vector<Entry> files_;
};

/// Long format: time_s, node_id, pressure_Pa.
inline std::string pressure_csv(const Trajectory& tr) {
  std::string s = "time_s,node_id,pressure_Pa\n";
  for (std::size_t k = 0; k < tr.samples(); ++k)
    for (std::size_t n = 0; n < tr.node_ids.size(); ++n)
      s += fmt(tr.times[k]) + "," + std::to_string(tr.node_ids[n]) + "," + fmt(tr.pressure[k][n]) + "\n";
  return s;
}

/// Wide format: time_s, linepack_kg_pipe_<id>..., linepack_kg_total.
inline std::string linepack_csv(const Trajectory& tr) {
  std::string s = "time_s";
  for (int id : tr.pipe_ids) s += ",linepack_kg_pipe_" + std::to_string(id);
  s += ",linepack_kg_total\n";
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    s += fmt(tr.times[k]);
    for (double v : tr.linepack[k]) s += "," + fmt(v);
    s += "," + fmt(tr.total[k]) + "\n";
  }
  return s;
}

inline std::string crossings_csv(const std::vector<CrossingEvent>& ev) {
  std::string s = "node_id,time_s,pressure_Pa,direction\n";
  for (const auto& e : ev) s += std::to_string(e.node) + "," + fmt(e.time) + "," + fmt(e.pressure) + ",below_min\n";
  return s;
}

inline std::string quantile_csv(const EnsembleStats& st, const QuantileSeries& q) {
  std::string s = "time_s,q125,q375,median,q625,q875,replicas\n";
  for (std::size_t k = 0; k < q.q.size(); ++k) {
    s += fmt(st.times[k]);
    for (double v : q.q[k]) s += "," + fmt(v);
    s += "," + std::to_string(q.count[k]) + "\n";
  }
  return s;
}

inline nlohmann::json optional_seconds(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json trajectory_meta_json(const TrajectoryMeta& m) {
  return {{"seed", m.seed},
          {"scenario_id", m.scenario_id},
          {"flags", m.flags},
          {"truncated", m.truncated},
          {"stop_reason", m.stop_reason},
          {"steps", m.steps},
          {"initial_mass_kg", m.initial_mass},
          {"final_mass_kg", m.final_mass},
          {"net_injection_kg", m.exact_injection},
          {"relative_mass_error", std::abs(m.final_mass - m.initial_mass - m.exact_injection) / m.initial_mass},
          {"max_kirchhoff_residual", m.max_kirchhoff}};
}

/// Summary document; contains no timing so reruns compare byte for byte.
inline nlohmann::json ensemble_summary_json(const EnsembleStats& st, const std::vector<std::string>& quantile_files) {
  nlohmann::json taus = nlohmann::json::array();
  for (const auto& t : st.tau.samples) taus.push_back(optional_seconds(t));
  nlohmann::json first = nlohmann::json::object();
  for (const auto& [n, c] : st.tau.first_node_histogram) first[std::to_string(n)] = c;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [n, c] : st.crossing_histogram) hist[std::to_string(n)] = c;
  const bool has_insult = std::isfinite(st.insult_time);
  nlohmann::json tau = {
      {"insult_time_s", has_insult ? nlohmann::json(st.insult_time) : nlohmann::json(nullptr)},
      {"replicas_crossed", st.tau.crossed},
      {"mean_h", st.tau.crossed ? nlohmann::json(units::to_hours(st.tau.mean)) : nlohmann::json(nullptr)},
      {"std_h", st.tau.crossed ? nlohmann::json(units::to_hours(st.tau.stddev)) : nlohmann::json(nullptr)},
      {"median_h", std::isfinite(st.tau.median) ? nlohmann::json(units::to_hours(st.tau.median))
                                                : nlohmann::json("none")},
      {"samples_s", taus},
      {"first_crossing_node_histogram", first}};
  return {{"scenario_id", st.scenario_id},
          {"base_seed", st.base_seed},
          {"replicas", st.replicas},
          {"tau_stats", tau},
          {"crossing_histogram", hist},
          {"truncated_replicas", st.truncated},
          {"max_relative_mass_error", st.max_mass_error},
          {"max_kirchhoff_residual", st.max_kirchhoff},
          {"flags", st.flags},
          {"quantile_files", quantile_files}};
}

inline nlohmann::json solver_config_json(const SolverConfig& c) {
  return {{"target_dx_m", c.target_dx},
          {"cfl", c.cfl},
          {"output_cadence_s", c.output_cadence},
          {"eos_mode", c.eos == EosMode::cnga ? "cnga" : "ideal"},
          {"drift_tolerance", c.drift_tolerance},
          {"collapse_pressure_Pa", c.collapse_pressure}};
}

inline SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig c = {}) {
  try {
    c.target_dx = j.value("target_dx_m", c.target_dx);
    c.cfl = j.value("cfl", c.cfl);
    c.output_cadence = j.value("output_cadence_s", c.output_cadence);
    if (j.contains("eos_mode")) {
      const auto m = j["eos_mode"].get<std::string>();
      if (m == "cnga") c.eos = EosMode::cnga;
      else if (m == "ideal") c.eos = EosMode::ideal;
      else throw ValidationError("eos_mode must be cnga or ideal");
    }
    c.drift_tolerance = j.value("drift_tolerance", c.drift_tolerance);
    c.collapse_pressure = j.value("collapse_pressure_Pa", c.collapse_pressure);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("solver config: ") + e.what());
  }
  c.validate();
  return c;
}

inline SolverConfig load_solver_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open solver config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("solver config '" + path + "': " + e.what());
  }
  return solver_config_from_json(j);
}

/// Hash over the bytes of every input plus the effective solver settings.
inline std::string config_hash(const std::vector<std::string>& input_files, const SolverConfig& cfg,
                               const std::string& extra) {
  std::string blob;
  for (const auto& f : input_files) blob += sha256_hex(read_file(f)) + "\n";
  blob += solver_config_json(cfg).dump() + "\n" + extra;
  return sha256_hex(blob);
}

inline nlohmann::json manifest_json(const OutputDir& out, const std::string& command, const std::string& cfg_hash,
                                    const std::vector<std::uint64_t>& seeds, double wall_seconds) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : out.files()) files.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"artifact_version", artifact_version},
          {"command", command},
          {"config_hash", cfg_hash},
          {"seeds", seeds},
          {"wall_clock_s", wall_seconds},
          {"files", files}};
}

} // namespace gasnet
