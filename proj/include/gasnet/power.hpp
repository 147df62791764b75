#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "gasnet/csv.hpp"
#include "gasnet/eos.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/profile.hpp"

namespace gasnet {

/// Turbine efficiency as a function of load fraction, linear between rows.
class EfficiencyCurve {
public:
  EfficiencyCurve() = default;
  EfficiencyCurve(std::vector<double> load, std::vector<double> eta) : load_(std::move(load)), eta_(std::move(eta)) {
    if (load_.empty() || load_.size() != eta_.size())
      throw ValidationError("efficiency curve: need equal, non-empty load/efficiency columns");
    for (std::size_t k = 0; k < load_.size(); ++k) {
      if (!(eta_[k] > 0.0 && eta_[k] <= 1.0))
        throw ValidationError("efficiency curve: efficiency at load " + std::to_string(load_[k]) + " outside (0, 1]");
      if (k > 0 && !(load_[k] > load_[k - 1]))
        throw ValidationError("efficiency curve: load fractions must be strictly increasing");
    }
  }

  double min_load() const { return load_.front(); }
  double max_load() const { return load_.back(); }

  /// Efficiency at `load`; loads outside the table are clamped and reported
  /// through `clamped`.
  double operator()(double load, bool* clamped = nullptr) const {
    const bool out = load < load_.front() || load > load_.back();
    if (clamped) *clamped = out;
    const double x = std::clamp(load, load_.front(), load_.back());
    auto it = std::upper_bound(load_.begin(), load_.end(), x);
    if (it == load_.end()) return eta_.back();
    const std::size_t j = static_cast<std::size_t>(it - load_.begin());
    if (j == 0) return eta_.front();
    const double w = (x - load_[j - 1]) / (load_[j] - load_[j - 1]);
    return eta_[j - 1] + w * (eta_[j] - eta_[j - 1]);
  }

private:
  std::vector<double> load_;
  std::vector<double> eta_;
};

inline EfficiencyCurve load_efficiency_curve(const std::string& path) {
  const auto t = read_csv(path);
  const auto cl = t.column("load_fraction");
  const auto ce = t.column("efficiency");
  std::vector<double> load, eta;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    load.push_back(t.number(r, cl));
    eta.push_back(t.number(r, ce));
  }
  return EfficiencyCurve(load, eta);
}

/// Gas mass flow [kg/s] burnt to deliver `power_mw` at efficiency `eta`.
inline double gas_flow_for_power(double power_mw, double eta, const GasProperties& gas) {
  if (!(eta > 0.0)) throw ValidationError("power_to_gas: efficiency must be positive");
  return power_mw / (eta * gas.energy_density); // MW = MJ/s
}

struct PowerSeries {
  int node = 0;
  double capacity_mw = 0.0; // rated output; load fraction = P / capacity
  std::vector<double> times; // s
  std::vector<double> power; // MW
};

/// Gas withdrawal profile for one unit, held constant over each interval.
/// `clamped` counts samples whose load fell outside the curve.
inline Profile power_to_gas(const PowerSeries& s, const EfficiencyCurve& curve, const GasProperties& gas,
                            int* clamped = nullptr) {
  if (!(s.capacity_mw > 0.0)) throw ValidationError("power_to_gas: unit capacity must be positive");
  std::vector<double> q(s.power.size());
  int n_clamped = 0;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (!(s.power[k] >= 0.0)) throw ValidationError("power_to_gas: negative power sample");
    bool c = false;
    const double eta = curve(s.power[k] / s.capacity_mw, &c);
    if (c && s.power[k] > 0.0) ++n_clamped;
    q[k] = gas_flow_for_power(s.power[k], eta, gas);
  }
  if (clamped) *clamped = n_clamped;
  return Profile::from_samples(s.node, s.times, q, Interpolation::step);
}

namespace detail {

// Seconds since 1970-01-01 for "YYYY-MM-DD[T ]hh:mm[:ss]"; plain numbers
// are taken as seconds.
inline double parse_timestamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  const int got = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec);
  if (got >= 6 && (sep == 'T' || sep == ' ')) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ValidationError("invalid date in timestamp '" + s + "'");
    const auto days = sys_days(ymd).time_since_epoch().count();
    return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError("unparseable timestamp '" + s + "'");
  return v;
}

} // namespace detail

struct UnitInfo {
  int node = 0;
  double capacity_mw = 0.0;
};

/// Reads `timestamp, unit_id, power_MW` rows and groups them per unit. Times
/// are rebased so the earliest timestamp in the file is t = 0.
inline std::vector<PowerSeries> read_power_csv(const std::string& path, const std::map<std::string, UnitInfo>& units) {
  const auto t = read_csv(path);
  const auto ct = t.column("timestamp");
  const auto cu = t.column("unit_id");
  const auto cp = t.column("power_MW");
  std::map<std::string, std::vector<std::pair<double, double>>> by_unit;
  double t0 = INFINITY;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double ts = detail::parse_timestamp(t.rows[r][ct]);
    t0 = std::min(t0, ts);
    by_unit[t.rows[r][cu]].emplace_back(ts, t.number(r, cp));
  }
  std::vector<PowerSeries> out;
  for (auto& [unit, samples] : by_unit) {
    auto it = units.find(unit);
    if (it == units.end()) throw ValidationError(path + ": unit '" + unit + "' has no entry in the units table");
    std::sort(samples.begin(), samples.end());
    PowerSeries s;
    s.node = it->second.node;
    s.capacity_mw = it->second.capacity_mw;
    for (const auto& [ts, p] : samples) {
      if (!s.times.empty() && ts - t0 <= s.times.back())
        throw ValidationError(path + ": duplicate timestamp for unit '" + unit + "'");
      s.times.push_back(ts - t0);
      s.power.push_back(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// `unit_id, node_id, capacity_MW` table.
inline std::map<std::string, UnitInfo> read_units_csv(const std::string& path) {
  const auto t = read_csv(path);
  const auto cu = t.column("unit_id");
  const auto cn = t.column("node_id");
  const auto cc = t.column("capacity_MW");
  std::map<std::string, UnitInfo> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out[t.rows[r][cu]] = {static_cast<int>(t.number(r, cn)), t.number(r, cc)};
  return out;
}

} // namespace gasnet
