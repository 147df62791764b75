#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "gasnet/csv.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"
#include "gasnet/noise.hpp"
#include "gasnet/profile.hpp"
#include "gasnet/solver.hpp"
#include "gasnet/steady.hpp"
#include "gasnet/units.hpp"

namespace gasnet {

enum class InsultKind { full_loss, fraction_loss, ramp_down, offset };

/// s(t) -> s(t) + H(t - start) Gamma(t) on one node's own profile (the
/// supply for supply nodes, the withdrawal for demand nodes).
struct Insult {
  int node = 0;
  double start = 0.0;               // s
  InsultKind kind = InsultKind::full_loss;
  double fraction = 1.0;            // fraction_loss, ramp_down
  double ramp = 3600.0;             // s, ramp_down duration
  double offset = 0.0;              // kg/s, offset
};

enum class ControlKind { supply_step, demand_curtail };

struct ControlAction {
  ControlKind kind = ControlKind::supply_step;
  std::vector<int> nodes;
  double start = 0.0;    // s
  double delta = 0.0;    // kg/s, supply_step
  bool to_max = false;   // supply_step: jump to the node's max flow-rate
  double factor = 1.0;   // demand_curtail multiplier in [0, 1]
};

inline Profile apply_insult(const Profile& s, const Insult& ins) {
  if (ins.node != s.node())
    throw ValidationError("insult for node " + std::to_string(ins.node) + " applied to profile of node " +
                          std::to_string(s.node()));
  const Profile g = Profile::gate(s.start(), ins.start);
  switch (ins.kind) {
    case InsultKind::full_loss:
      return Profile::combine(s, g, [](double a, double h) { return a + h * -a; });
    case InsultKind::fraction_loss: {
      const double f = ins.fraction;
      if (f == 0.0) return s;
      return Profile::combine(s, g, [f](double a, double h) { return a + h * (-f * a); });
    }
    case InsultKind::ramp_down: {
      if (!(ins.ramp > 0.0)) throw ValidationError("ramp_down insult needs a positive ramp duration");
      const double f = ins.fraction;
      // 0 before start, rising linearly to 1 over the ramp.
      const Profile r = ins.start > s.start()
                            ? Profile::from_samples(s.node(), {s.start(), ins.start, ins.start + ins.ramp},
                                                    {0.0, 0.0, 1.0}, Interpolation::linear)
                            : Profile::from_samples(s.node(), {ins.start, ins.start + ins.ramp}, {0.0, 1.0},
                                                    Interpolation::linear);
      // The product of two linear pieces is quadratic; sub-breakpoints keep
      // the chord error small.
      std::vector<double> extra;
      for (double t = ins.start + 300.0; t < ins.start + ins.ramp; t += 300.0) extra.push_back(t);
      return Profile::combine(s, r, [f](double a, double h) { return a + h * (-f * a); }, extra);
    }
    case InsultKind::offset: {
      const double d = ins.offset;
      if (d == 0.0) return s;
      return Profile::combine(s, g, [d](double a, double h) { return a + h * d; });
    }
  }
  return s;
}

/// Applies one control to a node profile. Supply steps are clipped at
/// `max_flow`; `clipped` reports whether the cap was active.
inline Profile apply_control(const Profile& p, const ControlAction& c, double max_flow, bool& clipped) {
  clipped = false;
  const Profile g = Profile::gate(p.start(), c.start);
  if (c.kind == ControlKind::supply_step) {
    if (c.to_max) {
      if (!std::isfinite(max_flow))
        throw ValidationError("supply_step to max at node " + std::to_string(p.node()) + " needs max_flow_kg_s");
      return Profile::combine(p, g, [max_flow](double a, double h) { return h == 0.0 ? a : max_flow; });
    }
    if (c.delta == 0.0) return p;
    const double dq = c.delta;
    Profile out = Profile::combine(p, g, [dq](double a, double h) { return a + h * dq; });
    if (std::isfinite(max_flow)) out = out.clip_above(max_flow, clipped);
    return out;
  }
  if (!(c.factor >= 0.0 && c.factor <= 1.0)) throw ValidationError("curtailment factor must lie in [0, 1]");
  if (c.factor == 1.0) return p;
  const double cut = 1.0 - c.factor;
  return Profile::combine(p, g, [cut](double a, double h) { return a * (1.0 - h * cut); });
}

/// Diurnal sinusoid around a daily mean, optionally scaled per weekday.
/// shape(t) = b + (1 - b) (1 + A sin(w (t - peak + 6 h))), so the shape is
/// at its mean at peak - 6 h and peaks at `peak_hour`.
struct SyntheticWeek {
  double mean_total = 500.0;      // kg/s, mean total demand
  double amplitude = 0.25;        // relative swing of the weather/power part
  double peak_hour = 18.0;
  double baseload_fraction = 0.1; // flat non-electric part
  double weekday_modulation = 0.0;
  double cadence = 1800.0;        // s between breakpoints
  std::map<int, double> demand_shares;

  double shape(double t) const {
    const double w = 2.0 * units::pi / 86400.0;
    const double diurnal = 1.0 + amplitude * std::sin(w * (t - units::hours(peak_hour - 6.0)));
    return day_factor(t) * (baseload_fraction + (1.0 - baseload_fraction) * diurnal);
  }

  // Weekdays run 1 + 0.4 m, weekends 1 - m; the weekly mean is one.
  double day_factor(double t) const {
    const auto day = static_cast<long>(std::floor(t / 86400.0)) % 7;
    return day >= 5 ? 1.0 - weekday_modulation : 1.0 + 0.4 * weekday_modulation;
  }

  Profile demand(int node, double horizon) const {
    const double share = demand_shares.at(node);
    std::vector<double> t, v;
    const auto n = static_cast<long>(std::ceil(horizon / cadence));
    for (long k = 0; k <= n; ++k) {
      const double tk = static_cast<double>(k) * cadence;
      t.push_back(tk);
      v.push_back(share * mean_total * shape(tk));
    }
    return Profile::from_samples(node, t, v, Interpolation::linear);
  }
};

struct SupplySpec {
  int node = 0;
  double share = 0.0; // fraction of the mean total demand
  double max_flow = std::numeric_limits<double>::infinity();
};

/// Flux boundary data for one run. Supply and demand profiles are positive
/// mass flows; the withdrawal seen by the solver is demand - supply.
struct Scenario {
  std::string id;
  std::string description;
  double horizon = 0.0; // s
  int reference_node = 0;
  double reference_pressure = 70e5;
  std::map<int, Profile> supply;
  std::map<int, Profile> demand;
  std::map<int, double> max_flow;
  NoiseSpec noise;
  std::vector<Insult> insults;
  std::vector<ControlAction> controls;

  double first_insult_time() const {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& i : insults) t = std::min(t, i.start);
    return t;
  }

  void validate(const Network& net) const {
    if (!(horizon >= 0.0)) throw ValidationError("scenario " + id + ": horizon must be non-negative");
    if (!net.has_node(reference_node))
      throw ValidationError("scenario " + id + ": unknown reference node " + std::to_string(reference_node));
    auto check = [&](int node, NodeKind want, const std::string& what) {
      if (!net.has_node(node))
        throw ValidationError("scenario " + id + ": " + what + " references unknown node " + std::to_string(node));
      if (net.nodes()[net.node_index(node)].kind != want)
        throw ValidationError("scenario " + id + ": " + what + " at node " + std::to_string(node) + " needs a " +
                              to_string(want) + " node");
    };
    for (const auto& [n, p] : supply) {
      check(n, NodeKind::supply, "supply profile");
      if (p.start() > 0.0) throw ValidationError("scenario " + id + ": supply profile at node " + std::to_string(n) + " starts after t = 0");
    }
    for (const auto& [n, p] : demand) {
      check(n, NodeKind::demand, "demand profile");
      if (p.start() > 0.0) throw ValidationError("scenario " + id + ": demand profile at node " + std::to_string(n) + " starts after t = 0");
    }
    for (const auto& [n, m] : max_flow) {
      check(n, NodeKind::supply, "max flow-rate");
      if (!(m > 0.0)) throw ValidationError("scenario " + id + ": max flow-rate must be positive");
    }
    for (const auto& i : insults) {
      if (!supply.count(i.node) && !demand.count(i.node))
        throw ValidationError("scenario " + id + ": insult at node " + std::to_string(i.node) + " which has no profile");
      if (!(i.start >= 0.0 && i.start <= horizon))
        throw ValidationError("scenario " + id + ": insult time outside the horizon");
    }
    for (const auto& c : controls) {
      for (int n : c.nodes) {
        if (c.kind == ControlKind::supply_step) check(n, NodeKind::supply, "supply_step");
        else check(n, NodeKind::demand, "demand_curtail");
        const bool has = c.kind == ControlKind::supply_step ? supply.count(n) != 0 : demand.count(n) != 0;
        if (!has) throw ValidationError("scenario " + id + ": control at node " + std::to_string(n) + " which has no profile");
      }
      if (c.nodes.empty()) throw ValidationError("scenario " + id + ": control without nodes");
    }
    noise.validate();
  }
};

struct ComposedBoundary {
  BoundarySet bc;
  SteadyLoads nominal;            // loads at t = 0, for initialisation
  std::vector<std::string> flags; // e.g. clipped supply steps
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("compose[") + name + "]: " + e.what());
  }
}

} // namespace detail

/// base -> noise (demands only) -> insults -> controls -> withdrawal.
inline ComposedBoundary compose(const Scenario& sc, const Network& net, std::uint64_t seed) {
  detail::stage("validate", [&] { sc.validate(net); return 0; });
  ComposedBoundary out;
  auto supply = sc.supply;
  auto demand = sc.demand;

  detail::stage("base", [&] {
    double s0 = 0.0, d0 = 0.0;
    for (const auto& [n, p] : supply) s0 += p(0.0);
    for (const auto& [n, p] : demand) d0 += p(0.0);
    if (s0 <= 0.0 && d0 > 0.0) throw ValidationError("demand at t = 0 but no supply");
    if (s0 > 0.0 && std::abs(s0 - d0) > 1e-12 * std::max(s0, d0)) {
      const double scale = d0 / s0;
      for (auto& [n, p] : supply) p = p.map([scale](double v) { return v * scale; });
      out.flags.push_back("supplies rescaled by " + std::to_string(scale) + " to balance t = 0 demand");
    }
    out.nominal.reference_node = sc.reference_node;
    out.nominal.reference_pressure = sc.reference_pressure;
    for (const auto& [n, p] : supply) out.nominal.supply[n] = p(0.0);
    for (const auto& [n, p] : demand) out.nominal.demand[n] = p(0.0);
    return 0;
  });

  detail::stage("noise", [&] {
    const auto& ns = sc.noise;
    if (ns.kind == NoiseKind::none) return 0;
    for (auto& [n, p] : demand) {
      if (ns.kind == NoiseKind::ou) {
        double gamma = ns.gamma;
        if (gamma < 0.0) {
          const double mu = p.integral(0.0, std::max(sc.horizon, p.end())) / std::max(sc.horizon, p.end());
          gamma = mu > 0.0 ? calibrate_ou(mu, ns.variance_ratio, ns.alpha) : 0.0;
        }
        p = ou_sample_path(p, ns.alpha, gamma, ns.dt, seed, sc.horizon);
      } else {
        p = uniform_noise(p, ns.width_fraction, ns.dt, seed, sc.horizon);
      }
    }
    return 0;
  });

  detail::stage("insults", [&] {
    for (const auto& ins : sc.insults) {
      auto& target = supply.count(ins.node) ? supply : demand;
      target.at(ins.node) = apply_insult(target.at(ins.node), ins);
    }
    return 0;
  });

  detail::stage("controls", [&] {
    for (const auto& c : sc.controls) {
      for (int n : c.nodes) {
        auto& target = c.kind == ControlKind::supply_step ? supply : demand;
        auto it = sc.max_flow.find(n);
        const double cap = it == sc.max_flow.end() ? std::numeric_limits<double>::infinity() : it->second;
        bool clipped = false;
        target.at(n) = apply_control(target.at(n), c, cap, clipped);
        if (clipped) out.flags.push_back("supply step at node " + std::to_string(n) + " clipped at max flow-rate");
      }
    }
    return 0;
  });

  for (auto& [n, p] : demand) out.bc.withdrawal[n] = p.simplified();
  for (auto& [n, p] : supply) {
    const Profile w = p.map([](double v) { return -v; });
    auto it = out.bc.withdrawal.find(n);
    if (it == out.bc.withdrawal.end()) out.bc.withdrawal[n] = w.simplified();
    else it->second = (it->second + w).simplified();
  }
  return out;
}

namespace detail {

inline InsultKind parse_insult_kind(const std::string& s) {
  if (s == "full_loss") return InsultKind::full_loss;
  if (s == "fraction_loss") return InsultKind::fraction_loss;
  if (s == "ramp_down") return InsultKind::ramp_down;
  if (s == "offset") return InsultKind::offset;
  throw ValidationError("unknown insult kind '" + s + "'");
}

inline Interpolation parse_interpolation(const std::string& s) {
  if (s == "step") return Interpolation::step;
  if (s == "linear") return Interpolation::linear;
  throw ValidationError("unknown interpolation '" + s + "'");
}

inline std::vector<int> node_list(const nlohmann::json& j, const Network& net, NodeKind all_kind) {
  std::vector<int> out;
  if (j.is_string()) {
    if (j.get<std::string>() != "all") throw ValidationError("node list must be an array or \"all\"");
    for (const auto& n : net.nodes())
      if (n.kind == all_kind) out.push_back(n.id);
    return out;
  }
  if (j.is_number_integer()) return {j.get<int>()};
  for (const auto& v : j) out.push_back(v.get<int>());
  return out;
}

} // namespace detail

/// Scenario from its JSON document; CSV references resolve against `base_dir`.
inline Scenario scenario_from_json(const nlohmann::json& doc, const Network& net, const std::filesystem::path& base_dir) {
  try {
    Scenario sc;
    sc.id = doc.value("id", "scenario");
    sc.description = doc.value("description", "");
    sc.horizon = units::hours(doc.at("horizon_h").get<double>());
    const auto init = doc.value("initial", nlohmann::json::object());
    sc.reference_node = init.value("reference_node", net.nodes().front().id);
    sc.reference_pressure = units::bar(init.value("reference_pressure_bar", 70.0));

    const auto base = doc.value("base_profiles", nlohmann::json::object());
    double mean_total = 0.0;
    if (base.contains("synthetic_week")) {
      const auto& j = base["synthetic_week"];
      SyntheticWeek w;
      w.mean_total = j.at("mean_total_kg_s").get<double>();
      w.amplitude = j.value("amplitude", w.amplitude);
      w.peak_hour = j.value("peak_hour", w.peak_hour);
      w.baseload_fraction = j.value("baseload_fraction", w.baseload_fraction);
      w.weekday_modulation = j.value("weekday_modulation", w.weekday_modulation);
      w.cadence = 60.0 * j.value("cadence_min", w.cadence / 60.0);
      if (!(w.mean_total > 0.0 && w.cadence > 0.0)) throw ValidationError("synthetic_week: mean and cadence must be positive");
      double share_sum = 0.0;
      for (const auto& [k, v] : j.at("demand_shares").items()) {
        w.demand_shares[std::stoi(k)] = v.get<double>();
        share_sum += v.get<double>();
      }
      if (std::abs(share_sum - 1.0) > 1e-9) throw ValidationError("synthetic_week: demand shares must sum to 1");
      for (const auto& [n, s] : w.demand_shares) sc.demand[n] = w.demand(n, std::max(sc.horizon, 86400.0));
      mean_total = w.mean_total;
    }
    if (base.contains("inline")) {
      for (const auto& j : base["inline"]) {
        const int node = j.at("node").get<int>();
        std::vector<double> t;
        for (double h : j.at("times_h").get<std::vector<double>>()) t.push_back(units::hours(h));
        auto p = Profile::from_samples(node, t, j.at("values_kg_s").get<std::vector<double>>(),
                                       detail::parse_interpolation(j.value("interpolation", "linear")));
        (j.value("role", "demand") == "supply" ? sc.supply : sc.demand)[node] = p;
      }
    }
    if (base.contains("csv")) {
      for (const auto& j : base["csv"]) {
        const auto path = base_dir / j.at("path").get<std::string>();
        const auto t = read_csv(path.string());
        const auto ct = t.column("time_s"), cn = t.column("node_id"), cq = t.column("mass_flow_kg_s");
        std::map<int, std::pair<std::vector<double>, std::vector<double>>> cols;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          auto& c = cols[static_cast<int>(t.number(r, cn))];
          c.first.push_back(t.number(r, ct));
          c.second.push_back(t.number(r, cq));
        }
        const auto mode = detail::parse_interpolation(j.value("interpolation", "step"));
        auto& target = j.value("role", "demand") == "supply" ? sc.supply : sc.demand;
        for (auto& [n, c] : cols) {
          auto p = Profile::from_samples(n, c.first, c.second, mode);
          auto it = target.find(n);
          if (it == target.end()) target[n] = p;
          else it->second = it->second + p;
        }
      }
    }
    if (mean_total == 0.0) {
      const double span = std::max(sc.horizon, 86400.0);
      for (const auto& [n, p] : sc.demand) mean_total += p.integral(0.0, span) / span;
    }
    if (base.contains("supplies")) {
      for (const auto& j : base["supplies"]) {
        const int node = j.at("node").get<int>();
        const double q = j.contains("flow_kg_s") ? j["flow_kg_s"].get<double>() : j.at("share").get<double>() * mean_total;
        sc.supply[node] = Profile::constant(node, q);
        if (j.contains("max_flow_kg_s")) sc.max_flow[node] = j["max_flow_kg_s"].get<double>();
        if (j.contains("max_flow_factor")) sc.max_flow[node] = j["max_flow_factor"].get<double>() * q;
      }
    }

    if (doc.contains("noise")) {
      const auto& j = doc["noise"];
      const std::string kind = j.value("kind", "none");
      if (kind == "ou") sc.noise.kind = NoiseKind::ou;
      else if (kind == "uniform") sc.noise.kind = NoiseKind::uniform;
      else if (kind == "none") sc.noise.kind = NoiseKind::none;
      else throw ValidationError("unknown noise kind '" + kind + "'");
      sc.noise.alpha = j.value("alpha_per_s", sc.noise.alpha);
      sc.noise.gamma = j.value("gamma", sc.noise.gamma);
      sc.noise.variance_ratio = j.value("variance_ratio", sc.noise.variance_ratio);
      sc.noise.width_fraction = j.value("width_fraction", sc.noise.width_fraction);
      sc.noise.dt = j.value("dt_s", sc.noise.dt);
      sc.noise.seed = j.value("seed", std::uint64_t{0});
    }
    for (const auto& j : doc.value("insults", nlohmann::json::array())) {
      Insult ins;
      ins.node = j.at("node").get<int>();
      ins.start = units::hours(j.at("start_h").get<double>());
      ins.kind = detail::parse_insult_kind(j.value("kind", "full_loss"));
      ins.fraction = j.value("fraction", 1.0);
      ins.ramp = units::hours(j.value("ramp_h", 1.0));
      ins.offset = j.value("offset_kg_s", 0.0);
      sc.insults.push_back(ins);
    }
    for (const auto& j : doc.value("controls", nlohmann::json::array())) {
      ControlAction c;
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "supply_step") c.kind = ControlKind::supply_step;
      else if (kind == "demand_curtail") c.kind = ControlKind::demand_curtail;
      else throw ValidationError("unknown control kind '" + kind + "'");
      c.nodes = detail::node_list(j.at("nodes"), net,
                                  c.kind == ControlKind::supply_step ? NodeKind::supply : NodeKind::demand);
      c.start = units::hours(j.at("start_h").get<double>());
      c.delta = j.value("delta_kg_s", 0.0);
      c.to_max = j.value("to_max", false);
      c.factor = j.value("factor", 1.0);
      sc.controls.push_back(c);
    }
    sc.validate(net);
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario file: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario file '" + path + "': " + e.what());
  }
  return scenario_from_json(doc, net, std::filesystem::path(path).parent_path());
}

} // namespace gasnet
