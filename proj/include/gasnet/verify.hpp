#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gasnet/eos.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/metrics.hpp"
#include "gasnet/network.hpp"
#include "gasnet/scenario.hpp"
#include "gasnet/simulate.hpp"
#include "gasnet/solver.hpp"
#include "gasnet/steady.hpp"

namespace gasnet {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

/// Max relative round-trip error of the closure over rho in [0.1, 100].
inline double eos_roundtrip_error(const GasProperties& gas, int samples = 2000) {
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double rho = 0.1 * std::pow(1000.0, static_cast<double>(i) / samples);
    const double back = density_from_pressure(pressure_from_density(rho, gas), gas);
    worst = std::max(worst, std::abs(back - rho) / rho);
  }
  return worst;
}

/// Two-node network with one pipe; node 1 supplies, node 2 withdraws.
inline Network single_pipe_network(double length, double diameter, double friction, const GasProperties& gas) {
  std::vector<Node> nodes{{1, "in", NodeKind::supply, 1e5, 200e5, 0.0}, {2, "out", NodeKind::demand, 1e5, 200e5, 0.0}};
  std::vector<Pipe> pipes{{1, 1, 2, length, diameter, friction}};
  return Network(nodes, pipes, gas);
}

struct SteadyPipeCase {
  double mass_flow; // kg/s
  double length;    // m
  double diameter;  // m
};

inline const std::vector<SteadyPipeCase>& steady_pipe_cases() {
  static const std::vector<SteadyPipeCase> c{{100.0, 50e3, 0.6}, {300.0, 80e3, 0.914}, {30.0, 20e3, 0.445}};
  return c;
}

/// Relative mismatch of p_in^2 - p_out^2 against (lambda L / D) R T phi|phi|
/// for the relaxed discrete steady state in ideal-gas mode.
inline double steady_pipe_error(const SteadyPipeCase& c, const SolverConfig& cfg = {}) {
  GasProperties gas;
  gas.mode = EosMode::ideal;
  const double friction = 0.01;
  const auto net = single_pipe_network(c.length, c.diameter, friction, gas);
  const auto grids = discretize(net, cfg.target_dx);
  SteadyLoads loads;
  loads.supply[1] = c.mass_flow;
  loads.demand[2] = c.mass_flow;
  loads.reference_node = 1;
  loads.reference_pressure = 70e5;
  const auto st = steady_state_init(net, grids, loads, cfg);
  const double p_in = pressure_from_density(st.node_rho[0], gas);
  const double p_out = pressure_from_density(st.node_rho[1], gas);
  const double phi = c.mass_flow / net.pipes()[0].area();
  const double exact = friction * c.length / c.diameter * gas.rt() * phi * std::abs(phi);
  return std::abs((p_in * p_in - p_out * p_out) - exact) / exact;
}

struct RefinementResult {
  std::vector<int> cells;
  std::vector<double> differences; // L2 norms of successive level differences
  double order = 0.0;
};

/// Single-pipe refinement study with dx and dt reduced together by 3 per
/// level. The outlet withdrawal rises smoothly by 20% over `period`; the
/// density fields at `period` are compared after averaging fine cells onto
/// the coarse grid.
inline RefinementResult refinement_study(int coarse_cells = 10, int levels = 3) {
  GasProperties gas;
  const double length = 20e3, diameter = 0.6, q0 = 150.0, period = 3600.0;
  const auto net = single_pipe_network(length, diameter, 0.01, gas);
  SolverConfig cfg;
  cfg.max_relax_hours = 200;
  cfg.drift_tolerance = 1e-12;

  // d(t) = q0 (1 + 0.2 sin^2(pi t / period)) sampled finely; the same data
  // drive every level.
  std::vector<double> t, w;
  for (int k = 0; k <= 3600; ++k) {
    const double tk = period * k / 3600.0;
    const double s = std::sin(units::pi * tk / period);
    t.push_back(tk);
    w.push_back(q0 * (1.0 + 0.2 * s * s));
  }
  BoundarySet bc;
  bc.withdrawal[1] = Profile::constant(1, -q0);
  bc.withdrawal[2] = Profile::from_samples(2, t, w, Interpolation::linear);

  SteadyLoads loads;
  loads.supply[1] = q0;
  loads.demand[2] = q0;
  loads.reference_node = 1;
  loads.reference_pressure = 70e5;

  RefinementResult r;
  std::vector<std::vector<double>> fields;
  int steps = 0;
  for (int lvl = 0; lvl < levels; ++lvl) {
    const int n = coarse_cells * static_cast<int>(std::pow(3, lvl));
    std::vector<PipeGrid> grids{{0, n, length / n, length}};
    SystemState st = steady_state_init(net, grids, loads, cfg);
    Integrator integ(net, grids, st);
    if (lvl == 0) steps = static_cast<int>(std::ceil(period / integ.stable_dt(0.5)));
    else steps *= 3;
    const double dt = period / steps;
    for (int k = 0; k < steps; ++k) integ.advance(bc, dt);
    r.cells.push_back(n);
    fields.push_back(integ.state().pipes[0].rho);
  }
  for (int lvl = 0; lvl + 1 < levels; ++lvl) {
    const auto& c = fields[lvl];
    const auto& f = fields[lvl + 1];
    double ss = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double avg = (f[3 * i] + f[3 * i + 1] + f[3 * i + 2]) / 3.0;
      ss += (c[i] - avg) * (c[i] - avg);
    }
    r.differences.push_back(std::sqrt(ss / static_cast<double>(c.size())));
  }
  const std::size_t m = r.differences.size();
  r.order = std::log(r.differences[m - 2] / r.differences[m - 1]) / std::log(3.0);
  return r;
}

/// Runs the same noiseless scenario under a mild and a severe insult.
inline MonotonicityReport run_monotonicity_pair(const Network& net, Scenario sc, const std::optional<Insult>& mild,
                                                const Insult& severe, const SolverConfig& cfg) {
  sc.noise.kind = NoiseKind::none;
  sc.controls.clear();
  Scenario a = sc, b = sc;
  a.insults.clear();
  if (mild) a.insults.push_back(*mild);
  b.insults = {severe};
  const auto ca = compose(a, net, 0);
  const auto cb = compose(b, net, 0);
  const auto init = scenario_initial_state(net, sc, cfg);
  const auto ta = run_scenario(net, a, 0, cfg, &init);
  const auto tb = run_scenario(net, b, 0, cfg, &init);
  return check_monotonicity(ta, tb, ca.bc, cb.bc, severe.start);
}

struct MonotonicityOutcome {
  std::string name;
  MonotonicityReport report;
};

/// The three ordered severity pairs at node 1: full vs half loss, instant
/// vs one-hour ramp, insult vs none.
inline std::vector<MonotonicityOutcome> monotonicity_suite(const Network& net, const Scenario& base, double insult_time,
                                                           const SolverConfig& cfg) {
  Insult full{1, insult_time, InsultKind::full_loss};
  Insult half{1, insult_time, InsultKind::fraction_loss, 0.5};
  Insult ramp{1, insult_time, InsultKind::ramp_down, 1.0, 3600.0};
  std::vector<MonotonicityOutcome> out;
  out.push_back({"full vs half supply loss", run_monotonicity_pair(net, base, half, full, cfg)});
  out.push_back({"instant vs 1 h ramp-down", run_monotonicity_pair(net, base, ramp, full, cfg)});
  out.push_back({"insult vs no insult", run_monotonicity_pair(net, base, std::nullopt, full, cfg)});
  return out;
}

/// Built-in battery behind `gasnet verify`.
inline std::vector<CheckResult> verification_battery(const Network& net, const Scenario& insult_scenario,
                                                     const SolverConfig& cfg) {
  std::vector<CheckResult> out;
  {
    const double e = eos_roundtrip_error(net.gas());
    out.push_back({"eos round trip (max relative error)", e < 1e-9, e, 1e-9, "rho in [0.1, 100] kg/m^3"});
  }
  for (const auto& c : steady_pipe_cases()) {
    const double e = steady_pipe_error(c, cfg);
    std::ostringstream os;
    os << "m = " << c.mass_flow << " kg/s, L = " << c.length / 1e3 << " km, D = " << c.diameter << " m";
    out.push_back({"steady pipe vs p^2 relation", e < 5e-3, e, 5e-3, os.str()});
  }
  {
    const auto r = refinement_study();
    std::ostringstream os;
    os << "cells";
    for (int n : r.cells) os << " " << n;
    os << ", differences";
    for (double d : r.differences) os << " " << d;
    out.push_back({"observed convergence order", r.order >= 1.8, r.order, 1.8, os.str()});
  }
  {
    const auto tr = run_scenario(net, insult_scenario, insult_scenario.noise.seed, cfg);
    const auto& m = tr.meta;
    const double e = std::abs(m.final_mass - m.initial_mass - m.exact_injection) / m.initial_mass;
    out.push_back({"mass conservation (relative)", e < 1e-9, e, 1e-9, "scenario " + insult_scenario.id});
    out.push_back({"junction Kirchhoff residual", m.max_kirchhoff < 1e-6, m.max_kirchhoff, 1e-6,
                   "scenario " + insult_scenario.id});
  }
  for (const auto& m : monotonicity_suite(net, insult_scenario, insult_scenario.first_insult_time(), cfg)) {
    const double tol = 1e-6 * units::pascal_per_bar;
    const bool ok = m.report.pressures_ordered(tol) && m.report.taus_ordered();
    std::ostringstream os;
    os << "max p_severe - p_mild " << m.report.max_violation << " Pa";
    if (m.report.max_violation > 0.0) os << " at node " << m.report.worst_node << ", t = " << m.report.worst_time << " s";
    os << "; tau severe " << (m.report.tau_severe ? units::to_hours(*m.report.tau_severe) : -1.0) << " h, mild "
       << (m.report.tau_mild ? units::to_hours(*m.report.tau_mild) : -1.0) << " h";
    out.push_back({"monotonicity: " + m.name, ok, units::to_bar(m.report.max_violation), 1e-6, os.str()});
  }
  return out;
}

} // namespace gasnet
