#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"
#include "gasnet/scenario.hpp"
#include "gasnet/solver.hpp"
#include "gasnet/steady.hpp"

namespace gasnet {

struct TrajectoryMeta {
  std::uint64_t seed = 0;
  std::string scenario_id;
  std::vector<std::string> flags;
  bool truncated = false;      // stopped early because a node collapsed
  std::string stop_reason;
  long steps = 0;
  double initial_mass = 0.0;   // kg
  double final_mass = 0.0;     // kg
  double injected_mass = 0.0;  // kg, solver's running integral
  double exact_injection = 0.0; // kg, exact integral of the boundary profiles
  double max_kirchhoff = 0.0;  // max relative junction residual over samples
};

/// Sampled run output. pressure[s][n] follows node order of the network,
/// linepack[s][k] its pipe order.
struct Trajectory {
  std::vector<double> times;
  std::vector<int> node_ids;
  std::vector<int> pipe_ids;
  std::vector<std::vector<double>> pressure;
  std::vector<std::vector<double>> linepack;
  std::vector<double> total;
  TrajectoryMeta meta;

  std::size_t samples() const { return times.size(); }
};

namespace detail {

inline void record(Trajectory& tr, const Integrator& integ, bool check_junctions) {
  const auto& net = integ.network();
  const auto& st = integ.state();
  tr.times.push_back(st.time);
  tr.pressure.push_back(integ.node_pressures());
  std::vector<double> lp(net.pipes().size());
  double total = 0.0;
  for (std::size_t k = 0; k < lp.size(); ++k) {
    lp[k] = pipe_mass(st.pipes[k], integ.grids()[k], net.pipes()[k].area());
    total += lp[k];
  }
  tr.linepack.push_back(std::move(lp));
  tr.total.push_back(total);
  if (check_junctions) {
    const auto& w = integ.last_withdrawal();
    for (std::size_t n = 0; n < net.nodes().size(); ++n) {
      const double r = std::abs(integ.junction_residual(n, w[n])) / std::max(std::abs(w[n]), 1.0);
      tr.meta.max_kirchhoff = std::max(tr.meta.max_kirchhoff, r);
    }
  }
}

} // namespace detail

/// Integrates from the initial state to `horizon`, sampling every
/// output_cadence seconds. Steps are shortened to land on sample times.
/// Integration stops early once any node drops below the collapse pressure.
inline Trajectory simulate(const Network& net, const std::vector<PipeGrid>& grids, const SystemState& initial,
                           const BoundarySet& bc, double horizon, const SolverConfig& cfg) {
  cfg.validate();
  if (!(horizon >= 0.0)) throw ValidationError("simulate: horizon must be non-negative");
  Integrator integ(net, grids, initial);
  Trajectory tr;
  for (const auto& n : net.nodes()) tr.node_ids.push_back(n.id);
  for (const auto& p : net.pipes()) tr.pipe_ids.push_back(p.id);
  const double t0 = initial.time;
  tr.meta.initial_mass = total_mass(initial, grids, net);
  detail::record(tr, integ, false);

  const auto n_samples = static_cast<long>(std::floor(horizon / cfg.output_cadence + 1e-9));
  std::vector<double> sample_times;
  for (long s = 1; s <= n_samples; ++s) sample_times.push_back(t0 + static_cast<double>(s) * cfg.output_cadence);
  if (horizon > 0.0 && (sample_times.empty() || sample_times.back() < t0 + horizon - 1e-9))
    sample_times.push_back(t0 + horizon);

  for (double target : sample_times) {
    while (integ.state().time < target) {
      double dt = integ.stable_dt(cfg.cfl);
      const double remaining = target - integ.state().time;
      // Avoid a sliver step right before the sample.
      if (dt >= remaining) dt = remaining;
      else if (dt > 0.5 * remaining) dt = 0.5 * remaining;
      integ.advance(bc, dt);
      ++tr.meta.steps;
    }
    integ.mutable_state().time = target;
    detail::record(tr, integ, true);
    const auto& p = integ.node_pressures();
    const auto low = std::min_element(p.begin(), p.end());
    if (*low < cfg.collapse_pressure) {
      tr.meta.truncated = true;
      std::ostringstream os;
      os << "pressure at node " << net.nodes()[low - p.begin()].id << " fell below the collapse threshold at t = "
         << target << " s";
      tr.meta.stop_reason = os.str();
      break;
    }
  }
  tr.meta.final_mass = total_mass(integ.state(), grids, net);
  tr.meta.injected_mass = integ.state().injected_mass - initial.injected_mass;
  tr.meta.exact_injection = bc.net_injection_integral(t0, tr.times.back());
  return tr;
}

/// Copy of the network whose gas uses the configured closure.
inline Network with_eos(const Network& net, EosMode mode) {
  Network out = net;
  GasProperties g = out.gas();
  g.mode = mode;
  out.set_gas(g);
  return out;
}

/// Compose, initialise at the t = 0 loads and simulate one realisation.
/// `initial` may carry a precomputed steady state for the same scenario.
inline Trajectory run_scenario(const Network& base, const Scenario& sc, std::uint64_t seed, const SolverConfig& cfg,
                               const SystemState* initial = nullptr) {
  const Network net = with_eos(base, cfg.eos);
  const auto grids = discretize(net, cfg.target_dx);
  const auto composed = compose(sc, net, seed);
  const SystemState init = initial ? *initial : steady_state_init(net, grids, composed.nominal, cfg);
  Trajectory tr = simulate(net, grids, init, composed.bc, sc.horizon, cfg);
  tr.meta.seed = seed;
  tr.meta.scenario_id = sc.id;
  tr.meta.flags = composed.flags;
  return tr;
}

/// Steady state for a scenario's t = 0 loads (independent of the seed).
inline SystemState scenario_initial_state(const Network& base, const Scenario& sc, const SolverConfig& cfg) {
  const Network net = with_eos(base, cfg.eos);
  const auto grids = discretize(net, cfg.target_dx);
  return steady_state_init(net, grids, compose(sc, net, 0).nominal, cfg);
}

} // namespace gasnet
