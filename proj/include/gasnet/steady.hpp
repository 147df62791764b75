#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "gasnet/eos.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"
#include "gasnet/solver.hpp"

namespace gasnet {

/// Balanced nodal loads for initialisation. Both maps hold positive mass
/// flows [kg/s]; the reference node's pressure anchors the solution.
struct SteadyLoads {
  std::map<int, double> supply;
  std::map<int, double> demand;
  int reference_node = 0;
  double reference_pressure = 70e5; // Pa

  // Net withdrawal per node (demand minus supply).
  double withdrawal(int node) const {
    double w = 0.0;
    if (auto it = demand.find(node); it != demand.end()) w += it->second;
    if (auto it = supply.find(node); it != supply.end()) w -= it->second;
    return w;
  }
};

namespace detail {

inline double drho_dp(double p, const GasProperties& gas) {
  const double beta = gas.beta();
  if (p <= units::atmospheric_pressure || beta == 0.0) return 1.0 / gas.rt();
  return (1.0 + 2.0 * beta * p - beta * units::atmospheric_pressure) / gas.rt();
}

// Solves x + k / (rho_prev + weight * rho(x)) = target for the branch
// continuous with zero flow (the upstream root).
inline double steady_cell_pressure(double target, double k, double rho_prev, double weight, const GasProperties& gas) {
  double x = target;
  for (int it = 0; it < 100; ++it) {
    const double rho = density_from_pressure(std::max(x, 0.0), gas);
    const double den = rho_prev + weight * rho;
    const double f = x + k / den - target;
    const double df = 1.0 - k * weight * drho_dp(x, gas) / (den * den);
    if (!(df > 0.0)) break;
    const double next = x - f / df;
    if (!(next > 0.0)) break;
    if (std::abs(next - x) <= 1e-15 * x) return next;
    x = next;
  }
  const double rho = density_from_pressure(std::max(x, 0.0), gas);
  if (x > 0.0 && std::abs(x + k / (rho_prev + weight * rho) - target) <= 1e-9 * target) return x;
  throw NumericalError("steady march: pipe flow exceeds what the pressure level can carry");
}

} // namespace detail

/// Discrete steady profile of one pipe carrying mass flow q from its
/// from-node at pressure p_from. Consistent with the time stepper: a state
/// built from it is a fixed point of Integrator::advance.
struct PipeMarch {
  double p_end = 0.0;
  std::vector<double> rho;
};

inline PipeMarch march_pipe(const Pipe& pipe, const PipeGrid& grid, double p_from, double q, const GasProperties& gas) {
  const double phi = q / pipe.area();
  const double c = pipe.friction * phi * std::abs(phi) / (2.0 * pipe.diameter);
  const double dx = grid.dx;
  PipeMarch out;
  out.rho.resize(grid.n_cells);
  double p = detail::steady_cell_pressure(p_from, 0.5 * dx * c, 0.0, 1.0, gas);
  out.rho[0] = density_from_pressure(p, gas);
  for (int i = 1; i < grid.n_cells; ++i) {
    p = detail::steady_cell_pressure(p, 2.0 * dx * c, out.rho[i - 1], 1.0, gas);
    out.rho[i] = density_from_pressure(p, gas);
  }
  out.p_end = p - 0.5 * dx * c / out.rho.back();
  if (!(out.p_end > 0.0)) throw NumericalError("steady march: non-positive outlet pressure");
  return out;
}

namespace detail {

// Squared-pressure warm start: successive linearisation of
// p_from^2 - p_to^2 = K q|q| with Z frozen at the reference pressure.
inline void warm_start(const Network& net, const SteadyLoads& loads, std::vector<double>& p, std::vector<double>& q) {
  const auto& gas = net.gas();
  const std::size_t nn = net.nodes().size();
  const std::size_t np = net.pipes().size();
  const std::size_t ref = net.node_index(loads.reference_node);
  const double zbar = cnga_z(loads.reference_pressure, gas);

  double wmax = 0.0;
  for (const auto& n : net.nodes()) wmax = std::max(wmax, std::abs(loads.withdrawal(n.id)));
  const double floor_q = 1e-3 * wmax + 1e-9;

  std::vector<double> K(np);
  for (std::size_t k = 0; k < np; ++k) {
    const auto& pp = net.pipes()[k];
    const double s = pp.area();
    K[k] = pp.friction * pp.length * zbar * gas.rt() / (pp.diameter * s * s);
  }
  q.assign(np, std::max(wmax, 1.0));
  std::vector<double> pi(nn, loads.reference_pressure * loads.reference_pressure);

  for (int it = 0; it < 200; ++it) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nn, nn);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nn);
    std::vector<double> g(np);
    for (std::size_t k = 0; k < np; ++k) {
      g[k] = 1.0 / (K[k] * std::max(std::abs(q[k]), floor_q));
      const std::size_t i = net.from_index(k), j = net.to_index(k);
      A(i, i) += g[k]; A(j, j) += g[k];
      A(i, j) -= g[k]; A(j, i) -= g[k];
    }
    for (std::size_t n = 0; n < nn; ++n) b(n) = -loads.withdrawal(net.nodes()[n].id);
    A.row(ref).setZero();
    A(ref, ref) = 1.0;
    b(ref) = loads.reference_pressure * loads.reference_pressure;
    const Eigen::VectorXd x = A.partialPivLu().solve(b);
    double change = 0.0;
    for (std::size_t k = 0; k < np; ++k) {
      const double qn = g[k] * (x(net.from_index(k)) - x(net.to_index(k)));
      change = std::max(change, std::abs(qn - q[k]) / (std::abs(qn) + floor_q));
      q[k] = 0.5 * (q[k] + qn);
    }
    for (std::size_t n = 0; n < nn; ++n) pi[n] = x(n);
    if (change < 1e-8) break;
  }
  p.resize(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    if (!(pi[n] > 0.0)) throw NumericalError("steady init: loads infeasible at the reference pressure");
    p[n] = std::sqrt(pi[n]);
  }
}

} // namespace detail

/// Newton solve of the discrete steady network: per pipe the marched outlet
/// pressure must match the to-node pressure, per node (except the
/// reference) the flows must balance the loads.
inline void solve_steady_network(const Network& net, const std::vector<PipeGrid>& grids, const SteadyLoads& loads,
                                 std::vector<double>& p, std::vector<double>& q) {
  const auto& gas = net.gas();
  const std::size_t nn = net.nodes().size();
  const std::size_t np = net.pipes().size();
  const std::size_t ref = net.node_index(loads.reference_node);

  std::vector<std::size_t> unknown_nodes;
  for (std::size_t n = 0; n < nn; ++n)
    if (n != ref) unknown_nodes.push_back(n);
  const std::size_t nz = unknown_nodes.size() + np;

  double qscale = 1.0;
  for (const auto& n : net.nodes()) qscale = std::max(qscale, std::abs(loads.withdrawal(n.id)));
  const double pscale = 1e5;

  auto unpack = [&](const Eigen::VectorXd& z, std::vector<double>& pn, std::vector<double>& qk) {
    pn.assign(nn, loads.reference_pressure);
    for (std::size_t i = 0; i < unknown_nodes.size(); ++i) pn[unknown_nodes[i]] = z(i) * pscale;
    qk.resize(np);
    for (std::size_t k = 0; k < np; ++k) qk[k] = z(unknown_nodes.size() + k) * qscale;
  };
  auto residual = [&](const Eigen::VectorXd& z) {
    std::vector<double> pn, qk;
    unpack(z, pn, qk);
    Eigen::VectorXd r(nz);
    for (std::size_t k = 0; k < np; ++k) {
      const auto m = march_pipe(net.pipes()[k], grids[k], pn[net.from_index(k)], qk[k], gas);
      r(k) = (m.p_end - pn[net.to_index(k)]) / pscale;
    }
    for (std::size_t i = 0; i < unknown_nodes.size(); ++i) {
      const std::size_t n = unknown_nodes[i];
      double b = loads.withdrawal(net.nodes()[n].id);
      for (std::size_t k : net.incident(n)) {
        if (net.from_index(k) == n) b += qk[k];
        if (net.to_index(k) == n) b -= qk[k];
      }
      r(np + i) = b / qscale;
    }
    return r;
  };

  Eigen::VectorXd z(nz);
  for (std::size_t i = 0; i < unknown_nodes.size(); ++i) z(i) = p[unknown_nodes[i]] / pscale;
  for (std::size_t k = 0; k < np; ++k) z(unknown_nodes.size() + k) = q[k] / qscale;

  Eigen::VectorXd r = residual(z);
  const double tol = 1e-13;
  for (int it = 0; it < 60 && r.lpNorm<Eigen::Infinity>() > tol; ++it) {
    Eigen::MatrixXd J(nz, nz);
    for (std::size_t j = 0; j < nz; ++j) {
      Eigen::VectorXd zp = z;
      const double h = 1e-7 * std::max(std::abs(z(j)), 1.0);
      zp(j) += h;
      J.col(j) = (residual(zp) - r) / h;
    }
    const Eigen::VectorXd dz = J.fullPivLu().solve(-r);
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd zn = z + lambda * dz;
      try {
        const Eigen::VectorXd rn = residual(zn);
        if (rn.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
          z = zn;
          r = rn;
          improved = true;
          break;
        }
      } catch (const NumericalError&) {
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (r.lpNorm<Eigen::Infinity>() > 1e-9) {
    std::ostringstream os;
    os << "steady init: Newton did not converge (max scaled residual " << r.lpNorm<Eigen::Infinity>() << ")";
    throw NumericalError(os.str());
  }
  unpack(z, p, q);
}

inline SystemState state_from_steady(const Network& net, const std::vector<PipeGrid>& grids,
                                     const std::vector<double>& p, const std::vector<double>& q) {
  SystemState st;
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const auto m = march_pipe(net.pipes()[k], grids[k], p[net.from_index(k)], q[k], net.gas());
    st.pipes.push_back({m.rho, std::vector<double>(grids[k].n_cells + 1, q[k] / net.pipes()[k].area())});
  }
  st.node_rho.resize(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) st.node_rho[n] = density_from_pressure(p[n], net.gas());
  return st;
}

inline BoundarySet constant_boundaries(const Network& net, const SteadyLoads& loads) {
  BoundarySet bc;
  for (const auto& n : net.nodes()) {
    const double w = loads.withdrawal(n.id);
    if (w != 0.0) bc.withdrawal[n.id] = Profile::constant(n.id, w);
  }
  return bc;
}

/// Initial state for balanced constant loads: algebraic steady solve, then
/// time marching with frozen boundaries until the relative change of every
/// nodal pressure and of the linepack over one simulated hour is below
/// `cfg.drift_tolerance`. Time and the injection integral restart at zero.
inline SystemState steady_state_init(const Network& net, const std::vector<PipeGrid>& grids, const SteadyLoads& loads,
                                     const SolverConfig& cfg) {
  if (!net.has_node(loads.reference_node)) throw ValidationError("steady init: unknown reference node");
  if (!(loads.reference_pressure > 0.0)) throw ValidationError("steady init: reference pressure must be positive");
  double supply = 0.0, demand = 0.0;
  for (const auto& [id, v] : loads.supply) {
    if (!net.has_node(id)) throw ValidationError("steady init: unknown supply node " + std::to_string(id));
    supply += v;
  }
  for (const auto& [id, v] : loads.demand) {
    if (!net.has_node(id)) throw ValidationError("steady init: unknown demand node " + std::to_string(id));
    demand += v;
  }
  if (std::abs(supply - demand) > 1e-9 * std::max({supply, demand, 1e-300})) {
    std::ostringstream os;
    os << "steady init: unbalanced loads (supply " << supply << " kg/s, demand " << demand << " kg/s)";
    throw ValidationError(os.str());
  }

  std::vector<double> p, q;
  detail::warm_start(net, loads, p, q);
  solve_steady_network(net, grids, loads, p, q);

  Integrator integ(net, grids, state_from_steady(net, grids, p, q));
  const BoundarySet bc = constant_boundaries(net, loads);
  bool settled = false;
  double drift = 0.0;
  for (int hour = 0; hour < cfg.max_relax_hours && !settled; ++hour) {
    const std::vector<double> p0 = integ.node_pressures();
    const double m0 = total_mass(integ.state(), grids, net);
    const double t_end = integ.state().time + units::seconds_per_hour;
    while (integ.state().time < t_end) {
      const double dt = std::min(integ.stable_dt(cfg.cfl), t_end - integ.state().time);
      integ.advance(bc, dt);
    }
    drift = std::abs(total_mass(integ.state(), grids, net) - m0) / m0;
    for (std::size_t n = 0; n < p0.size(); ++n)
      drift = std::max(drift, std::abs(integ.node_pressure(n) - p0[n]) / p0[n]);
    settled = drift < cfg.drift_tolerance;
  }
  if (!settled) {
    std::ostringstream os;
    os << "steady init: relaxation did not settle (hourly drift " << drift << ")";
    throw NumericalError(os.str());
  }
  SystemState st = integ.state();
  st.time = 0.0;
  st.injected_mass = 0.0;
  return st;
}

} // namespace gasnet
