#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gasnet/eos.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"
#include "gasnet/profile.hpp"

namespace gasnet {

struct SolverConfig {
  double target_dx = 1000.0;       // m
  double cfl = 0.8;
  double output_cadence = 300.0;   // s
  EosMode eos = EosMode::cnga;
  double drift_tolerance = 1e-6;   // relative, per simulated hour
  double collapse_pressure = 30e5; // Pa; integration stops below this at any node
  int max_relax_hours = 48;

  void validate() const {
    if (!(target_dx > 0.0)) throw ValidationError("target_dx_m must be positive");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ValidationError("cfl must lie in (0, 1)");
    if (!(output_cadence > 0.0)) throw ValidationError("output_cadence_s must be positive");
    if (!(drift_tolerance > 0.0)) throw ValidationError("drift_tolerance must be positive");
    if (!(collapse_pressure >= 0.0)) throw ValidationError("collapse pressure must be non-negative");
  }
};

struct PipeGrid {
  std::size_t pipe = 0;
  int n_cells = 0;
  double dx = 0.0;
  double length = 0.0;

  double cell_center(int i) const { return (i + 0.5) * dx; }
  double edge(int j) const { return j * dx; }
};

/// Uniform grid per pipe: n = max(2, round(L / target_dx)), dx = L / n.
inline std::vector<PipeGrid> discretize(const Network& net, double target_dx) {
  if (!(target_dx > 0.0)) throw ValidationError("discretize: target_dx must be positive");
  std::vector<PipeGrid> grids;
  grids.reserve(net.pipes().size());
  for (std::size_t k = 0; k < net.pipes().size(); ++k) {
    const double len = net.pipes()[k].length;
    const int n = std::max(2, static_cast<int>(std::lround(len / target_dx)));
    grids.push_back({k, n, len / n, len});
  }
  return grids;
}

/// Density at cell centers, mass flux at the n_cells + 1 cell edges. Edge 0
/// sits on the pipe's from-node, edge n_cells on its to-node.
struct PipeField {
  std::vector<double> rho; // kg/m^3
  std::vector<double> phi; // kg/(m^2 s)
};

/// Full discrete state. Fluxes lag densities by half a step (leapfrog
/// staggering); `last_dt` records the previous step so the flux update can
/// span the midpoint-to-midpoint interval.
struct SystemState {
  double time = 0.0;
  std::vector<PipeField> pipes;
  std::vector<double> node_rho;   // per node position, from the last junction solve
  double last_dt = 0.0;           // 0 before the first step
  double injected_mass = 0.0;     // discrete integral of net injection since t = 0 [kg]
};

/// Per-node withdrawal d_n(t) in kg/s (negative = injection). Nodes without
/// a profile withdraw nothing.
struct BoundarySet {
  std::map<int, Profile> withdrawal;

  double operator()(int node, double t) const {
    auto it = withdrawal.find(node);
    return it == withdrawal.end() ? 0.0 : it->second(t);
  }

  // Mean withdrawal over [a, b]; the stepper uses it so stored mass tracks
  // the exact injection integral even across jumps.
  double average(int node, double a, double b) const {
    auto it = withdrawal.find(node);
    return it == withdrawal.end() ? 0.0 : it->second.integral(a, b) / (b - a);
  }

  double net_injection_integral(double a, double b) const {
    double sum = 0.0;
    for (const auto& [id, prof] : withdrawal) sum -= prof.integral(a, b);
    return sum;
  }

  friend bool operator==(const BoundarySet& a, const BoundarySet& b) { return a.withdrawal == b.withdrawal; }
};

/// Solution x of x + a x|x| = y for a >= 0.
///
/// Algebraically sign(y)(sqrt(1 + 4a|y|) - 1)/(2a); the rationalised form
/// below has no cancellation and reduces to x = y at a = 0.
inline double friction_inverse(double y, double a) {
  if (a == 0.0) return y;
  return 2.0 * y / (1.0 + std::sqrt(1.0 + 4.0 * a * std::abs(y)));
}

inline double pipe_mass(const PipeField& f, const PipeGrid& g, double area) {
  double s = 0.0;
  for (double r : f.rho) s += r;
  return s * g.dx * area;
}

inline double total_mass(const SystemState& st, const std::vector<PipeGrid>& grids, const Network& net) {
  double m = 0.0;
  for (std::size_t k = 0; k < grids.size(); ++k) m += pipe_mass(st.pipes[k], grids[k], net.pipes()[k].area());
  return m;
}

/// Owns a state while it is being time-stepped and caches the cell
/// pressures between steps.
class Integrator {
public:
  Integrator(const Network& net, std::vector<PipeGrid> grids, SystemState initial)
      : net_(&net), grids_(std::move(grids)), state_(std::move(initial)) {
    check_shapes();
    pressure_.resize(grids_.size());
    max_speed_.resize(grids_.size());
    for (std::size_t k = 0; k < grids_.size(); ++k) refresh_pipe(k);
    node_pressure_.resize(state_.node_rho.size());
    for (std::size_t n = 0; n < node_pressure_.size(); ++n)
      node_pressure_[n] = pressure_from_density(state_.node_rho[n], gas());
  }

  const SystemState& state() const { return state_; }
  SystemState& mutable_state() { return state_; }
  const std::vector<PipeGrid>& grids() const { return grids_; }
  const Network& network() const { return *net_; }
  double node_pressure(std::size_t n) const { return node_pressure_[n]; }
  const std::vector<double>& node_pressures() const { return node_pressure_; }
  // Withdrawals used by the most recent step, per node position.
  const std::vector<double>& last_withdrawal() const { return last_withdrawal_; }

  /// cfl * min over pipes of dx / max cell wave speed.
  double stable_dt(double cfl) const {
    if (!(cfl > 0.0 && cfl < 1.0)) throw ValidationError("cfl must lie in (0, 1)");
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grids_.size(); ++k) {
      if (!std::isfinite(max_speed_[k]) || !(max_speed_[k] > 0.0))
        throw NumericalError("cfl_dt: non-finite state in pipe " + std::to_string(net_->pipes()[k].id));
      dt = std::min(dt, grids_[k].dx / max_speed_[k]);
    }
    return cfl * dt;
  }

  /// One staggered step of width dt:
  ///  1. edge fluxes advance over the midpoint-to-midpoint span using the
  ///     current cell pressures, with Crank-Nicolson friction inverted in
  ///     closed form;
  ///  2. each junction density is chosen so the updated end fluxes satisfy
  ///     sum_j S_j phi_j + d_n = 0 exactly, d_n averaged over the step;
  ///  3. cell densities advance by the flux divergence.
  void advance(const BoundarySet& bc, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalError("step: dt must be positive and finite");
    const double span = state_.last_dt > 0.0 ? 0.5 * (state_.last_dt + dt) : dt;

    for (std::size_t k = 0; k < grids_.size(); ++k) update_interior_fluxes(k, span);
    double injection = 0.0;
    last_withdrawal_.resize(net_->nodes().size());
    for (std::size_t n = 0; n < net_->nodes().size(); ++n) {
      const double d = bc.average(net_->nodes()[n].id, state_.time, state_.time + dt);
      last_withdrawal_[n] = d;
      solve_junction(n, d, span);
      injection -= d;
    }
    for (std::size_t k = 0; k < grids_.size(); ++k) update_densities(k, dt);

    state_.injected_mass += dt * injection;
    state_.time += dt;
    state_.last_dt = dt;
  }

  /// Discrete Kirchhoff residual sum_j s_j S_j phi_j + d_n at node position n.
  double junction_residual(std::size_t n, double withdrawal) const {
    double r = withdrawal;
    for (std::size_t k : net_->incident(n)) {
      const double area = net_->pipes()[k].area();
      const auto& phi = state_.pipes[k].phi;
      if (net_->from_index(k) == n) r += area * phi.front();
      if (net_->to_index(k) == n) r -= area * phi.back();
    }
    return r;
  }

private:
  const GasProperties& gas() const { return net_->gas(); }

  void check_shapes() const {
    if (state_.pipes.size() != grids_.size()) throw ValidationError("state/grid pipe count mismatch");
    if (state_.node_rho.size() != net_->nodes().size()) throw ValidationError("state/network node count mismatch");
    for (std::size_t k = 0; k < grids_.size(); ++k) {
      const auto n = static_cast<std::size_t>(grids_[k].n_cells);
      if (state_.pipes[k].rho.size() != n || state_.pipes[k].phi.size() != n + 1)
        throw ValidationError("pipe field sizes inconsistent with grid for pipe " +
                              std::to_string(net_->pipes()[k].id));
    }
  }

  void refresh_pipe(std::size_t k) {
    const auto& rho = state_.pipes[k].rho;
    auto& p = pressure_[k];
    p.resize(rho.size());
    double amax = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (!(rho[i] > 0.0) || !std::isfinite(rho[i])) {
        std::ostringstream os;
        os << "instability: density " << rho[i] << " in pipe " << net_->pipes()[k].id << " cell " << i
           << " at t = " << state_.time << " s";
        throw NumericalError(os.str());
      }
      p[i] = pressure_from_density(rho[i], gas());
      amax = std::max(amax, p[i] / rho[i]);
    }
    max_speed_[k] = std::sqrt(amax);
  }

  double friction_coefficient(std::size_t k, double span, double rho_sum) const {
    const auto& pipe = net_->pipes()[k];
    return span * pipe.friction / (2.0 * pipe.diameter * rho_sum);
  }

  void update_interior_fluxes(std::size_t k, double span) {
    auto& f = state_.pipes[k];
    const auto& p = pressure_[k];
    const double r = span / grids_[k].dx;
    const std::size_t n = f.rho.size();
    for (std::size_t j = 1; j < n; ++j) {
      const double a = friction_coefficient(k, span, f.rho[j - 1] + f.rho[j]);
      const double phi = f.phi[j];
      const double y = phi - r * (p[j] - p[j - 1]) - a * phi * std::abs(phi);
      f.phi[j] = friction_inverse(y, a);
    }
  }

  struct EndTerm {
    double c;     // y = c + sign * g * p_node
    double g;
    double a;
    double area;
    double sign;  // +1 when the node is the pipe's from-node
  };

  void solve_junction(std::size_t n, double withdrawal, double span) {
    terms_.clear();
    for (std::size_t k : net_->incident(n)) {
      const auto& f = state_.pipes[k];
      const double g = 2.0 * span / grids_[k].dx;
      const double area = net_->pipes()[k].area();
      if (net_->from_index(k) == n) {
        const double a = friction_coefficient(k, span, 2.0 * f.rho.front());
        const double phi = f.phi.front();
        terms_.push_back({phi - g * pressure_[k].front() - a * phi * std::abs(phi), g, a, area, +1.0});
      }
      if (net_->to_index(k) == n) {
        const double a = friction_coefficient(k, span, 2.0 * f.rho.back());
        const double phi = f.phi.back();
        terms_.push_back({phi + g * pressure_[k].back() - a * phi * std::abs(phi), g, a, area, -1.0});
      }
    }

    auto balance = [&](double p, double& slope) {
      double r = withdrawal;
      slope = 0.0;
      for (const auto& t : terms_) {
        const double y = t.c + t.sign * t.g * p;
        r += t.sign * t.area * friction_inverse(y, t.a);
        slope += t.area * t.g / std::sqrt(1.0 + 4.0 * t.a * std::abs(y));
      }
      return r;
    };

    double scale = std::abs(withdrawal) + 1.0;
    for (const auto& t : terms_) scale += t.area * std::abs(t.c);

    double p = node_pressure_[n];
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      double slope = 0.0;
      const double r = balance(p, slope);
      if (r == 0.0 || std::abs(r) <= 1e-14 * scale) {
        converged = true;
        break;
      }
      if (r > 0.0) hi = p; else lo = p;
      double next = p - r / slope;
      if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * std::max(p, 1.0);
      if (std::abs(next - p) <= 4.0 * std::numeric_limits<double>::epsilon() * p) {
        p = next;
        converged = true;
        break;
      }
      p = next;
    }
    if (!converged || !(p > 0.0) || !std::isfinite(p)) {
      std::ostringstream os;
      os << "instability: junction balance at node " << net_->nodes()[n].id << " has no positive-pressure solution at t = "
         << state_.time << " s (withdrawal " << withdrawal << " kg/s)";
      throw NumericalError(os.str());
    }

    for (std::size_t k : net_->incident(n)) {
      auto& f = state_.pipes[k];
      const double g = 2.0 * span / grids_[k].dx;
      if (net_->from_index(k) == n) {
        const double a = friction_coefficient(k, span, 2.0 * f.rho.front());
        const double phi = f.phi.front();
        const double y = phi - g * (pressure_[k].front() - p) - a * phi * std::abs(phi);
        f.phi.front() = friction_inverse(y, a);
      }
      if (net_->to_index(k) == n) {
        const double a = friction_coefficient(k, span, 2.0 * f.rho.back());
        const double phi = f.phi.back();
        const double y = phi - g * (p - pressure_[k].back()) - a * phi * std::abs(phi);
        f.phi.back() = friction_inverse(y, a);
      }
    }
    node_pressure_[n] = p;
    state_.node_rho[n] = density_from_pressure(p, gas());
  }

  void update_densities(std::size_t k, double dt) {
    auto& f = state_.pipes[k];
    const double r = dt / grids_[k].dx;
    for (std::size_t i = 0; i < f.rho.size(); ++i) f.rho[i] -= r * (f.phi[i + 1] - f.phi[i]);
    refresh_pipe(k);
  }

  const Network* net_;
  std::vector<PipeGrid> grids_;
  SystemState state_;
  std::vector<std::vector<double>> pressure_;
  std::vector<double> max_speed_;
  std::vector<double> node_pressure_;
  std::vector<double> last_withdrawal_;
  std::vector<EndTerm> terms_;
};

/// dt = cfl * min over pipes of (dx / max sound speed).
inline double cfl_dt(const Network& net, const SystemState& st, const std::vector<PipeGrid>& grids, double cfl) {
  if (!(cfl > 0.0 && cfl < 1.0)) throw ValidationError("cfl must lie in (0, 1)");
  return Integrator(net, grids, st).stable_dt(cfl);
}

/// Pure single step; see Integrator::advance.
inline SystemState step(const Network& net, const std::vector<PipeGrid>& grids, const SystemState& st,
                        const BoundarySet& bc, double dt) {
  Integrator integ(net, grids, st);
  integ.advance(bc, dt);
  return integ.state();
}

/// Uniform state at density rho with zero flux.
inline SystemState uniform_state(const Network& net, const std::vector<PipeGrid>& grids, double rho) {
  SystemState st;
  for (const auto& g : grids)
    st.pipes.push_back({std::vector<double>(g.n_cells, rho), std::vector<double>(g.n_cells + 1, 0.0)});
  st.node_rho.assign(net.nodes().size(), rho);
  return st;
}

} // namespace gasnet
