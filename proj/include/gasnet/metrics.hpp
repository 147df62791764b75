#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"
#include "gasnet/simulate.hpp"
#include "gasnet/solver.hpp"
#include "gasnet/units.hpp"

namespace gasnet {

struct Linepack {
  std::vector<double> per_pipe; // kg
  double total = 0.0;           // kg
};

inline Linepack linepack(const SystemState& st, const std::vector<PipeGrid>& grids, const Network& net) {
  Linepack lp;
  for (std::size_t k = 0; k < grids.size(); ++k) {
    lp.per_pipe.push_back(pipe_mass(st.pipes[k], grids[k], net.pipes()[k].area()));
    lp.total += lp.per_pipe.back();
  }
  return lp;
}

struct CrossingEvent {
  int node = 0;
  double time = 0.0;   // s
  double pressure = 0.0; // Pa, first sample below the threshold
};

inline constexpr double default_threshold = 50e5; // Pa

/// One event per downward passage per node, at the first sample strictly
/// below the threshold. Sorted by time, then node id.
inline std::vector<CrossingEvent> detect_crossings(const Trajectory& tr, double threshold = default_threshold) {
  if (!(threshold > 0.0)) throw ValidationError("detect_crossings: threshold must be positive");
  std::vector<CrossingEvent> out;
  for (std::size_t s = 1; s < tr.samples(); ++s)
    for (std::size_t n = 0; n < tr.node_ids.size(); ++n)
      if (tr.pressure[s][n] < threshold && tr.pressure[s - 1][n] >= threshold)
        out.push_back({tr.node_ids[n], tr.times[s], tr.pressure[s][n]});
  std::stable_sort(out.begin(), out.end(), [](const CrossingEvent& a, const CrossingEvent& b) {
    return a.time < b.time || (a.time == b.time && a.node < b.node);
  });
  return out;
}

struct SurvivalResult {
  std::optional<double> tau; // s after the insult; empty when nothing crossed
  int node = 0;              // first crossing node
};

inline SurvivalResult survival_time(const Trajectory& tr, double insult_time, double threshold = default_threshold) {
  if (tr.samples() == 0) throw ValidationError("survival_time: empty trajectory");
  if (!(insult_time >= tr.times.front() && insult_time <= tr.times.back()))
    throw ValidationError("survival_time: insult time outside the trajectory");
  SurvivalResult r;
  for (const auto& e : detect_crossings(tr, threshold)) {
    if (e.time < insult_time) continue;
    r.tau = e.time - insult_time;
    r.node = e.node;
    break;
  }
  return r;
}

struct MonotonicityReport {
  std::size_t compared_samples = 0;
  double max_violation = 0.0; // Pa, max of p_severe - p_mild (0 if none positive)
  int worst_node = 0;
  double worst_time = 0.0;
  std::optional<double> tau_mild;
  std::optional<double> tau_severe;

  bool pressures_ordered(double tol) const { return max_violation <= tol; }
  // tau_severe <= tau_mild, with "no crossing" read as infinitely late.
  bool taus_ordered() const {
    const double m = tau_mild.value_or(std::numeric_limits<double>::infinity());
    const double s = tau_severe.value_or(std::numeric_limits<double>::infinity());
    return s <= m;
  }
};

namespace detail {

// The severe set must withdraw at least as much everywhere. Both sides are
// piecewise linear, so comparing at all breakpoints (values and left limits)
// settles every segment.
inline void check_ordered(const BoundarySet& mild, const BoundarySet& severe, double t0, double t1) {
  std::vector<int> nodes;
  for (const auto& [n, p] : mild.withdrawal) nodes.push_back(n);
  for (const auto& [n, p] : severe.withdrawal) nodes.push_back(n);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (int n : nodes) {
    std::vector<double> ts{t0, t1};
    for (const auto* b : {&mild, &severe}) {
      auto it = b->withdrawal.find(n);
      if (it == b->withdrawal.end()) continue;
      for (double t : it->second.times())
        if (t > t0 && t < t1) ts.push_back(t);
    }
    auto value = [n](const BoundarySet& b, double t, bool left) {
      auto it = b.withdrawal.find(n);
      if (it == b.withdrawal.end()) return 0.0;
      return left ? it->second.left_limit(t) : it->second(t);
    };
    for (double t : ts)
      for (bool left : {false, true}) {
        const double a = value(mild, t, left), b = value(severe, t, left);
        if (b < a - 1e-12 * std::max(std::abs(a), 1.0)) {
          std::ostringstream os;
          os << "monotonicity precondition violated: severe withdrawal at node " << n << ", t = " << t << " s is "
             << b << " kg/s, below the mild case's " << a << " kg/s";
          throw ValidationError(os.str());
        }
      }
  }
}

} // namespace detail

/// Pointwise pressure ordering p_severe <= p_mild over the common samples.
inline MonotonicityReport check_monotonicity(const Trajectory& mild, const Trajectory& severe,
                                             const BoundarySet& bc_mild, const BoundarySet& bc_severe,
                                             double insult_time, double threshold = default_threshold) {
  if (mild.node_ids != severe.node_ids) throw ValidationError("check_monotonicity: trajectories cover different nodes");
  const std::size_t n = std::min(mild.samples(), severe.samples());
  if (n == 0) throw ValidationError("check_monotonicity: empty trajectory");
  for (std::size_t s = 0; s < n; ++s)
    if (mild.times[s] != severe.times[s]) throw ValidationError("check_monotonicity: sample times differ");
  detail::check_ordered(bc_mild, bc_severe, mild.times.front(), mild.times[n - 1]);

  MonotonicityReport r;
  r.compared_samples = n;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = 0; k < mild.node_ids.size(); ++k) {
      const double v = severe.pressure[s][k] - mild.pressure[s][k];
      if (v > r.max_violation) {
        r.max_violation = v;
        r.worst_node = mild.node_ids[k];
        r.worst_time = mild.times[s];
      }
    }
  r.tau_mild = survival_time(mild, insult_time, threshold).tau;
  r.tau_severe = survival_time(severe, insult_time, threshold).tau;
  return r;
}

} // namespace gasnet
