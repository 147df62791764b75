#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gasnet/errors.hpp"
#include "gasnet/metrics.hpp"
#include "gasnet/scenario.hpp"
#include "gasnet/simulate.hpp"

namespace gasnet {

/// Quantile with linear interpolation between order statistics
/// (position q (n - 1) in the sorted sample). `v` is sorted in place.
inline double quantile(std::vector<double>& v, double q) {
  if (v.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] + w * (v[hi] - v[lo]);
}

inline constexpr double band_levels[5] = {0.125, 0.375, 0.5, 0.625, 0.875};

/// Pointwise quantile curves of one quantity. q[s] holds the five levels
/// above; count[s] the number of replicas still running at sample s.
struct QuantileSeries {
  std::string name;
  std::vector<std::array<double, 5>> q;
  std::vector<int> count;
};

struct TauStats {
  std::vector<std::optional<double>> samples; // s, per replica in seed order
  int crossed = 0;
  double mean = 0.0;   // over replicas that crossed
  double stddev = 0.0; // sample standard deviation over replicas that crossed
  double median = std::numeric_limits<double>::infinity(); // no crossing counts as +inf
  std::map<int, int> first_node_histogram;
};

struct EnsembleStats {
  std::string scenario_id;
  std::uint64_t base_seed = 0;
  int replicas = 0;
  double insult_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> times;
  std::vector<QuantileSeries> series; // one per node pressure, then total linepack
  TauStats tau;
  std::map<int, int> crossing_histogram; // all crossing events per node
  int truncated = 0;
  double max_mass_error = 0.0;           // relative, worst replica
  double max_kirchhoff = 0.0;
  std::vector<std::string> flags;
};

struct ReplicaSummary {
  std::uint64_t seed = 0;
  Trajectory traj;
  std::vector<CrossingEvent> crossings;
  SurvivalResult survival;
};

/// Runs `replicas` realisations with seeds base_seed .. base_seed + n - 1.
/// Workers pull replica indices from a shared counter and write into
/// per-index slots, so the reduction never depends on scheduling.
inline std::vector<ReplicaSummary> run_replicas(const Network& net, const Scenario& sc, int replicas,
                                                std::uint64_t base_seed, const SolverConfig& cfg, int workers,
                                                double threshold = default_threshold) {
  if (replicas < 1) throw ValidationError("ensemble needs at least one replica");
  const SystemState init = scenario_initial_state(net, sc, cfg);
  const double t_insult = sc.first_insult_time();
  std::vector<ReplicaSummary> out(static_cast<std::size_t>(replicas));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<int> next{0};

  auto work = [&] {
    for (int i = next++; i < replicas; i = next++) {
      try {
        auto& r = out[static_cast<std::size_t>(i)];
        r.seed = base_seed + static_cast<std::uint64_t>(i);
        r.traj = run_scenario(net, sc, r.seed, cfg, &init);
        r.crossings = detect_crossings(r.traj, threshold);
        if (std::isfinite(t_insult) && t_insult <= r.traj.times.back())
          r.survival = survival_time(r.traj, t_insult, threshold);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int n_workers = std::clamp(workers, 1, replicas);
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    const std::string where = "replica with seed " + std::to_string(base_seed + i) + ": ";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

inline EnsembleStats summarize(const Scenario& sc, const std::vector<ReplicaSummary>& reps, std::uint64_t base_seed) {
  EnsembleStats st;
  st.scenario_id = sc.id;
  st.base_seed = base_seed;
  st.replicas = static_cast<int>(reps.size());
  st.insult_time = sc.first_insult_time();

  std::size_t longest = 0;
  for (const auto& r : reps) longest = std::max(longest, r.traj.samples());
  for (const auto& r : reps)
    if (r.traj.samples() == longest) {
      st.times = r.traj.times;
      break;
    }
  const auto& node_ids = reps.front().traj.node_ids;
  for (int id : node_ids) st.series.push_back({"pressure_node_" + std::to_string(id), {}, {}});
  st.series.push_back({"linepack_total", {}, {}});

  std::vector<double> buf;
  for (std::size_t s = 0; s < longest; ++s) {
    for (std::size_t k = 0; k < st.series.size(); ++k) {
      buf.clear();
      for (const auto& r : reps) {
        if (s >= r.traj.samples()) continue;
        buf.push_back(k < node_ids.size() ? r.traj.pressure[s][k] : r.traj.total[s]);
      }
      std::array<double, 5> q{};
      for (int l = 0; l < 5; ++l) q[l] = quantile(buf, band_levels[l]);
      st.series[k].q.push_back(q);
      st.series[k].count.push_back(static_cast<int>(buf.size()));
    }
  }

  std::vector<double> taus, all;
  for (const auto& r : reps) {
    st.tau.samples.push_back(r.survival.tau);
    if (r.survival.tau) {
      taus.push_back(*r.survival.tau);
      ++st.tau.first_node_histogram[r.survival.node];
    }
    all.push_back(r.survival.tau.value_or(std::numeric_limits<double>::infinity()));
    for (const auto& e : r.crossings) ++st.crossing_histogram[e.node];
    if (r.traj.meta.truncated) ++st.truncated;
    const auto& m = r.traj.meta;
    st.max_mass_error =
        std::max(st.max_mass_error, std::abs(m.final_mass - m.initial_mass - m.exact_injection) / m.initial_mass);
    st.max_kirchhoff = std::max(st.max_kirchhoff, m.max_kirchhoff);
    for (const auto& f : m.flags)
      if (std::find(st.flags.begin(), st.flags.end(), f) == st.flags.end()) st.flags.push_back(f);
  }
  st.tau.crossed = static_cast<int>(taus.size());
  if (!taus.empty()) {
    double sum = 0.0;
    for (double t : taus) sum += t;
    st.tau.mean = sum / static_cast<double>(taus.size());
    double ss = 0.0;
    for (double t : taus) ss += (t - st.tau.mean) * (t - st.tau.mean);
    st.tau.stddev = taus.size() > 1 ? std::sqrt(ss / static_cast<double>(taus.size() - 1)) : 0.0;
  }
  std::sort(all.begin(), all.end());
  if (!all.empty()) {
    const std::size_t m = all.size();
    st.tau.median = (m % 2) ? all[m / 2] : 0.5 * (all[m / 2 - 1] + all[m / 2]);
  }
  return st;
}

inline EnsembleStats run_ensemble(const Network& net, const Scenario& sc, int replicas, std::uint64_t base_seed,
                                  const SolverConfig& cfg, int workers = 1) {
  return summarize(sc, run_replicas(net, sc, replicas, base_seed, cfg, workers), base_seed);
}

} // namespace gasnet
