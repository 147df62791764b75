// Acceptance run: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Ensemble summaries land in ./acceptance_out for inspection.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "gasnet/ensemble.hpp"
#include "gasnet/io.hpp"
#include "gasnet/metrics.hpp"
#include "gasnet/simulate.hpp"
#include "gasnet/verify.hpp"
#include "support.hpp"

using namespace gasnet;
using clock_type = std::chrono::steady_clock;

namespace {

constexpr double week = 7.0 * 86400.0;
int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail << std::endl;
  if (!ok) ++failures;
}

double since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

double mass_error(const TrajectoryMeta& m) {
  return std::abs(m.final_mass - m.initial_mass - m.exact_injection) / m.initial_mass;
}

std::string hours(double s) {
  if (!std::isfinite(s)) return "none";
  std::ostringstream os;
  os.precision(3);
  os << s / 3600.0 << " h";
  return os.str();
}

struct EnsembleRun {
  EnsembleStats stats;
  std::string summary; // summary JSON plus every quantile CSV
  double seconds = 0.0;
};

EnsembleRun ensemble(const Network& net, const Scenario& sc, int n, int workers, const SolverConfig& cfg,
                     const std::filesystem::path& dir) {
  const auto t0 = clock_type::now();
  EnsembleRun r;
  r.stats = run_ensemble(net, sc, n, 1, cfg, workers);
  r.seconds = since(t0);
  OutputDir out(dir);
  std::vector<std::string> names;
  for (const auto& q : r.stats.series) {
    names.push_back("quantiles_" + q.name + ".csv");
    const auto csv = quantile_csv(r.stats, q);
    out.write(names.back(), csv);
    r.summary += csv;
  }
  const auto js = ensemble_summary_json(r.stats, names).dump(2) + "\n";
  out.write("summary.json", js);
  r.summary = js + r.summary;
  std::cerr << "  " << sc.id << ": n = " << n << ", " << r.stats.tau.crossed << " crossed, median tau "
            << hours(r.stats.tau.median) << ", " << r.seconds << " s" << std::endl;
  return r;
}

} // namespace

int main() {
  const auto net = test::israel();
  const SolverConfig cfg; // dx = 1 km, cfl = 0.8
  const int replicas = 50;
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::filesystem::path out_root = "acceptance_out";
  std::cerr << "workers: " << workers << std::endl;

  // Week-long single runs, shared by criteria 1, 4 and 9.
  std::cerr << "single runs" << std::endl;
  double worst_week_error = 0.0;
  std::string worst_id;
  auto note = [&](const std::string& id, const TrajectoryMeta& m, double horizon) {
    const double e = mass_error(m) * (week / std::max(horizon, 1.0));
    if (e >= worst_week_error) {
      worst_week_error = e;
      worst_id = id;
    }
  };
  const auto s1 = test::shipped("s1_nominal_week", net);
  const auto t_s1 = clock_type::now();
  const auto tr1 = run_scenario(net, s1, s1.noise.seed, cfg);
  const double s1_seconds = since(t_s1);
  note(s1.id, tr1.meta, s1.horizon);
  for (const char* name : {"s2_noisy_week", "s2u_uniform_noise_week"}) {
    const auto sc = test::shipped(name, net);
    note(sc.id, run_scenario(net, sc, sc.noise.seed, cfg).meta, sc.horizon);
  }

  // Ensembles for criteria 1, 5 and 8.
  std::cerr << "ensembles" << std::endl;
  std::map<std::string, EnsembleRun> ens;
  double ensemble_seconds = 0.0;
  for (const char* name : {"s3_crest_insult", "s4_trough_insult", "s5_supply_step", "s6_curtailment"}) {
    const auto sc = test::shipped(name, net);
    auto r = ensemble(net, sc, replicas, workers, cfg, out_root / name);
    ensemble_seconds += r.seconds;
    const double e = r.stats.max_mass_error * (week / sc.horizon);
    if (e >= worst_week_error) {
      worst_week_error = e;
      worst_id = sc.id + " (worst replica)";
    }
    ens[name] = std::move(r);
  }

  {
    std::ostringstream os;
    os << "max relative mass error per simulated week " << worst_week_error << " (" << worst_id
       << ") over s1, s2, s2u and 4 x " << replicas << " ensemble replicas; limit 1e-9";
    report(1, "conservation", worst_week_error < 1e-9, os.str());
  }

  {
    const auto t0 = clock_type::now();
    const auto r = refinement_study();
    const double secs = since(t0);
    std::ostringstream os;
    os << "observed order " << r.order << " over cells";
    for (int c : r.cells) os << " " << c;
    os << "; " << secs << " s; limits >= 1.8 and < 120 s";
    report(2, "order of accuracy", r.order >= 1.8 && secs < 120.0, os.str());
  }

  {
    const auto t0 = clock_type::now();
    double worst = 0.0;
    for (const auto& c : steady_pipe_cases()) worst = std::max(worst, steady_pipe_error(c, cfg));
    std::ostringstream os;
    os << "max relative error of the p^2 drop " << worst << " over " << steady_pipe_cases().size()
       << " (m, L, D) cases; " << since(t0) << " s; limit 5e-3";
    report(3, "steady-pipe oracle", worst < 5e-3, os.str());
  }

  {
    // Periodicity: last simulated day against the day before.
    const int crossings = static_cast<int>(detect_crossings(tr1).size());
    const double day = 86400.0;
    const std::size_t per_day = static_cast<std::size_t>(std::llround(day / cfg.output_cadence));
    double drift = 0.0;
    const std::size_t n = tr1.samples();
    for (std::size_t s = n - per_day; s < n; ++s)
      for (std::size_t k = 0; k < tr1.node_ids.size(); ++k)
        drift = std::max(drift, std::abs(tr1.pressure[s][k] - tr1.pressure[s - per_day][k]));
    double swing = 0.0;
    for (std::size_t k = 0; k < tr1.node_ids.size(); ++k) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t s = n - per_day; s < n; ++s) {
        lo = std::min(lo, tr1.pressure[s][k]);
        hi = std::max(hi, tr1.pressure[s][k]);
      }
      swing = std::max(swing, hi - lo);
    }
    const bool ok = crossings == 0 && drift < 0.01 * swing && swing > 1e5 && !tr1.meta.truncated;
    std::ostringstream os;
    os << crossings << " crossings; max |p(t) - p(t - 24 h)| over day 7 = " << drift / 1e5
       << " bar against a diurnal swing of " << swing / 1e5 << " bar; limits 0 crossings, drift < 1% of swing";
    report(4, "scenario-1 qualitative", ok, os.str());
  }

  {
    const auto& s3 = ens["s3_crest_insult"].stats;
    const auto& s4 = ens["s4_trough_insult"].stats;
    const auto& s5 = ens["s5_supply_step"].stats;
    const auto& s6 = ens["s6_curtailment"].stats;
    int s6_crossings = 0;
    for (const auto& [n, c] : s6.crossing_histogram) s6_crossings += c;
    const bool ok = s3.tau.median > s4.tau.median && s5.tau.median > s4.tau.median && s6_crossings == 0 &&
                    ensemble_seconds <= 1800.0;
    std::ostringstream os;
    os << "median tau s3 " << hours(s3.tau.median) << " > s4 " << hours(s4.tau.median) << "; s5 "
       << hours(s5.tau.median) << " > s4; s6 crossings " << s6_crossings << "; n = " << replicas << " each, "
       << ensemble_seconds << " s on " << workers << " worker(s); limit 1800 s";
    report(5, "scenario ordering", ok, os.str());
  }

  {
    std::cerr << "monotonicity pairs" << std::endl;
    auto base = test::shipped("s4_trough_insult", net);
    const double t_ins = base.first_insult_time();
    base.horizon = std::min(base.horizon, t_ins + units::hours(12));
    bool ok = true;
    std::ostringstream os;
    for (const auto& m : monotonicity_suite(net, base, t_ins, cfg)) {
      const bool pair_ok = m.report.pressures_ordered(1e-6 * units::pascal_per_bar) && m.report.taus_ordered();
      ok = ok && pair_ok;
      os << m.name << ": max excess " << m.report.max_violation / 1e5 << " bar, tau "
         << hours(m.report.tau_severe.value_or(INFINITY)) << " vs " << hours(m.report.tau_mild.value_or(INFINITY))
         << "; ";
    }
    os << "limit 1e-6 bar";
    report(6, "monotonicity", ok, os.str());
  }

  {
    // Composed demand noise at a fixed time well past 1/alpha, one draw per seed.
    auto sc = test::shipped("s2_noisy_week", net);
    sc.horizon = units::hours(12);
    auto clean = sc;
    clean.noise.kind = NoiseKind::none;
    const auto nominal = compose(clean, net, 0).bc;
    const double t = units::hours(12);
    const int samples = 10000;
    std::map<int, std::pair<double, double>> acc;
    for (int s = 0; s < samples; ++s) {
      const auto bc = compose(sc, net, 1000 + static_cast<std::uint64_t>(s)).bc;
      for (const auto& [n, p] : sc.demand) {
        const double x = bc(n, t) - nominal(n, t);
        acc[n].first += x;
        acc[n].second += x * x;
      }
    }
    double worst = 0.0;
    int worst_node = 0;
    for (const auto& [n, a] : acc) {
      // mu is the node's mean nominal demand over its whole profile.
      const auto& p = sc.demand.at(n);
      const double span = std::max(sc.horizon, p.end());
      const double mu = p.integral(0.0, span) / span;
      const double var = (a.second - a.first * a.first / samples) / (samples - 1);
      const double dev = std::abs(var / (sc.noise.variance_ratio * mu * mu) - 1.0);
      if (dev >= worst) {
        worst = dev;
        worst_node = n;
      }
    }
    std::ostringstream os;
    os << "max |Var / (0.01 mu^2) - 1| = " << worst << " (node " << worst_node << ") over " << acc.size()
       << " demand nodes, " << samples << " samples each at t = 12 h, mu = mean nominal demand; limit 0.10";
    report(7, "OU statistics", worst < 0.10, os.str());
  }

  {
    std::cerr << "determinism rerun" << std::endl;
    const auto sc = test::shipped("s4_trough_insult", net);
    const int other = workers == 4 ? 2 : 4;
    const auto again = ensemble(net, sc, replicas, other, cfg, out_root / "s4_trough_insult_rerun");
    const bool same = again.summary == ens["s4_trough_insult"].summary;
    std::ostringstream os;
    os << "s4 ensemble (n = " << replicas << ") rerun with " << other << " workers vs " << workers << ": summary and "
       << again.stats.series.size() << " quantile files " << (same ? "byte-identical" : "DIFFER") << " ("
       << sha256_hex(again.summary).substr(0, 16) << ")";
    report(8, "determinism", same, os.str());
  }

  {
    std::ostringstream os;
    os << "7-day s1 run at dx = " << cfg.target_dx << " m, cfl = " << cfg.cfl << ": " << s1_seconds << " s ("
       << tr1.meta.steps << " steps, steady init included); limit 60 s";
    report(9, "performance", s1_seconds <= 60.0, os.str());
  }

  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criterion(s) failed" : "acceptance: all passed")
            << std::endl;
  return failures ? 1 : 0;
}
