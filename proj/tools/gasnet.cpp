// gasnet: command-line front end for the transient network simulator.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure or failed
// verification, 3 I/O failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "gasnet/ensemble.hpp"
#include "gasnet/io.hpp"
#include "gasnet/metrics.hpp"
#include "gasnet/power.hpp"
#include "gasnet/scenario.hpp"
#include "gasnet/simulate.hpp"
#include "gasnet/steady.hpp"
#include "gasnet/verify.hpp"

#ifndef GASNET_DATA_DIR
#define GASNET_DATA_DIR "data"
#endif

using namespace gasnet;

namespace {

struct Common {
  std::string network = std::string(GASNET_DATA_DIR) + "/israel_11node.json";
  std::string scenario;
  std::string out = "out";
  std::string solver_config;
  std::optional<std::uint64_t> seed;
  std::optional<double> dx;
  std::optional<double> cfl;
  std::string eos;

  SolverConfig solver() const {
    SolverConfig c = solver_config.empty() ? SolverConfig{} : load_solver_config(solver_config);
    if (dx) c.target_dx = *dx;
    if (cfl) c.cfl = *cfl;
    if (eos == "ideal") c.eos = EosMode::ideal;
    else if (eos == "cnga") c.eos = EosMode::cnga;
    c.validate();
    return c;
  }

  std::vector<std::string> inputs() const {
    std::vector<std::string> f{network, scenario};
    if (!solver_config.empty()) f.push_back(solver_config);
    return f;
  }
};

void add_common(CLI::App* app, Common& c, bool needs_scenario) {
  app->add_option("--network", c.network, "network JSON file")->capture_default_str();
  auto* s = app->add_option("--scenario", c.scenario, "scenario JSON file");
  if (needs_scenario) s->required();
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--solver-config", c.solver_config, "solver config JSON file");
  app->add_option("--seed", c.seed, "random seed (defaults to the scenario's noise seed)");
  app->add_option("--dx-m", c.dx, "target cell size [m]");
  app->add_option("--cfl", c.cfl, "CFL factor in (0, 1)");
  app->add_option("--eos", c.eos, "equation of state")->check(CLI::IsMember({"cnga", "ideal"}));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = c.solver();
  const auto net = load_network(c.network);
  const auto sc = load_scenario(c.scenario, net);
  const std::uint64_t seed = c.seed.value_or(sc.noise.seed);
  const auto tr = run_scenario(net, sc, seed, cfg);
  const auto ev = detect_crossings(tr);

  OutputDir out(c.out);
  out.write("pressure.csv", pressure_csv(tr));
  out.write("linepack.csv", linepack_csv(tr));
  out.write("crossings.csv", crossings_csv(ev));
  nlohmann::json meta = trajectory_meta_json(tr.meta);
  meta["solver"] = solver_config_json(cfg);
  if (std::isfinite(sc.first_insult_time()) && sc.first_insult_time() <= tr.times.back()) {
    const auto s = survival_time(tr, sc.first_insult_time());
    meta["survival"] = {{"insult_time_s", sc.first_insult_time()},
                        {"tau_s", optional_seconds(s.tau)},
                        {"first_node", s.tau ? nlohmann::json(s.node) : nlohmann::json(nullptr)}};
  }
  out.write("run.json", meta.dump(2) + "\n");
  const auto hash = config_hash(c.inputs(), cfg, "run seed=" + std::to_string(seed));
  const auto manifest = manifest_json(out, "run", hash, {seed}, seconds_since(t0));
  out.write("manifest.json", manifest.dump(2) + "\n");

  std::cout << "scenario " << sc.id << ": " << tr.samples() << " samples, " << ev.size() << " crossings";
  if (tr.meta.truncated) std::cout << " (stopped: " << tr.meta.stop_reason << ")";
  std::cout << "\n";
  return 0;
}

int cmd_ensemble(const Common& c, int replicas, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = c.solver();
  const auto net = load_network(c.network);
  const auto sc = load_scenario(c.scenario, net);
  const std::uint64_t base = c.seed.value_or(sc.noise.seed);
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto st = run_ensemble(net, sc, replicas, base, cfg, workers);

  OutputDir out(c.out);
  std::vector<std::string> names;
  for (const auto& q : st.series) {
    names.push_back("quantiles_" + q.name + ".csv");
    out.write(names.back(), quantile_csv(st, q));
  }
  out.write("summary.json", ensemble_summary_json(st, names).dump(2) + "\n");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < replicas; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  const auto hash = config_hash(c.inputs(), cfg,
                                "ensemble base_seed=" + std::to_string(base) + " replicas=" + std::to_string(replicas));
  out.write("manifest.json", manifest_json(out, "ensemble", hash, seeds, seconds_since(t0)).dump(2) + "\n");

  std::cout << "scenario " << sc.id << ": " << replicas << " replicas, " << st.tau.crossed << " crossed";
  if (st.tau.crossed)
    std::cout << ", tau = " << units::to_hours(st.tau.mean) << " +/- " << units::to_hours(st.tau.stddev) << " h";
  std::cout << "\n";
  return 0;
}

int cmd_verify(const Common& c) {
  const auto cfg = c.solver();
  const auto net = load_network(c.network);
  const std::string path =
      c.scenario.empty() ? std::string(GASNET_DATA_DIR) + "/scenarios/s4_trough_insult.json" : c.scenario;
  auto sc = load_scenario(path, net);
  // A short tail after the insult is enough for mass and ordering checks.
  if (std::isfinite(sc.first_insult_time())) sc.horizon = std::min(sc.horizon, sc.first_insult_time() + units::hours(12));
  bool ok = true;
  for (const auto& r : verification_battery(with_eos(net, cfg.eos), sc, cfg)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.value << " (limit " << r.limit << "; "
              << r.detail << ")\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 2;
}

int cmd_init_steady(const Common& c) {
  const auto cfg = c.solver();
  const auto base = load_network(c.network);
  const auto net = with_eos(base, cfg.eos);
  const auto sc = load_scenario(c.scenario, net);
  const auto grids = discretize(net, cfg.target_dx);
  const auto st = scenario_initial_state(net, sc, cfg);
  nlohmann::json doc;
  doc["solver"] = solver_config_json(cfg);
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t n = 0; n < net.nodes().size(); ++n)
    nodes.push_back({{"id", net.nodes()[n].id},
                     {"density_kg_m3", st.node_rho[n]},
                     {"pressure_Pa", pressure_from_density(st.node_rho[n], net.gas())}});
  doc["nodes"] = nodes;
  nlohmann::json pipes = nlohmann::json::array();
  for (std::size_t k = 0; k < grids.size(); ++k)
    pipes.push_back({{"id", net.pipes()[k].id},
                     {"n_cells", grids[k].n_cells},
                     {"dx_m", grids[k].dx},
                     {"density_kg_m3", st.pipes[k].rho},
                     {"mass_flux_kg_m2_s", st.pipes[k].phi}});
  doc["pipes"] = pipes;
  doc["linepack_kg"] = total_mass(st, grids, net);
  OutputDir out(c.out);
  out.write("initial_state.json", doc.dump(2) + "\n");
  std::cout << "initial state: linepack " << total_mass(st, grids, net) << " kg\n";
  return 0;
}

int cmd_ingest_power(const std::string& power, const std::string& units_table, const std::string& curve_path,
                     const std::string& network, const std::string& out_path) {
  const auto net = load_network(network);
  const auto curve = load_efficiency_curve(curve_path);
  const auto series = read_power_csv(power, read_units_csv(units_table));
  std::map<int, Profile> per_node;
  int clamped = 0;
  for (const auto& s : series) {
    if (!net.has_node(s.node)) throw ValidationError("power unit mapped to unknown node " + std::to_string(s.node));
    int c = 0;
    const auto p = power_to_gas(s, curve, net.gas(), &c);
    clamped += c;
    auto it = per_node.find(s.node);
    if (it == per_node.end()) per_node.emplace(s.node, p);
    else it->second = it->second + p;
  }
  std::string csv = "time_s,node_id,mass_flow_kg_s\n";
  for (const auto& [n, p] : per_node)
    for (std::size_t k = 0; k < p.size(); ++k) csv += fmt(p.times()[k]) + "," + std::to_string(n) + "," + fmt(p.left_values()[k]) + "\n";
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  out << csv;
  if (!out) throw IoError("write failed for '" + out_path + "'");
  if (clamped) std::cerr << "warning: " << clamped << " samples outside the efficiency curve's load range were clamped\n";
  std::cout << "wrote " << per_node.size() << " node profiles to " << out_path << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient gas pipeline-network simulator"};
  app.require_subcommand(1);

  Common run_opts, ens_opts, ver_opts, init_opts;
  auto* run = app.add_subcommand("run", "single simulation");
  add_common(run, run_opts, true);

  auto* ens = app.add_subcommand("ensemble", "Monte-Carlo ensemble");
  add_common(ens, ens_opts, true);
  int replicas = 50, workers = 0;
  ens->add_option("--replicas", replicas, "number of replicas")->check(CLI::PositiveNumber)->capture_default_str();
  ens->add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* ver = app.add_subcommand("verify", "built-in verification battery");
  add_common(ver, ver_opts, false);

  auto* init = app.add_subcommand("init-steady", "write the initialised steady state");
  add_common(init, init_opts, true);

  auto* ing = app.add_subcommand("ingest-power", "convert a power CSV to a gas demand profile CSV");
  std::string power, units_table, curve = std::string(GASNET_DATA_DIR) + "/efficiency_curve.csv";
  std::string ing_network = std::string(GASNET_DATA_DIR) + "/israel_11node.json", ing_out = "demand_profile.csv";
  ing->add_option("--power", power, "timestamp,unit_id,power_MW CSV")->required();
  ing->add_option("--units", units_table, "unit_id,node_id,capacity_MW CSV")->required();
  ing->add_option("--curve", curve, "load_fraction,efficiency CSV")->capture_default_str();
  ing->add_option("--network", ing_network, "network JSON file")->capture_default_str();
  ing->add_option("--out", ing_out, "output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*ens) return cmd_ensemble(ens_opts, replicas, workers);
    if (*ver) return cmd_verify(ver_opts);
    if (*init) return cmd_init_steady(init_opts);
    if (*ing) return cmd_ingest_power(power, units_table, curve, ing_network, ing_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
