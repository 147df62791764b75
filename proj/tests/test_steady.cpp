#include <gtest/gtest.h>

#include <cmath>

#include "gasnet/simulate.hpp"
#include "gasnet/steady.hpp"
#include "gasnet/verify.hpp"
#include "support.hpp"

using namespace gasnet;

TEST(Steady, SinglePipeMatchesSquaredPressureDrop) {
  for (const auto& c : steady_pipe_cases()) EXPECT_LT(steady_pipe_error(c), 5e-3) << c.mass_flow;
}

// Independent closed form: p_out^2 = p_in^2 - (lambda L / D) R T phi|phi|.
TEST(Steady, OutletPressureOracle) {
  GasProperties gas;
  gas.mode = EosMode::ideal;
  const auto net = single_pipe_network(50e3, 0.6, 0.01, gas);
  const auto grids = discretize(net, 1000.0);
  SteadyLoads loads;
  loads.supply[1] = 100.0;
  loads.demand[2] = 100.0;
  loads.reference_node = 1;
  loads.reference_pressure = 70e5;
  const auto st = steady_state_init(net, grids, loads, SolverConfig{});
  const double phi = 100.0 / (units::pi * 0.09);
  const double p_out = std::sqrt(70e5 * 70e5 - 0.01 * 50e3 / 0.6 * gas.rt() * phi * phi);
  EXPECT_NEAR(pressure_from_density(st.node_rho[0], gas), 70e5, 1.0);
  EXPECT_NEAR(pressure_from_density(st.node_rho[1], gas), p_out, 1e-4 * 70e5);
  for (double f : st.pipes[0].phi) EXPECT_NEAR(f, phi, 1e-6 * phi);
}

TEST(Steady, UnbalancedLoadsRejected) {
  const auto net = test::israel();
  SteadyLoads loads;
  loads.supply[1] = 100.0;
  loads.demand[2] = 90.0;
  loads.reference_node = 1;
  EXPECT_THROW(steady_state_init(net, discretize(net, 1000.0), loads, SolverConfig{}), ValidationError);
}

TEST(Steady, NetworkStateIsStationary) {
  const auto net = test::israel();
  const auto sc = test::shipped("s1_nominal_week", net);
  SolverConfig cfg;
  const auto grids = discretize(net, cfg.target_dx);
  const auto composed = compose(sc, net, 0);
  const auto st = steady_state_init(net, grids, composed.nominal, cfg);
  EXPECT_NEAR(pressure_from_density(st.node_rho[net.node_index(1)], net.gas()), 70e5, 1e3);
  const auto bc = constant_boundaries(net, composed.nominal);
  const auto tr = simulate(net, grids, st, bc, 3600.0, cfg);
  for (std::size_t n = 0; n < net.nodes().size(); ++n)
    EXPECT_NEAR(tr.pressure.back()[n], tr.pressure.front()[n], 1e-4 * tr.pressure.front()[n]);
}
