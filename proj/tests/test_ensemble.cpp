#include <gtest/gtest.h>

#include <cmath>

#include "gasnet/ensemble.hpp"
#include "gasnet/io.hpp"
#include "support.hpp"

using namespace gasnet;

namespace {

Scenario short_insult(const Network& net) {
  auto sc = test::shipped("s4_trough_insult", net);
  sc.horizon = 8.0 * 3600.0;
  sc.insults[0].start = 2.0 * 3600.0;
  return sc;
}

} // namespace

TEST(Quantile, LinearBetweenOrderStatistics) {
  std::vector<double> v{4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.125), 1.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.875), 4.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  std::vector<double> one{7};
  EXPECT_DOUBLE_EQ(quantile(one, 0.375), 7.0);
  std::vector<double> none;
  EXPECT_THROW(quantile(none, 0.5), ValidationError);
}

TEST(Ensemble, WorkerCountInvariant) {
  const auto net = test::israel();
  const auto sc = short_insult(net);
  SolverConfig cfg;
  const auto a = run_ensemble(net, sc, 4, 100, cfg, 1);
  const auto b = run_ensemble(net, sc, 4, 100, cfg, 3);
  EXPECT_EQ(ensemble_summary_json(a, {}).dump(), ensemble_summary_json(b, {}).dump());
  for (std::size_t k = 0; k < a.series.size(); ++k) EXPECT_EQ(a.series[k].q, b.series[k].q);
  EXPECT_EQ(a.replicas, 4);
  EXPECT_EQ(a.series.size(), net.nodes().size() + 1);
  EXPECT_LT(a.max_mass_error, 1e-9);
}

TEST(Ensemble, BandsAreOrdered) {
  const auto net = test::israel();
  const auto sc = short_insult(net);
  const auto st = run_ensemble(net, sc, 5, 7, SolverConfig{}, 2);
  for (const auto& s : st.series)
    for (const auto& q : s.q)
      for (int l = 1; l < 5; ++l) EXPECT_LE(q[l - 1], q[l]);
  EXPECT_EQ(st.tau.samples.size(), 5u);
}

TEST(Ensemble, TauStatistics) {
  Scenario sc;
  sc.id = "x";
  std::vector<ReplicaSummary> reps(4);
  const double taus[] = {3600, 7200, -1, 10800};
  for (int i = 0; i < 4; ++i) {
    reps[i].traj.times = {0, 1};
    reps[i].traj.node_ids = {1};
    reps[i].traj.pressure = {{60e5}, {60e5}};
    reps[i].traj.total = {1, 1};
    reps[i].traj.meta.initial_mass = reps[i].traj.meta.final_mass = 1.0;
    if (taus[i] > 0) reps[i].survival = {taus[i], 1};
  }
  const auto st = summarize(sc, reps, 0);
  EXPECT_EQ(st.tau.crossed, 3);
  EXPECT_DOUBLE_EQ(st.tau.mean, 7200);
  EXPECT_DOUBLE_EQ(st.tau.stddev, 3600);
  EXPECT_DOUBLE_EQ(st.tau.median, 9000);
  reps[0].survival = {};
  EXPECT_TRUE(std::isinf(summarize(sc, reps, 0).tau.median));
}

TEST(Ensemble, RejectsBadArguments) {
  const auto net = test::israel();
  const auto sc = short_insult(net);
  EXPECT_THROW(run_ensemble(net, sc, 0, 1, SolverConfig{}, 1), ValidationError);
}
