#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gasnet/power.hpp"
#include "support.hpp"

using namespace gasnet;

TEST(Power, GasFlowForPower) {
  GasProperties gas;
  EXPECT_NEAR(gas_flow_for_power(100.0, 0.4, gas), 4.8076923076923075, 1e-12);
  EXPECT_THROW(gas_flow_for_power(100.0, 0.0, gas), ValidationError);
}

TEST(Power, CurveInterpolatesAndClamps) {
  EfficiencyCurve c({0.2, 0.6, 1.0}, {0.25, 0.35, 0.40});
  bool clamped = true;
  EXPECT_DOUBLE_EQ(c(0.4, &clamped), 0.30);
  EXPECT_FALSE(clamped);
  EXPECT_DOUBLE_EQ(c(0.1, &clamped), 0.25);
  EXPECT_TRUE(clamped);
  EXPECT_DOUBLE_EQ(c(1.2, &clamped), 0.40);
  EXPECT_THROW(EfficiencyCurve({0.5, 0.4}, {0.3, 0.3}), ValidationError);
  EXPECT_THROW(EfficiencyCurve({0.5}, {1.3}), ValidationError);
}

TEST(Power, ShippedCurve) {
  const auto c = load_efficiency_curve(test::data("efficiency_curve.csv"));
  EXPECT_DOUBLE_EQ(c.min_load(), 0.2);
  EXPECT_DOUBLE_EQ(c.max_load(), 1.0);
  EXPECT_DOUBLE_EQ(c(0.5), 0.36);
}

TEST(Power, SeriesToStepProfile) {
  GasProperties gas;
  EfficiencyCurve c({0.0, 1.0}, {0.4, 0.4});
  PowerSeries s{4, 200.0, {0, 3600}, {100.0, 0.0}};
  int clamped = -1;
  const auto p = power_to_gas(s, c, gas, &clamped);
  EXPECT_EQ(clamped, 0);
  EXPECT_EQ(p.node(), 4);
  EXPECT_NEAR(p(1800), 4.8076923076923075, 1e-12);
  EXPECT_DOUBLE_EQ(p(3600), 0.0);
  s.power[1] = -1.0;
  EXPECT_THROW(power_to_gas(s, c, gas), ValidationError);
}

TEST(Power, TimestampParsing) {
  EXPECT_DOUBLE_EQ(detail::parse_timestamp("1970-01-02T01:00:00"), 90000.0);
  EXPECT_DOUBLE_EQ(detail::parse_timestamp("2017-08-01 00:30"), 1501547400.0);
  EXPECT_DOUBLE_EQ(detail::parse_timestamp("42.5"), 42.5);
  EXPECT_THROW(detail::parse_timestamp("2017-02-30T00:00:00"), ValidationError);
  EXPECT_THROW(detail::parse_timestamp("noon"), ValidationError);
}

TEST(Power, ShippedSampleDay) {
  const auto units_table = read_units_csv(test::data("power/units.csv"));
  ASSERT_EQ(units_table.size(), 2u);
  const auto series = read_power_csv(test::data("power/sample_day.csv"), units_table);
  ASSERT_EQ(series.size(), 2u);
  for (const auto& s : series) {
    EXPECT_EQ(s.times.size(), 24u);
    EXPECT_DOUBLE_EQ(s.times.front(), 0.0);
    EXPECT_DOUBLE_EQ(s.times.back(), 23 * 3600.0);
  }
}

TEST(Csv, CommentsAndErrors) {
  std::istringstream in("# comment\na,b\n\n1,2\n3,x\n");
  const auto t = parse_csv(in, "mem");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_DOUBLE_EQ(t.number(0, 1), 2.0);
  EXPECT_THROW(t.number(1, 1), ValidationError);
  EXPECT_THROW(t.column("c"), ValidationError);
  EXPECT_THROW(read_csv("/nonexistent.csv"), ValidationError);
}
