#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "gasnet/eos.hpp"
#include "gasnet/verify.hpp"

using namespace gasnet;

// Reference values computed independently for G = 0.6, T = 288.15 K.
TEST(Eos, CngaCoefficient) {
  GasProperties g;
  EXPECT_NEAR(g.cnga_coefficient(), 1.6734185323003024e-4, 1e-17);
}

TEST(Eos, CompressibilityAt70Bar) {
  GasProperties g;
  EXPECT_NEAR(cnga_z(70e5, g), 0.8565773158436513, 1e-14);
  EXPECT_NEAR(density_from_pressure(70e5, g), 59.27875635887775, 1e-10);
}

TEST(Eos, PressureFromDensity) {
  GasProperties g;
  EXPECT_NEAR(pressure_from_density(60.0, g), 7074248.888122847, 1e-6);
}

TEST(Eos, IdealModeIsLinear) {
  GasProperties g;
  g.mode = EosMode::ideal;
  EXPECT_DOUBLE_EQ(cnga_z(80e5, g), 1.0);
  EXPECT_NEAR(pressure_from_density(10.0, g), 10.0 * g.rt(), 1e-6);
  EXPECT_NEAR(sound_speed(10.0, g), 371.2925144371177, 1e-9);
}

TEST(Eos, BelowAtmosphericZIsOne) {
  GasProperties g;
  EXPECT_DOUBLE_EQ(cnga_z(5e4, g), 1.0);
  EXPECT_DOUBLE_EQ(pressure_from_density(0.0, g), 0.0);
}

TEST(Eos, RoundTrip) {
  GasProperties g;
  EXPECT_LT(eos_roundtrip_error(g), 1e-12);
  for (double p : {2e5, 30e5, 50e5, 70e5, 120e5})
    EXPECT_NEAR(pressure_from_density(density_from_pressure(p, g), g), p, 1e-8 * p);
}

TEST(Eos, Monotone) {
  GasProperties g;
  double prev = 0.0;
  for (double rho = 0.5; rho < 120.0; rho += 0.5) {
    const double p = pressure_from_density(rho, g);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Eos, RejectsNegativeInputs) {
  GasProperties g;
  EXPECT_THROW(cnga_z(-1.0, g), std::domain_error);
  EXPECT_THROW(pressure_from_density(-1.0, g), std::domain_error);
  EXPECT_THROW(density_from_pressure(-1.0, g), std::domain_error);
  g.gravity = 0.0;
  EXPECT_THROW(g.validate(), ValidationError);
}
