#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gasnet/noise.hpp"

using namespace gasnet;

TEST(Noise, CalibratedGamma) {
  EXPECT_NEAR(calibrate_ou(1.0, 0.01, 1.0 / 3600.0), 0.0023570226039551583, 1e-15);
  EXPECT_NEAR(calibrate_ou(50.0, 0.01, 1.0 / 3600.0), 50.0 * 0.0023570226039551583, 1e-12);
  EXPECT_THROW(calibrate_ou(0.0, 0.01, 1.0), ValidationError);
}

TEST(Noise, ZeroGammaIsIdentity) {
  const auto d = Profile::from_samples(4, {0, 3600}, {10, 20}, Interpolation::linear);
  EXPECT_EQ(ou_sample_path(d, 1e-3, 0.0, 300, 1, 7200), d);
  EXPECT_EQ(uniform_noise(d, 0.0, 300, 1, 7200), d);
}

TEST(Noise, SeededPathsAreReproducible) {
  const auto d = Profile::constant(4, 100.0);
  const double g = calibrate_ou(100.0, 0.01, 1.0 / 3600.0);
  const auto a = ou_sample_path(d, 1.0 / 3600.0, g, 300, 17, 86400);
  const auto b = ou_sample_path(d, 1.0 / 3600.0, g, 300, 17, 86400);
  const auto c = ou_sample_path(d, 1.0 / 3600.0, g, 300, 18, 86400);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_DOUBLE_EQ(a(0.0), 100.0);
}

TEST(Noise, NodesDrawIndependentStreams) {
  const double g = calibrate_ou(100.0, 0.01, 1.0 / 3600.0);
  const auto a = ou_sample_path(Profile::constant(4, 100.0), 1.0 / 3600.0, g, 300, 5, 86400);
  const auto b = ou_sample_path(Profile::constant(5, 100.0), 1.0 / 3600.0, g, 300, 5, 86400);
  EXPECT_NE(a.left_values(), b.left_values());
}

// Exact transition: Var(X_t - d) = gamma^2 (1 - e^{-2 alpha t}) / (2 alpha).
TEST(Noise, OuVarianceMatchesExactTransition) {
  const double alpha = 1.0 / 3600.0, mu = 80.0;
  const double g = calibrate_ou(mu, 0.01, alpha);
  const auto d = Profile::constant(2, mu);
  const int n = 4000;
  for (double t : {1800.0, 36000.0}) {
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = ou_sample_path(d, alpha, g, 300, 1000 + i, t)(t) - mu;
      s += x;
      ss += x * x;
    }
    const double var = (ss - s * s / n) / (n - 1);
    const double want = g * g * -std::expm1(-2.0 * alpha * t) / (2.0 * alpha);
    EXPECT_NEAR(var / want, 1.0, 0.08) << t;
    EXPECT_NEAR(s / n, 0.0, 4.0 * std::sqrt(want / n));
  }
}

TEST(Noise, UniformNoiseStaysInBand) {
  const auto d = Profile::from_samples(3, {0, 7200}, {50, 150}, Interpolation::linear);
  const auto u = uniform_noise(d, 0.05, 300, 9, 7200);
  for (double t = 0; t <= 7200; t += 300) EXPECT_LE(std::abs(u(t) - d(t)), 0.025 * d(t) + 1e-12);
}

TEST(Noise, SpecValidation) {
  NoiseSpec s;
  s.dt = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.alpha = -1.0;
  EXPECT_THROW(s.validate(), ValidationError);
}
