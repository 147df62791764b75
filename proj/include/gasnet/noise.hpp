#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gasnet/errors.hpp"
#include "gasnet/profile.hpp"

namespace gasnet {

enum class NoiseKind { none, ou, uniform };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::ou: return "ou";
    case NoiseKind::uniform: return "uniform";
  }
  return "?";
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double alpha = 1.0 / 3600.0;  // 1/s, mean-reversion rate
  double gamma = -1.0;          // kg/s per sqrt(s); negative means calibrate from variance_ratio
  double variance_ratio = 0.01; // stationary variance / mean^2
  double width_fraction = 0.05; // uniform noise, full width relative to d(t)
  double dt = 300.0;            // s, sampling interval of the perturbation
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha > 0.0)) throw ValidationError("noise: alpha must be positive");
    if (!(variance_ratio >= 0.0)) throw ValidationError("noise: variance_ratio must be non-negative");
    if (!(width_fraction >= 0.0)) throw ValidationError("noise: width_fraction must be non-negative");
    if (!(dt > 0.0)) throw ValidationError("noise: dt must be positive");
  }
};

/// gamma such that the stationary variance gamma^2 / (2 alpha) equals
/// variance_ratio * mu^2.
inline double calibrate_ou(double mu, double variance_ratio, double alpha) {
  if (!(mu > 0.0)) throw ValidationError("calibrate_ou: mean withdrawal must be positive");
  if (!(variance_ratio >= 0.0)) throw ValidationError("calibrate_ou: variance_ratio must be non-negative");
  if (!(alpha > 0.0)) throw ValidationError("calibrate_ou: alpha must be positive");
  return mu * std::sqrt(2.0 * alpha * variance_ratio);
}

namespace detail {

// Independent stream per (seed, node).
inline std::mt19937_64 node_engine(std::uint64_t seed, int node) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(node)};
  return std::mt19937_64(seq);
}

inline std::vector<double> sample_grid(double t0, double t1, double dt) {
  std::vector<double> t;
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
  for (std::size_t k = 0; k <= n; ++k) t.push_back(t0 + static_cast<double>(k) * dt);
  return t;
}

} // namespace detail

/// OU perturbation of d on [d.start(), until], sampled every dt with the
/// exact transition X_{k+1} - d = (X_k - d) e^{-alpha dt} + sigma xi_k and
/// X_0 = d(t_0). Between samples the deviation is linear, so the result is
/// d plus a piecewise-linear excursion.
inline Profile ou_sample_path(const Profile& d, double alpha, double gamma, double dt, std::uint64_t seed,
                              double until) {
  if (!(alpha > 0.0)) throw ValidationError("ou_sample_path: alpha must be positive");
  if (!(gamma >= 0.0)) throw ValidationError("ou_sample_path: gamma must be non-negative");
  if (!(dt > 0.0)) throw ValidationError("ou_sample_path: dt must be positive");
  if (gamma == 0.0) return d;

  const auto t = detail::sample_grid(d.start(), std::max(until, d.start()), dt);
  const double decay = std::exp(-alpha * dt);
  const double sigma = gamma * std::sqrt(-std::expm1(-2.0 * alpha * dt) / (2.0 * alpha));
  auto eng = detail::node_engine(seed, d.node());
  std::normal_distribution<double> xi(0.0, 1.0);

  std::vector<double> y(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) y[k] = y[k - 1] * decay + sigma * xi(eng);
  const auto dev = Profile::from_samples(d.node(), t, y, Interpolation::linear);
  return d + dev;
}

/// Independent uniform draws on [-w/2, w/2] * d(t_k) at every sample after
/// the first; the start is left unperturbed so initial loads stay balanced.
inline Profile uniform_noise(const Profile& d, double width_fraction, double dt, std::uint64_t seed, double until) {
  if (!(width_fraction >= 0.0)) throw ValidationError("uniform_noise: width_fraction must be non-negative");
  if (width_fraction == 0.0) return d;
  const auto t = detail::sample_grid(d.start(), std::max(until, d.start()), dt);
  auto eng = detail::node_engine(seed, d.node());
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> y(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) y[k] = width_fraction * u(eng) * d(t[k]);
  return d + Profile::from_samples(d.node(), t, y, Interpolation::linear);
}

} // namespace gasnet
