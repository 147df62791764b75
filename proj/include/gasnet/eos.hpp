#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gasnet/errors.hpp"
#include "gasnet/units.hpp"

namespace gasnet {

enum class EosMode { cnga, ideal };

/// Thermodynamic closure shared by the whole simulator.
///
/// The gas is isothermal at `temperature`; the specific gas constant follows
/// from the gravity relative to air. In `EosMode::cnga` the compressibility
/// factor uses the CNGA correlation on gauge pressure in psig and Rankine
/// temperature; `EosMode::ideal` pins Z to one for analytic checks.
struct GasProperties {
  double temperature = 288.15;  // K
  double gravity = 0.6;         // relative to air
  double energy_density = 52.0; // MJ/kg
  EosMode mode = EosMode::cnga;

  // Overrides the gravity-derived gas constant when positive (ideal-gas tests).
  double gas_constant_override = 0.0;

  double gas_constant() const {
    if (gas_constant_override > 0.0) return gas_constant_override;
    return units::universal_gas_constant / (gravity * units::air_molar_mass);
  }

  double rt() const { return gas_constant() * temperature; }

  // CNGA coefficient b(G, T) in 1/psi.
  double cnga_coefficient() const {
    const double tr = units::kelvin_to_rankine(temperature);
    return 344400.0 * std::pow(10.0, 1.785 * gravity) / std::pow(tr, 3.825);
  }

  // Coefficient of gauge pressure in Pa: Z = 1 / (1 + beta * p_gauge).
  double beta() const {
    if (mode == EosMode::ideal) return 0.0;
    return cnga_coefficient() / units::pascal_per_psi;
  }

  void validate() const {
    if (!(temperature > 0.0)) throw ValidationError("gas temperature must be positive");
    if (!(gravity > 0.0)) throw ValidationError("gas gravity must be positive");
    if (!(energy_density > 0.0)) throw ValidationError("gas energy density must be positive");
  }
};

/// Compressibility factor at absolute pressure `p` [Pa].
///
/// Below atmospheric the gauge pressure is clamped at zero, so Z = 1 there
/// and the closure stays invertible down to vacuum.
inline double cnga_z(double p, const GasProperties& props) {
  if (!(p >= 0.0)) throw std::domain_error("cnga_z: pressure must be non-negative");
  const double gauge = std::max(p - units::atmospheric_pressure, 0.0);
  return 1.0 / (1.0 + props.beta() * gauge);
}

/// Absolute pressure [Pa] for density `rho` [kg/m^3].
///
/// Solves p (1 + beta (p - p_atm)) = R T rho in closed form using the
/// cancellation-free root of the quadratic.
inline double pressure_from_density(double rho, const GasProperties& props) {
  if (!(rho >= 0.0)) throw std::domain_error("pressure_from_density: density must be non-negative");
  const double rhs = props.rt() * rho;
  const double beta = props.beta();
  if (rhs <= units::atmospheric_pressure || beta == 0.0) return rhs;
  const double b = 1.0 - beta * units::atmospheric_pressure;
  const double disc = b * b + 4.0 * beta * rhs;
  if (!(disc >= 0.0)) throw NumericalError("pressure_from_density: no non-negative root");
  return 2.0 * rhs / (b + std::sqrt(disc));
}

/// Density [kg/m^3] at absolute pressure `p` [Pa].
inline double density_from_pressure(double p, const GasProperties& props) {
  if (!(p >= 0.0)) throw std::domain_error("density_from_pressure: pressure must be non-negative");
  return p / (cnga_z(p, props) * props.rt());
}

/// Isothermal wave speed sqrt(p/rho) [m/s]. This bounds sqrt(dp/drho) from
/// above for the CNGA closure, so CFL limits built on it are conservative.
inline double sound_speed(double rho, const GasProperties& props) {
  if (!(rho > 0.0)) throw std::domain_error("sound_speed: density must be positive");
  return std::sqrt(pressure_from_density(rho, props) / rho);
}

} // namespace gasnet
