#pragma once

namespace gasnet::units {

inline constexpr double atmospheric_pressure = 101325.0;   // Pa
inline constexpr double pascal_per_psi = 6894.757293168361; // Pa
inline constexpr double pascal_per_bar = 1.0e5;
inline constexpr double universal_gas_constant = 8.31446;  // J/(mol K)
inline constexpr double air_molar_mass = 0.0289647;        // kg/mol
inline constexpr double mj_per_mmbtu = 1055.06;
inline constexpr double seconds_per_hour = 3600.0;
inline constexpr double pi = 3.14159265358979323846;

constexpr double bar(double v) { return v * pascal_per_bar; }
constexpr double to_bar(double pa) { return pa / pascal_per_bar; }
constexpr double hours(double h) { return h * seconds_per_hour; }
constexpr double to_hours(double s) { return s / seconds_per_hour; }
constexpr double kelvin_to_rankine(double k) { return k * 1.8; }

// MMBTU/h of gas at the given mass energy density [MJ/kg] -> kg/s.
constexpr double mmbtu_per_hour_to_kg_per_s(double mmbtu_h, double mj_per_kg) {
  return mmbtu_h * mj_per_mmbtu / mj_per_kg / seconds_per_hour;
}

} // namespace gasnet::units
