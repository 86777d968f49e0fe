#pragma once

#include <numbers>

// Physical constants and the human-unit conversions used at the I/O boundary.
// Internally every frequency and rate is an angular quantity in rad/s, every
// temperature is in kelvin and every power is in watts.
namespace noisefridge::units {

inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;     // J / K
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Cyclic frequency in GHz/MHz/kHz (the "/2π" values quoted in lab notebooks)
// to angular frequency in rad/s.
constexpr double from_ghz(double f) { return kTwoPi * f * 1e9; }
constexpr double from_mhz(double f) { return kTwoPi * f * 1e6; }
constexpr double from_khz(double f) { return kTwoPi * f * 1e3; }

constexpr double to_ghz(double omega) { return omega / (kTwoPi * 1e9); }
constexpr double to_mhz(double omega) { return omega / (kTwoPi * 1e6); }

constexpr double from_millikelvin(double t) { return t * 1e-3; }
constexpr double to_millikelvin(double t) { return t * 1e3; }

constexpr double to_attowatt(double watts) { return watts * 1e18; }

}  // namespace noisefridge::units
