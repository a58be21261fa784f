#pragma once

#include <numbers>

// Dimensionless units: hbar = 2m = e0 = 1. On an edge with potential V the
// dispersion is E = k^2 + V; in a lead (V = 0) the group velocity is v = 2k.
namespace qnet::units {

inline constexpr double hbar = 1.0;
inline constexpr double two_m = 1.0;
inline constexpr double e0 = 1.0;
inline constexpr double h = 2.0 * std::numbers::pi * hbar;

/// Reference length l of the e0*U1*l axis; lengths are measured in units of l.
inline constexpr double reference_length = 1.0;

inline constexpr const char* description =
    "hbar = 2m = e0 = 1, h = 2*pi, E = k^2 + V, lengths in units of l = 1";

}  // namespace qnet::units
