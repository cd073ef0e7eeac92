#pragma once

#include <numbers>

namespace nearprobe {

// SI defining constants (2019 redefinition). hbar is derived from h so that
// h == 2*pi*hbar holds to machine precision.
struct PhysicalConstants {
    double h = 6.62607015e-34;                          // J s
    double hbar = 6.62607015e-34 / (2.0 * std::numbers::pi);
    double k_B = 1.380649e-23;                          // J/K
    double c = 299792458.0;                             // m/s
};

inline constexpr PhysicalConstants si{};

// Two-level emitter on a closed optical transition. Derived fields are
// populated by make_species and must stay consistent with the raw ones.
struct AtomSpecies {
    double mass;                 // kg
    double linewidth;            // natural linewidth Gamma, rad/s
    double wavelength;           // m
    double wavenumber;           // 2*pi/wavelength, 1/m
    double recoil_temperature;   // hbar^2 k^2 / (2 m k_B), K
    double saturated_power;      // h c Gamma / (2 lambda), W
};

AtomSpecies make_species(double mass, double linewidth, double wavelength);

// Cesium D2 line: Gamma = 2*pi * 5.22 MHz, lambda = 852 nm. The mass is the
// standard atomic-mass-table value for Cs-133.
AtomSpecies cesium_defaults();

}  // namespace nearprobe
