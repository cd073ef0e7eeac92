#include "nearprobe/constants.hpp"

#include <stdexcept>

namespace nearprobe {

AtomSpecies make_species(double mass, double linewidth, double wavelength) {
    if (mass <= 0.0 || linewidth <= 0.0 || wavelength <= 0.0) {
        throw std::invalid_argument("make_species: mass, linewidth and wavelength must be positive");
    }
    AtomSpecies a;
    a.mass = mass;
    a.linewidth = linewidth;
    a.wavelength = wavelength;
    a.wavenumber = 2.0 * std::numbers::pi / wavelength;
    a.recoil_temperature =
        si.hbar * si.hbar * a.wavenumber * a.wavenumber / (2.0 * mass * si.k_B);
    a.saturated_power = si.h * si.c * linewidth / (2.0 * wavelength);
    return a;
}

AtomSpecies cesium_defaults() {
    const double mass = 2.20694650e-25;                       // kg, Cs-133
    const double linewidth = 2.0 * std::numbers::pi * 5.22e6; // rad/s
    const double wavelength = 852.0e-9;                       // m
    return make_species(mass, linewidth, wavelength);
}

}  // namespace nearprobe
