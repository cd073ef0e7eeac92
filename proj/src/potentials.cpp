#include "nearprobe/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include "nearprobe/constants.hpp"

namespace nearprobe {

double morse_energy(const MorsePotential& p, double d) {
    const double y = std::exp(-p.stiffness * (d - p.center));
    return p.depth * (y * y - 2.0 * y);
}

double morse_force(const MorsePotential& p, double d) {
    const double y = std::exp(-p.stiffness * (d - p.center));
    return 2.0 * p.depth * p.stiffness * (y * y - y);
}

double trap_frequency(const MorsePotential& p, double mass) {
    if (mass <= 0.0) throw std::invalid_argument("trap_frequency: mass must be positive");
    return p.stiffness * std::sqrt(2.0 * p.depth / mass);
}

double morse_lambda(const MorsePotential& p, double mass) {
    return std::sqrt(2.0 * mass * p.depth) / (p.stiffness * si.hbar);
}

double repulsive_energy(const RepulsivePotential& p, double d) {
    return p.amplitude * std::exp(-p.decay * (d - p.reference));
}

double repulsive_force(const RepulsivePotential& p, double d) {
    return p.amplitude * p.decay * std::exp(-p.decay * (d - p.reference));
}

}  // namespace nearprobe
