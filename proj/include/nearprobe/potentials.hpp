#pragma once

namespace nearprobe {

// Ground-state trap, U(d) = D [exp(-2a(d-d0)) - 2 exp(-a(d-d0))].
// Zero of energy at d -> infinity, minimum U(d0) = -D.
struct MorsePotential {
    double depth;      // D, J
    double stiffness;  // a, 1/m
    double center;     // d0, m
};

double morse_energy(const MorsePotential& p, double d);
double morse_force(const MorsePotential& p, double d);  // -dU/dd

// Harmonic frequency at the minimum, Omega = a sqrt(2 D / m).
double trap_frequency(const MorsePotential& p, double mass);

// Dimensionless well-depth parameter sqrt(2 m D) / (a hbar); the number of
// bound states is floor(lambda - 1/2) + 1.
double morse_lambda(const MorsePotential& p, double mass);

// Excited-state potential, U_e(d) = A exp(-b(d-d0)): purely repulsive,
// referenced to the ground-state minimum position.
struct RepulsivePotential {
    double amplitude;  // A, J
    double decay;      // b, 1/m
    double reference;  // d0, m
};

double repulsive_energy(const RepulsivePotential& p, double d);
double repulsive_force(const RepulsivePotential& p, double d);  // -dU/dd

}  // namespace nearprobe
