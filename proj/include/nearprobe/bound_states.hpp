#pragma once

#include <functional>
#include <vector>

#include "nearprobe/potentials.hpp"

namespace nearprobe {

// Bound spectrum of a Morse potential. Energies are threshold-referenced
// (negative for bound states); energy_above_minimum gives the same levels
// measured from the bottom of the well. Immutable after construction.
struct BoundStateTable {
    MorsePotential potential;
    double mass = 0.0;
    double omega = 0.0;   // rad/s
    double lambda = 0.0;  // sqrt(2 m D)/(a hbar)
    int n_max = -1;
    std::vector<double> energies;        // J, E_n < 0
    std::vector<double> mean_distances;  // m, <d>_n

    int size() const { return n_max + 1; }
    double energy_above_minimum(int n) const { return energies.at(n) + potential.depth; }
};

// Fails if the potential supports no bound state (lambda <= 1/2).
BoundStateTable build_bound_states(const MorsePotential& p, double mass);

// Normalized radial eigenfunction, units 1/sqrt(m). Evaluated through the
// associated-Laguerre recurrence in log-magnitude/sign form; stable up to
// the highest bound state.
double wavefunction(const BoundStateTable& table, int n, double d);

// Harmonic-oscillator eigenfunction of frequency omega centered at `center`,
// used for contrasting state-resolved couplings against the Morse case.
double harmonic_wavefunction(double mass, double omega, double center, int n, double d);

// Integration domain that contains every bound state to well below any
// tolerance used here: (d0 - 5/a, d0 + 40/a).
struct Domain {
    double lo, hi;
};
Domain quadrature_domain(const BoundStateTable& table);

// Quadrature of |Psi_n(d)|^2 f(d) over the standard domain for every bound
// state, refined to rel_tol. f must be finite on the domain.
std::vector<double> per_state_overlap(const BoundStateTable& table,
                                      const std::function<double(double)>& f,
                                      double rel_tol = 1e-8);
double state_overlap(const BoundStateTable& table, int n,
                     const std::function<double(double)>& f, double rel_tol = 1e-8);

}  // namespace nearprobe
