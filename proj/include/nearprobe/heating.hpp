#pragma once

#include <cstdint>
#include <vector>

#include "nearprobe/bound_states.hpp"
#include "nearprobe/coupling.hpp"
#include "nearprobe/potentials.hpp"

namespace nearprobe {

// Two-level scattering rate R_sc = Gamma/2 * s / (1 + s + (2 delta/Gamma)^2).
double scattering_rate(double s, double detuning, double linewidth);

enum class OrbitSampling { TimeWeighted, UniformPosition };

struct McSettings {
    long samples_per_state = 100000;  // >= 1e4
    uint64_t seed = 20260811ull;
    int threads = 0;  // 0: hardware concurrency
    OrbitSampling sampling = OrbitSampling::TimeWeighted;
};

struct StateHeating {
    double mean_gain;      // K, mean energy gain per scattering event / k_B
    double standard_error; // K
};

// Mean heating for one initial bound energy: classical phase-space samples on
// the ground-state orbit, propagated in the excited potential for an
// exponentially distributed dwell, then re-scored in the ground potential.
// Deterministic for fixed (seed, samples); independent of thread count.
StateHeating excited_dwell_heating(double energy, const MorsePotential& ground,
                                   const RepulsivePotential& excited, double mass,
                                   double linewidth, const McSettings& settings,
                                   int state_index = 0);

struct HeatingTable {
    std::vector<double> delta_T;         // K, per state
    std::vector<double> standard_error;  // K
    double recoil_temperature = 0.0;     // K
    long samples = 0;
    uint64_t seed = 0;
};

// Half period of the classical orbit at this energy, from the leapfrog
// propagation used for initial-condition sampling. Diagnostic; the analytic
// value is pi / (Omega sqrt(-E/D)).
double classical_half_period(const MorsePotential& ground, double energy, double mass);

HeatingTable build_heating_table(const BoundStateTable& table, const RepulsivePotential& excited,
                                 double recoil_temperature, double linewidth,
                                 const McSettings& settings);

// Delta T(T) = sum_n (Delta T_n + T_rec) P_n(T).
double mean_heating_per_scatter(const HeatingTable& heating, const ThermalOccupation& occ);

}  // namespace nearprobe
