#pragma once

#include <vector>

#include "nearprobe/bound_states.hpp"
#include "nearprobe/potentials.hpp"

namespace nearprobe {

// Guided-mode coupling versus distance: beta(d) = beta_ref exp(-(d-d0)/decay_length).
struct CouplingProfile {
    double beta_ref;      // value at the reference distance, in (0, 0.5)
    double decay_length;  // m
    double reference;     // m, the trap minimum d0
};

double beta_of_distance(const CouplingProfile& profile, double d);

// Truncated Boltzmann weights over the bound states. temperature may be
// +infinity (equal weights). Weights sum to one.
struct ThermalOccupation {
    double temperature;           // K
    std::vector<double> weights;  // size n_max + 1
};

ThermalOccupation occupation(const BoundStateTable& table, double temperature);

// State-resolved coupling and probe detuning. delta_n is referenced so that
// an atom at the potential minimum is resonant (delta = 0 at d0).
struct PerStateCoupling {
    std::vector<double> beta_n;   // dimensionless
    std::vector<double> delta_n;  // rad/s
};

PerStateCoupling per_state_coupling(const BoundStateTable& table, const CouplingProfile& profile,
                                    const RepulsivePotential& excited);

double thermal_average(const std::vector<double>& values, const ThermalOccupation& occ);
double mean_beta(const PerStateCoupling& psc, const ThermalOccupation& occ);
double mean_detuning(const PerStateCoupling& psc, const ThermalOccupation& occ);

// Fraction of a thermal ensemble with energy below the trap depth:
// 1 - exp(-D / (k_B T)).
double remaining_fraction(double depth, double temperature);

// Two-point calibration of (beta_ref, decay_length) against
// mean beta at T -> infinity (beta_hot) and at cold_temperature (beta_cold).
struct CalibrationTargets {
    double beta_hot;
    double beta_cold;
    double cold_temperature;  // K
};

struct CalibrationResult {
    CouplingProfile profile;
    double residual;      // max relative target mismatch
    double beta_100uK;    // cross-check value
    int iterations;
};

CalibrationResult calibrate_coupling(const CalibrationTargets& targets,
                                     const BoundStateTable& table);

}  // namespace nearprobe
