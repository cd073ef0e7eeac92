#pragma once

#include <variant>
#include <vector>

#include "nearprobe/thermal_context.hpp"

namespace nearprobe {

struct ProbeSegment {
    double duration;    // s
    double power_norm;  // P_in / P_sat(T -> inf), >= 0
};
struct CoolSegment {
    double duration;  // s
};
struct WaitSegment {
    double duration;  // s
};
// Instantaneous optical-depth readout without probe back-action.
struct ReadoutSegment {};

using Segment = std::variant<ProbeSegment, CoolSegment, WaitSegment, ReadoutSegment>;

struct PulseSchedule {
    std::vector<Segment> segments;
};

struct DynamicsConfig {
    double initial_temperature = 1e-6;  // K, also the cooling floor
    double passive_rate = 6e-3;         // K/s during waits
    double cooling_rate = 369.649379;   // 1/s exponential relaxation (calibrated)
    double rel_tol = 1e-7;              // ODE relative tolerance
    double sample_period = 1e-6;        // s, trace sampling during probes
    double atom_number = 29.0;          // N0
};

struct SimState {
    double time = 0.0;              // s
    double temperature = 0.0;       // K
    double peak_temperature = 0.0;  // K, running maximum
    double survival = 1.0;          // surviving fraction, non-increasing
    double atom_number0 = 0.0;      // N0
};

SimState initial_state(const DynamicsConfig& cfg);

// Surviving atom number N = N0 * survival. Loss is irreversible: every
// temperature increase from T1 to T2 multiplies the survival by
// f(T2)/f(T1) with f(T) = 1 - exp(-D / k_B T), the equilibrium fraction
// below the trap depth. On a single monotone heating ramp this telescopes
// to f(T); over repeated heat/cool cycles the loss accumulates while
// cooling only restores the coupling.
double survived_count(const SimState& s, const ThermalContext& ctx);

// s = P_norm * beta_bar(T) / beta_bar(inf); the probe power is normalized to
// the hot-ensemble saturation power.
double saturation_parameter(double power_norm, double beta_bar, double beta_bar_inf);

// transmission = (1 - 2 beta_bar)^(2 N); requires beta_bar < 0.5.
double transmission(double beta_bar, double atom_number);

// Right-hand side of the transmission law's long-time approximation,
// exp(-OD0 exp(-gamma t)).
double double_exp_transmission(double od0, double gamma, double t);

// Optical depth of the current state, -2 N ln(1 - 2 beta_bar(T)).
double instant_od(const SimState& s, const ThermalContext& ctx);

// Segment steppers. Probe integrates dT/dt = R_sc(s(T), T) DeltaT(T) with an
// adaptive embedded Runge-Kutta pair; cool relaxes T exponentially toward the
// floor (loss is not undone); wait applies the passive linear heating.
SimState step_probe(SimState s, double dt, double power_norm, const ThermalContext& ctx,
                    const DynamicsConfig& cfg);
SimState step_cool(SimState s, double dt, const DynamicsConfig& cfg);
SimState step_wait(SimState s, double dt, const ThermalContext& ctx, const DynamicsConfig& cfg);

struct TransmissionTrace {
    std::vector<double> time;          // s, global
    std::vector<double> value;         // transmission in [0, 1]
    std::vector<double> temperature;   // K
    std::vector<double> atoms;         // N
    std::vector<double> beta;          // beta_bar
    std::vector<int> segment;          // index of the probe segment a sample belongs to
    std::vector<double> readout_time;  // s
    std::vector<double> readout_od;
};

TransmissionTrace run_schedule(const PulseSchedule& schedule, const DynamicsConfig& cfg,
                               const ThermalContext& ctx);

// Probe samples concatenated on a cumulative probe-time axis.
struct StitchedTrace {
    std::vector<double> probe_time;  // s
    std::vector<double> value;
    std::vector<int> segment;
};

StitchedTrace stitch(const TransmissionTrace& trace);

// [first, last] sample index of each probe segment, in order.
std::vector<std::pair<size_t, size_t>> probe_sample_ranges(const TransmissionTrace& trace);

}  // namespace nearprobe
