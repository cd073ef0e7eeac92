#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearprobe/dynamics.hpp"
#include "nearprobe/heating.hpp"

namespace nearprobe {

enum class SweepParameter { None, ProbePower, FirstWait, CoolDuration };

// Fully validated run configuration. Defaults reproduce the reference trap;
// every physical quantity is stored in SI after parsing. Config keys carry
// unit suffixes (depth_uK, stiffness_per_um, ...) to keep files unambiguous.
struct RunConfig {
    // trap.*
    double trap_depth = 240e-6 * 1.380649e-23;  // J  (240 uK k_B)
    double trap_stiffness = 5.84e6;             // 1/m
    double trap_center = 231e-9;                // m

    // atom.*
    double atom_mass = 2.20694650e-25;                       // kg
    double atom_linewidth = 2.0 * 3.14159265358979323846 * 5.22e6;  // rad/s
    double atom_wavelength = 852e-9;                         // m

    // excited.*  (defaults from the transient-transmission calibration)
    double excited_amplitude = 480e-6 * 1.380649e-23;  // J
    double excited_decay = 10.22e6;                    // 1/m

    // coupling.*  (defaults from the two-point calibration)
    double coupling_beta_ref = 0.0242017727;        // at the trap center
    double coupling_decay_length = 88.95446058e-9;  // m

    // calibration.*
    double calib_beta_hot = 0.012;
    double calib_beta_cold = 0.024;
    double calib_cold_temperature = 1e-6;  // K

    // mc.*
    long mc_samples = 100000;
    uint64_t mc_seed = 20260811ull;
    OrbitSampling mc_sampling = OrbitSampling::TimeWeighted;
    std::string mc_cache_dir = "mc-cache";

    // dynamics.*
    DynamicsConfig dynamics;
    bool recoil_only = false;

    // table.*
    ThermalGrid grid;

    // schedule.*
    PulseSchedule schedule;

    // sweep.*
    SweepParameter sweep_parameter = SweepParameter::None;
    std::vector<double> sweep_values;

    // analysis.*
    bool analysis_flank_metrics = false;
    bool analysis_od_recovery = false;

    int threads = 0;  // CLI override; 0 = hardware concurrency
};

// Parse `path` on top of defaults. Unknown keys, malformed values and
// duplicate scalar keys fail with a `file:line:` anchored ConfigError.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Post-parse validation (also applied to the built-in defaults).
void validate(const RunConfig& cfg);

// "20us", "8ms", "1.5s" -> seconds.
double parse_duration(const std::string& token);

}  // namespace nearprobe
