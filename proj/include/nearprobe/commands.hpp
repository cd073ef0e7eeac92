#pragma once

#include <optional>
#include <string>

#include "nearprobe/config.hpp"
#include "nearprobe/constants.hpp"
#include "nearprobe/thermal_context.hpp"

namespace nearprobe {

// Shared lazily-built state for the CLI commands. The Monte-Carlo heating
// table is cached on disk keyed by a content hash of the relevant settings.
class Workspace {
public:
    explicit Workspace(RunConfig cfg);

    const RunConfig& cfg() const { return cfg_; }
    RunConfig& cfg() { return cfg_; }
    const AtomSpecies& atom() const { return atom_; }
    MorsePotential trap() const;
    RepulsivePotential excited() const;
    CouplingProfile profile() const;

    const BoundStateTable& table();
    const PerStateCoupling& per_state();
    const HeatingTable& heating();
    const ThermalContext& context();

    void invalidate_coupling();  // after replacing the coupling profile

private:
    RunConfig cfg_;
    AtomSpecies atom_;
    std::optional<BoundStateTable> table_;
    std::optional<PerStateCoupling> psc_;
    std::optional<HeatingTable> heating_;
    std::optional<ThermalContext> ctx_;
};

void cmd_spectrum(Workspace& ws, const std::string& out_dir);
void cmd_coupling(Workspace& ws, const std::string& out_dir);
void cmd_heating(Workspace& ws, const std::string& out_dir);
void cmd_simulate(Workspace& ws, const std::string& out_dir);
void cmd_fit(Workspace& ws, const std::string& model_id, const std::string& data_path,
             std::optional<std::pair<double, double>> window_us, const std::string& out_dir);
void cmd_calibrate(Workspace& ws, const std::string& out_dir);

// Cooling-rate constant that makes the simulated OD-recovery time constant
// match `target_rate` (1/s) in the interleaved probe/cool sequence.
struct CoolingCalibration {
    double kappa_cool;          // 1/s
    double fitted_rate;         // 1/s, observable at kappa_cool
    double implied_peak_rate;   // K/s, kappa * (T_hot - T0)
};
CoolingCalibration calibrate_cooling_rate(const ThermalContext& ctx, DynamicsConfig dyn,
                                          double target_rate);

// Mean OD recovered during the cooling gaps of an interleaved trace.
double mean_od_recovery(const TransmissionTrace& trace);

}  // namespace nearprobe
