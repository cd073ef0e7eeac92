#pragma once

#include "nearprobe/constants.hpp"
#include "nearprobe/coupling.hpp"
#include "nearprobe/heating.hpp"
#include "nearprobe/interp.hpp"

namespace nearprobe {

// Precomputed temperature dependence of the ensemble quantities that the
// time-evolution loop needs: mean coupling, mean detuning and mean heating
// per scattering event, interpolated on a log-T grid. Rebuilt only when the
// upstream parameters change.
struct ThermalGrid {
    double t_min = 1e-7;   // K
    double t_max = 1e-2;   // K
    int points = 200;
};

class ThermalContext {
public:
    ThermalContext() = default;
    ThermalContext(const BoundStateTable& table, const PerStateCoupling& psc,
                   const HeatingTable& heating, const AtomSpecies& atom,
                   const ThermalGrid& grid = {});

    double beta_bar(double T) const;       // dimensionless
    double delta(double T) const;          // rad/s
    double heating_per_scatter(double T) const;  // K

    double beta_bar_inf() const { return beta_bar_inf_; }
    double trap_depth() const { return depth_; }
    double linewidth() const { return linewidth_; }
    double recoil_temperature() const { return recoil_; }

    bool recoil_only = false;  // replace heating/detuning by the bare photon recoil

private:
    MonotoneCubic beta_, delta_, dT_;
    double beta_bar_inf_ = 0.0;
    double depth_ = 0.0;
    double linewidth_ = 0.0;
    double recoil_ = 0.0;
};

// dT/dt = R_sc(s, delta(T)) * DeltaT(T).
double heating_rate(double s, double temperature, const ThermalContext& ctx);

}  // namespace nearprobe
