#include "nearprobe/thermal_context.hpp"

#include <cmath>
#include <stdexcept>

namespace nearprobe {

ThermalContext::ThermalContext(const BoundStateTable& table, const PerStateCoupling& psc,
                               const HeatingTable& heating, const AtomSpecies& atom,
                               const ThermalGrid& grid) {
    if (grid.points < 8 || !(grid.t_min > 0.0) || !(grid.t_max > grid.t_min)) {
        throw std::invalid_argument("ThermalContext: bad temperature grid");
    }
    depth_ = table.potential.depth;
    linewidth_ = atom.linewidth;
    recoil_ = atom.recoil_temperature;

    std::vector<double> log_t(grid.points), bb(grid.points), dd(grid.points), tt(grid.points);
    for (int i = 0; i < grid.points; ++i) {
        const double f = static_cast<double>(i) / (grid.points - 1);
        const double T = grid.t_min * std::pow(grid.t_max / grid.t_min, f);
        const ThermalOccupation occ = occupation(table, T);
        log_t[i] = std::log(T);
        bb[i] = mean_beta(psc, occ);
        dd[i] = mean_detuning(psc, occ);
        tt[i] = mean_heating_per_scatter(heating, occ);
    }
    beta_ = MonotoneCubic(log_t, bb);
    delta_ = MonotoneCubic(log_t, dd);
    dT_ = MonotoneCubic(log_t, tt);
    beta_bar_inf_ = mean_beta(psc, occupation(table, HUGE_VAL));
}

double ThermalContext::beta_bar(double T) const { return beta_(std::log(std::max(T, 1e-12))); }

double ThermalContext::delta(double T) const {
    if (recoil_only) return 0.0;
    return delta_(std::log(std::max(T, 1e-12)));
}

double ThermalContext::heating_per_scatter(double T) const {
    if (recoil_only) return recoil_;
    return dT_(std::log(std::max(T, 1e-12)));
}

double heating_rate(double s, double temperature, const ThermalContext& ctx) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("heating_rate: temperature must be positive");
    }
    return scattering_rate(s, ctx.delta(temperature), ctx.linewidth()) *
           ctx.heating_per_scatter(temperature);
}

}  // namespace nearprobe
