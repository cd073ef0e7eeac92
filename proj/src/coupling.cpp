#include "nearprobe/coupling.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nearprobe/constants.hpp"
#include "nearprobe/errors.hpp"
#include "nearprobe/quadrature.hpp"

namespace nearprobe {

namespace {

constexpr double kMinTemperature = 1e-8;  // 10 nK evaluation clamp

// Fixed-grid |Psi_n|^2 cache for repeated overlap evaluations (calibration
// loop). The grid is a converged composite-Simpson mesh over the standard
// domain; weights include the Simpson coefficients.
struct WavefunctionGrid {
    std::vector<double> d;        // nodes
    std::vector<double> w;       // Simpson weight * |Psi_n|^2, per state flattened
    int nodes = 0;
    int states = 0;

    double overlap(int n, const std::function<double(double)>& f) const {
        const double* row = w.data() + static_cast<size_t>(n) * nodes;
        double acc = 0.0;
        for (int i = 0; i < nodes; ++i) acc += row[i] * f(d[i]);
        return acc;
    }
};

WavefunctionGrid make_grid(const BoundStateTable& table, int panels) {
    const Domain dom = quadrature_domain(table);
    WavefunctionGrid g;
    g.nodes = panels + 1;
    g.states = table.size();
    g.d.resize(g.nodes);
    const double h = (dom.hi - dom.lo) / panels;
    for (int i = 0; i <= panels; ++i) g.d[i] = dom.lo + i * h;
    g.w.resize(static_cast<size_t>(g.states) * g.nodes);
    for (int n = 0; n < g.states; ++n) {
        double* row = g.w.data() + static_cast<size_t>(n) * g.nodes;
        for (int i = 0; i <= panels; ++i) {
            const double psi = wavefunction(table, n, g.d[i]);
            double coeff;
            if (i == 0 || i == panels) coeff = 1.0;
            else if (i % 2) coeff = 4.0;
            else coeff = 2.0;
            row[i] = coeff * h / 3.0 * psi * psi;
        }
    }
    return g;
}

}  // namespace

double beta_of_distance(const CouplingProfile& profile, double d) {
    if (d <= 0.0) throw std::invalid_argument("beta_of_distance: distance must be positive");
    return profile.beta_ref * std::exp(-(d - profile.reference) / profile.decay_length);
}

ThermalOccupation occupation(const BoundStateTable& table, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("occupation: temperature must be positive");
    }
    ThermalOccupation occ;
    occ.temperature = temperature;
    occ.weights.resize(table.size());
    if (std::isinf(temperature)) {
        const double p = 1.0 / table.size();
        for (double& w : occ.weights) w = p;
        return occ;
    }
    const double T = std::max(temperature, kMinTemperature);
    const double e0 = table.energies[0];
    double z = 0.0;
    for (int n = 0; n < table.size(); ++n) {
        occ.weights[n] = std::exp(-(table.energies[n] - e0) / (si.k_B * T));
        z += occ.weights[n];
    }
    for (double& w : occ.weights) w /= z;
    return occ;
}

PerStateCoupling per_state_coupling(const BoundStateTable& table, const CouplingProfile& profile,
                                    const RepulsivePotential& excited) {
    PerStateCoupling psc;
    psc.beta_n = per_state_overlap(
        table, [&](double d) { return beta_of_distance(profile, std::max(d, 1e-12)); });
    // Splitting offset so that delta = 0 for an atom sitting at the minimum.
    const double offset =
        repulsive_energy(excited, table.potential.center) + table.potential.depth;
    psc.delta_n = per_state_overlap(table, [&](double d) {
        return (repulsive_energy(excited, d) - morse_energy(table.potential, d) - offset) / si.hbar;
    });
    return psc;
}

double thermal_average(const std::vector<double>& values, const ThermalOccupation& occ) {
    if (values.size() != occ.weights.size()) {
        throw std::invalid_argument("thermal_average: state count mismatch");
    }
    double acc = 0.0;
    for (size_t n = 0; n < values.size(); ++n) acc += values[n] * occ.weights[n];
    return acc;
}

double mean_beta(const PerStateCoupling& psc, const ThermalOccupation& occ) {
    return thermal_average(psc.beta_n, occ);
}

double mean_detuning(const PerStateCoupling& psc, const ThermalOccupation& occ) {
    return thermal_average(psc.delta_n, occ);
}

double remaining_fraction(double depth, double temperature) {
    if (depth <= 0.0) throw std::invalid_argument("remaining_fraction: depth must be positive");
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("remaining_fraction: temperature must be positive");
    }
    if (std::isinf(temperature)) return 0.0;
    return 1.0 - std::exp(-depth / (si.k_B * temperature));
}

CalibrationResult calibrate_coupling(const CalibrationTargets& targets,
                                     const BoundStateTable& table) {
    const double v1 = targets.beta_hot, v2 = targets.beta_cold;
    if (!(0.0 < v1 && v1 < v2 && v2 < 0.5)) {
        throw std::invalid_argument(
            "calibrate_coupling: targets must satisfy 0 < beta_hot < beta_cold < 0.5");
    }
    if (!(targets.cold_temperature > 0.0)) {
        throw std::invalid_argument("calibrate_coupling: cold temperature must be positive");
    }

    const ThermalOccupation occ_cold = occupation(table, targets.cold_temperature);
    const ThermalOccupation occ_hot = occupation(table, HUGE_VAL);
    const WavefunctionGrid grid = make_grid(table, 16384);
    const double d0 = table.potential.center;

    // For fixed decay length the profile is linear in beta_ref, so only the
    // hot/cold ratio  r(L) = <g>_cold / <g>_hot  has to be solved for; g_n is
    // the per-state overlap of exp(-(d-d0)/L).
    auto ratio = [&](double L) {
        std::vector<double> g(table.size());
        for (int n = 0; n < table.size(); ++n) {
            g[n] = grid.overlap(n, [&](double d) { return std::exp(-(d - d0) / L); });
        }
        return thermal_average(g, occ_cold) / thermal_average(g, occ_hot);
    };

    const double want = v2 / v1;
    const double L_lo = 10e-9, L_hi = 1e-6;
    int iterations = 0;

    // Bracket on a log-spaced scan, then bisect. ratio decreases toward 1 as
    // the decay length grows.
    const int scan = 64;
    double a = 0.0, b = 0.0, fa = 0.0, fb = 0.0;
    double prev_L = 0.0, prev_f = 0.0;
    bool bracketed = false;
    for (int i = 0; i <= scan; ++i) {
        const double L = L_lo * std::pow(L_hi / L_lo, static_cast<double>(i) / scan);
        const double fv = ratio(L) - want;
        ++iterations;
        if (i > 0 && prev_f * fv <= 0.0) {
            a = prev_L;
            b = L;
            fa = prev_f;
            fb = fv;
            bracketed = true;
            break;
        }
        prev_L = L;
        prev_f = fv;
    }
    if (!bracketed) {
        std::ostringstream msg;
        msg << "calibrate_coupling: no decay length in [10 nm, 1 um] reaches cold/hot ratio "
            << want << " (scan range of ratios ended at " << prev_f + want << ")";
        throw NumericalError(msg.str());
    }

    for (int it = 0; it < 200 && (b - a) / b > 1e-10; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = ratio(mid) - want;
        ++iterations;
        if (fa * fm <= 0.0) {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
    }
    (void)fb;

    // Polish on the full adaptive-quadrature path; the cached grid above only
    // has to deliver a good bracket.
    auto exact_overlaps = [&](double L) {
        CouplingProfile unit{1.0, L, d0};
        return per_state_overlap(
            table, [&](double d) { return beta_of_distance(unit, std::max(d, 1e-12)); });
    };
    auto exact_ratio = [&](const std::vector<double>& g) {
        return thermal_average(g, occ_cold) / thermal_average(g, occ_hot);
    };
    double L_prev = a;
    double L_cur = b;
    double f_prev = exact_ratio(exact_overlaps(L_prev)) - want;
    std::vector<double> g_exact = exact_overlaps(L_cur);
    double f_cur = exact_ratio(g_exact) - want;
    iterations += 2;
    for (int it = 0; it < 12 && std::abs(f_cur) > 1e-9 * want && f_cur != f_prev; ++it) {
        const double L_next =
            std::clamp(L_cur - f_cur * (L_cur - L_prev) / (f_cur - f_prev), L_lo, L_hi);
        L_prev = L_cur;
        f_prev = f_cur;
        L_cur = L_next;
        g_exact = exact_overlaps(L_cur);
        f_cur = exact_ratio(g_exact) - want;
        ++iterations;
    }

    CalibrationResult res;
    res.profile.decay_length = L_cur;
    res.profile.reference = d0;
    res.profile.beta_ref = v1 / thermal_average(g_exact, occ_hot);
    if (res.profile.beta_ref <= 1e-4 || res.profile.beta_ref >= 0.4) {
        throw NumericalError("calibrate_coupling: beta_ref " +
                             std::to_string(res.profile.beta_ref) +
                             " outside the search box (1e-4, 0.4)");
    }

    std::vector<double> beta_n(g_exact);
    for (double& v : beta_n) v *= res.profile.beta_ref;
    const double got_hot = thermal_average(beta_n, occ_hot);
    const double got_cold = thermal_average(beta_n, occ_cold);
    res.residual = std::max(std::abs(got_hot - v1) / v1, std::abs(got_cold - v2) / v2);
    res.beta_100uK = thermal_average(beta_n, occupation(table, 100e-6));
    res.iterations = iterations;
    if (res.residual > 1e-6) {
        std::ostringstream msg;
        msg << "calibrate_coupling: residual " << res.residual << " exceeds 1e-6 (hot " << got_hot
            << " vs " << v1 << ", cold " << got_cold << " vs " << v2 << ")";
        throw NumericalError(msg.str());
    }
    return res;
}

}  // namespace nearprobe
