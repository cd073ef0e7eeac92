#include "nearprobe/bound_states.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nearprobe/constants.hpp"
#include "nearprobe/quadrature.hpp"

namespace nearprobe {

namespace {

// Generalized Laguerre L_n^{alpha}(z) as (sign, log magnitude). The upward
// recurrence is run on rescaled values so intermediates never overflow.
struct SignedLog {
    double sign;
    double log_mag;  // -inf encodes zero
};

SignedLog laguerre_signed_log(int n, double alpha, double z) {
    if (n == 0) return {1.0, 0.0};
    double prev = 1.0;              // L_0
    double cur = 1.0 + alpha - z;   // L_1
    double log_scale = 0.0;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - z) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        const double mag = std::max(std::abs(cur), std::abs(prev));
        if (mag > 1e250) {
            cur *= 1e-250;
            prev *= 1e-250;
            log_scale += 250.0 * std::numbers::ln10;
        } else if (mag > 0.0 && mag < 1e-250) {
            cur *= 1e250;
            prev *= 1e250;
            log_scale -= 250.0 * std::numbers::ln10;
        }
    }
    if (cur == 0.0) return {0.0, -HUGE_VAL};
    return {cur > 0.0 ? 1.0 : -1.0, std::log(std::abs(cur)) + log_scale};
}

}  // namespace

BoundStateTable build_bound_states(const MorsePotential& p, double mass) {
    if (p.depth <= 0.0 || p.stiffness <= 0.0 || p.center <= 0.0) {
        throw std::invalid_argument("build_bound_states: Morse parameters must be positive");
    }
    if (mass <= 0.0) throw std::invalid_argument("build_bound_states: mass must be positive");

    BoundStateTable t;
    t.potential = p;
    t.mass = mass;
    t.omega = trap_frequency(p, mass);
    t.lambda = morse_lambda(p, mass);
    if (t.lambda <= 0.5) {
        throw std::invalid_argument("build_bound_states: potential supports no bound state (lambda = " +
                                    std::to_string(t.lambda) + " <= 1/2)");
    }
    int n_max = static_cast<int>(std::floor(t.lambda - 0.5));
    if (n_max + 0.5 >= t.lambda) --n_max;  // lambda - 1/2 integral: top state degenerates
    t.n_max = n_max;

    t.energies.resize(t.size());
    for (int n = 0; n <= n_max; ++n) {
        const double u = n + 0.5;
        const double e = si.hbar * t.omega * u -
                         si.hbar * si.hbar * t.omega * t.omega * u * u / (4.0 * p.depth);
        t.energies[n] = e - p.depth;
    }

    t.mean_distances.resize(t.size());
    for (int n = 0; n <= n_max; ++n) {
        t.mean_distances[n] = state_overlap(t, n, [](double d) { return d; });
    }
    return t;
}

double wavefunction(const BoundStateTable& table, int n, double d) {
    if (n < 0 || n > table.n_max) {
        throw std::out_of_range("wavefunction: state index " + std::to_string(n) +
                                " outside [0, " + std::to_string(table.n_max) + "]");
    }
    const double a = table.potential.stiffness;
    const double lam = table.lambda;
    const double x = a * (d - table.potential.center);
    const double log_z = std::log(2.0 * lam) - x;
    const double z = std::exp(log_z);
    const double alpha = 2.0 * lam - 2.0 * n - 1.0;

    // Norm^2 = a n! alpha / Gamma(2 lambda - n)
    const double log_norm = 0.5 * (std::log(a) + std::lgamma(n + 1.0) + std::log(alpha) -
                                   std::lgamma(2.0 * lam - n));
    const SignedLog lag = laguerre_signed_log(n, alpha, z);
    if (lag.sign == 0.0) return 0.0;
    const double log_psi = log_norm + (lam - n - 0.5) * log_z - 0.5 * z + lag.log_mag;
    if (log_psi < -700.0) return 0.0;
    return lag.sign * std::exp(log_psi);
}

double harmonic_wavefunction(double mass, double omega, double center, int n, double d) {
    if (n < 0) throw std::out_of_range("harmonic_wavefunction: negative state index");
    const double scale = std::sqrt(mass * omega / si.hbar);  // 1/length
    const double xi = scale * (d - center);
    // Normalized recurrence: phi_{n+1} = xi sqrt(2/(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1}
    double prev = 0.0;
    double cur = std::pow(scale * scale / std::numbers::pi, 0.25) * std::exp(-0.5 * xi * xi);
    for (int k = 0; k < n; ++k) {
        const double next =
            xi * std::sqrt(2.0 / (k + 1.0)) * cur - std::sqrt(k / (k + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

Domain quadrature_domain(const BoundStateTable& table) {
    const double a = table.potential.stiffness;
    double hi = 40.0 / a;
    if (!table.energies.empty()) {
        // the top state decays as exp(-kappa d) with kappa set by its binding
        // energy; extend the domain when it is barely bound
        const double e_top = table.energies.back();
        const double kappa = std::sqrt(-2.0 * table.mass * e_top) / si.hbar;
        const double rel = e_top / table.potential.depth;  // in (-1, 0)
        const double turn = -std::log(1.0 - std::sqrt(1.0 + rel)) / a;
        hi = std::max(hi, turn + 14.0 / kappa);
    }
    return {table.potential.center - 5.0 / a, table.potential.center + hi};
}

double state_overlap(const BoundStateTable& table, int n,
                     const std::function<double(double)>& f, double rel_tol) {
    const Domain dom = quadrature_domain(table);
    const int panels = std::max(128, 8 * (n + 1));
    return refined_simpson(
        [&](double d) {
            const double psi = wavefunction(table, n, d);
            return psi * psi * f(d);
        },
        dom.lo, dom.hi, rel_tol, panels);
}

std::vector<double> per_state_overlap(const BoundStateTable& table,
                                      const std::function<double(double)>& f, double rel_tol) {
    std::vector<double> out(table.size());
    for (int n = 0; n <= table.n_max; ++n) out[n] = state_overlap(table, n, f, rel_tol);
    return out;
}

}  // namespace nearprobe
