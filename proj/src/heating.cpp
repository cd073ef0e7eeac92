#include "nearprobe/heating.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "nearprobe/constants.hpp"
#include "nearprobe/errors.hpp"
#include "nearprobe/rng.hpp"

namespace nearprobe {

double scattering_rate(double s, double detuning, double linewidth) {
    if (s < 0.0) throw std::invalid_argument("scattering_rate: saturation must be >= 0");
    const double q = 2.0 * detuning / linewidth;
    return 0.5 * linewidth * s / (1.0 + s + q * q);
}

namespace {

// Half orbit in the ground potential at fixed energy, stored at uniform time
// steps from the inner turning point (p = 0) to the outer one. Leapfrog with
// a step well below both the harmonic period and the inner-bounce time.
struct ClassicalOrbit {
    std::vector<double> pos, mom;  // sampled at k * dt
    double dt = 0.0;
    double half_period = 0.0;
    double d_inner = 0.0, d_outer = 0.0;

    // time-weighted draw over a full period; u, v in [0,1)
    void sample(double u, double v, double* d, double* p) const {
        const double t = u * half_period;
        const size_t i = std::min(pos.size() - 2, static_cast<size_t>(t / dt));
        const double frac = t / dt - static_cast<double>(i);
        *d = pos[i] + frac * (pos[i + 1] - pos[i]);
        *p = mom[i] + frac * (mom[i + 1] - mom[i]);
        if (v >= 0.5) *p = -*p;  // returning half of the orbit
    }
};

ClassicalOrbit compute_orbit(double energy, const MorsePotential& ground, double mass,
                             double omega) {
    // Turning points of D(y^2 - 2y) = E, y = exp(-a(d-d0)).
    const double rel = energy / ground.depth;  // in (-1, 0)
    if (!(rel > -1.0 && rel < 0.0)) {
        throw std::invalid_argument("compute_orbit: energy must lie inside the well");
    }
    const double root = std::sqrt(1.0 + rel);
    ClassicalOrbit orbit;
    orbit.d_inner = ground.center - std::log(1.0 + root) / ground.stiffness;
    orbit.d_outer = ground.center - std::log(1.0 - root) / ground.stiffness;

    const double dt = 2.0 * std::numbers::pi / omega / 200.0;
    orbit.dt = dt;
    double d = orbit.d_inner;
    double p = 0.0;
    orbit.pos.push_back(d);
    orbit.mom.push_back(p);
    // Kick-drift-kick until the momentum turns around at the outer point.
    for (long step = 0; step < 100000000L; ++step) {
        const double p_half = p + 0.5 * dt * morse_force(ground, d);
        d += dt * p_half / mass;
        const double p_new = p_half + 0.5 * dt * morse_force(ground, d);
        if (p_new < 0.0 && d > ground.center) {
            orbit.pos.push_back(d);
            orbit.mom.push_back(0.0);
            orbit.half_period = dt * static_cast<double>(orbit.pos.size() - 1);
            break;
        }
        p = p_new;
        orbit.pos.push_back(d);
        orbit.mom.push_back(p);
    }
    if (orbit.half_period == 0.0) {
        throw NumericalError("compute_orbit: no turning point found");
    }
    return orbit;
}

// Position-space draw: d uniform between the turning points, |p| from energy
// conservation. Alternative initial-condition measure, selectable in config.
void sample_uniform_position(const ClassicalOrbit& orbit, const MorsePotential& ground,
                             double mass, double energy, double u, double v, double* d,
                             double* p) {
    *d = orbit.d_inner + u * (orbit.d_outer - orbit.d_inner);
    const double kin = std::max(0.0, energy - morse_energy(ground, *d));
    *p = std::sqrt(2.0 * mass * kin);
    if (v >= 0.5) *p = -*p;
}

struct DwellResult {
    double d, p;
};

// Propagate (d, p) in the excited potential for time tau.
DwellResult propagate_excited(double d, double p, double tau, const RepulsivePotential& excited,
                              double mass, double max_step) {
    if (tau <= 0.0) return {d, p};
    const int steps = std::max(1, static_cast<int>(std::ceil(tau / max_step)));
    const double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
        const double p_half = p + 0.5 * h * repulsive_force(excited, d);
        d += h * p_half / mass;
        p = p_half + 0.5 * h * repulsive_force(excited, d);
    }
    return {d, p};
}

}  // namespace

double classical_half_period(const MorsePotential& ground, double energy, double mass) {
    return compute_orbit(energy, ground, mass, trap_frequency(ground, mass)).half_period;
}

StateHeating excited_dwell_heating(double energy, const MorsePotential& ground,
                                   const RepulsivePotential& excited, double mass,
                                   double linewidth, const McSettings& settings,
                                   int state_index) {
    if (settings.samples_per_state < 10000) {
        throw std::invalid_argument("excited_dwell_heating: need at least 1e4 samples, got " +
                                    std::to_string(settings.samples_per_state));
    }
    const double omega = trap_frequency(ground, mass);
    const ClassicalOrbit orbit = compute_orbit(energy, ground, mass, omega);

    const double tau_cap = 100.0 / linewidth;
    const double max_step = std::min(2.0 * std::numbers::pi / omega / 200.0, 0.05 / linewidth);

    const long samples = settings.samples_per_state;
    const long block_size = 4096;
    const long blocks = (samples + block_size - 1) / block_size;
    std::vector<double> block_sum(blocks, 0.0), block_sq(blocks, 0.0);

    auto run_block = [&](long blk) {
        const long begin = blk * block_size;
        const long end = std::min(samples, begin + block_size);
        double acc = 0.0, acc_sq = 0.0;
        for (long i = begin; i < end; ++i) {
            SplitMix64 rng(mix_key(settings.seed, static_cast<uint64_t>(state_index),
                                   static_cast<uint64_t>(i)));
            const double u_phase = rng.uniform();
            const double u_branch = rng.uniform();
            const double u_dwell = rng.uniform();
            double d = 0.0, p = 0.0;
            if (settings.sampling == OrbitSampling::TimeWeighted) {
                orbit.sample(u_phase, u_branch, &d, &p);
            } else {
                sample_uniform_position(orbit, ground, mass, energy, u_phase, u_branch, &d, &p);
            }
            const double e_start = p * p / (2.0 * mass) + morse_energy(ground, d);
            const double tau = std::min(tau_cap, -std::log1p(-u_dwell) / linewidth);
            const DwellResult out = propagate_excited(d, p, tau, excited, mass, max_step);
            const double e_end = out.p * out.p / (2.0 * mass) + morse_energy(ground, out.d);
            const double gain = (e_end - e_start) / si.k_B;
            acc += gain;
            acc_sq += gain * gain;
        }
        block_sum[blk] = acc;
        block_sq[blk] = acc_sq;
    };

    long threads = settings.threads > 0 ? settings.threads
                                        : static_cast<long>(std::thread::hardware_concurrency());
    threads = std::max(1L, std::min(threads, blocks));
    if (threads == 1) {
        for (long blk = 0; blk < blocks; ++blk) run_block(blk);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        std::atomic<long> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (long blk = next.fetch_add(1); blk < blocks; blk = next.fetch_add(1)) {
                    run_block(blk);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Fixed-order reduction over blocks keeps the result byte-identical for
    // any thread count.
    double total = 0.0, total_sq = 0.0;
    for (long blk = 0; blk < blocks; ++blk) {
        total += block_sum[blk];
        total_sq += block_sq[blk];
    }
    StateHeating res;
    res.mean_gain = total / static_cast<double>(samples);
    const double var =
        std::max(0.0, total_sq / samples - res.mean_gain * res.mean_gain);
    res.standard_error = std::sqrt(var / static_cast<double>(samples));
    return res;
}

HeatingTable build_heating_table(const BoundStateTable& table, const RepulsivePotential& excited,
                                 double recoil_temperature, double linewidth,
                                 const McSettings& settings) {
    HeatingTable h;
    h.recoil_temperature = recoil_temperature;
    h.samples = settings.samples_per_state;
    h.seed = settings.seed;
    h.delta_T.resize(table.size());
    h.standard_error.resize(table.size());
    for (int n = 0; n <= table.n_max; ++n) {
        const StateHeating s = excited_dwell_heating(table.energies[n], table.potential, excited,
                                                     table.mass, linewidth, settings, n);
        h.delta_T[n] = s.mean_gain;
        h.standard_error[n] = s.standard_error;
    }
    return h;
}

double mean_heating_per_scatter(const HeatingTable& heating, const ThermalOccupation& occ) {
    if (heating.delta_T.size() != occ.weights.size()) {
        throw std::invalid_argument("mean_heating_per_scatter: state count mismatch");
    }
    double acc = 0.0;
    for (size_t n = 0; n < occ.weights.size(); ++n) {
        acc += (heating.delta_T[n] + heating.recoil_temperature) * occ.weights[n];
    }
    return acc;
}

}  // namespace nearprobe
