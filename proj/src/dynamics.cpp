#include "nearprobe/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nearprobe/errors.hpp"

namespace nearprobe {

namespace {

// Dormand-Prince 5(4) pair on the scalar temperature ODE. Autonomous RHS.
template <typename F>
double integrate_temperature(double T, double duration, double rel_tol, const F& rhs) {
    if (duration <= 0.0) return T;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2;
    (void)c3;
    (void)c4;
    (void)c5;

    double t = 0.0;
    double k1 = rhs(T);
    double h = duration;
    if (k1 > 0.0) h = std::min(h, 0.01 * T / k1);  // start well inside the dynamics
    h = std::max(h, duration * 1e-12);

    int rejected_in_a_row = 0;
    while (t < duration) {
        h = std::min(h, duration - t);
        const double k2 = rhs(T + h * a21 * k1);
        const double k3 = rhs(T + h * (a31 * k1 + a32 * k2));
        const double k4 = rhs(T + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = rhs(T + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 = rhs(T + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double T5 = T + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double k7 = rhs(T5);
        const double err =
            std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
        const double tol = rel_tol * std::max(std::abs(T), std::abs(T5)) + 1e-15;
        if (err <= tol) {
            t += h;
            T = T5;
            k1 = k7;  // FSAL
            rejected_in_a_row = 0;
            const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.2));
            if (++rejected_in_a_row > 200 || h < duration * 1e-14) {
                throw NumericalError(
                    "integrate_temperature: step control failed (local error above tolerance)");
            }
        }
    }
    return T;
}

}  // namespace

namespace {

// Loss ratchet: shed the equilibrium above-threshold tail on the way up.
void apply_heating_loss(SimState& s, double t_new, const ThermalContext& ctx) {
    if (t_new > s.temperature) {
        s.survival *= remaining_fraction(ctx.trap_depth(), t_new) /
                      remaining_fraction(ctx.trap_depth(), s.temperature);
        s.peak_temperature = std::max(s.peak_temperature, t_new);
    }
    s.temperature = t_new;
}

}  // namespace

SimState initial_state(const DynamicsConfig& cfg) {
    SimState s;
    s.temperature = cfg.initial_temperature;
    s.peak_temperature = cfg.initial_temperature;
    s.atom_number0 = cfg.atom_number;
    return s;
}

double survived_count(const SimState& s, const ThermalContext& ctx) {
    (void)ctx;
    return s.atom_number0 * s.survival;
}

double saturation_parameter(double power_norm, double beta_bar, double beta_bar_inf) {
    if (!(beta_bar_inf > 0.0)) {
        throw std::invalid_argument("saturation_parameter: beta_bar_inf must be positive");
    }
    return power_norm * beta_bar / beta_bar_inf;
}

double transmission(double beta_bar, double atom_number) {
    if (!(beta_bar >= 0.0 && beta_bar < 0.5)) {
        throw std::invalid_argument("transmission: beta_bar must lie in [0, 0.5)");
    }
    if (atom_number < 0.0) {
        throw std::invalid_argument("transmission: atom number must be >= 0");
    }
    return std::pow(1.0 - 2.0 * beta_bar, 2.0 * atom_number);
}

double double_exp_transmission(double od0, double gamma, double t) {
    if (od0 < 0.0 || gamma < 0.0) {
        throw std::invalid_argument("double_exp_transmission: OD0 and gamma must be >= 0");
    }
    return std::exp(-od0 * std::exp(-gamma * t));
}

double instant_od(const SimState& s, const ThermalContext& ctx) {
    const double beta = ctx.beta_bar(s.temperature);
    return -2.0 * survived_count(s, ctx) * std::log(1.0 - 2.0 * beta);
}

SimState step_probe(SimState s, double dt, double power_norm, const ThermalContext& ctx,
                    const DynamicsConfig& cfg) {
    if (dt < 0.0) throw std::invalid_argument("step_probe: negative duration");
    if (power_norm < 0.0) throw std::invalid_argument("step_probe: negative probe power");
    if (power_norm > 0.0 && dt > 0.0) {
        const double t_new =
            integrate_temperature(s.temperature, dt, cfg.rel_tol, [&](double T) {
                const double sat =
                    saturation_parameter(power_norm, ctx.beta_bar(T), ctx.beta_bar_inf());
                return heating_rate(sat, T, ctx);
            });
        apply_heating_loss(s, t_new, ctx);
    }
    s.time += dt;
    return s;
}

SimState step_cool(SimState s, double dt, const DynamicsConfig& cfg) {
    if (dt < 0.0) throw std::invalid_argument("step_cool: negative duration");
    const double floor = cfg.initial_temperature;
    s.temperature = floor + (s.temperature - floor) * std::exp(-cfg.cooling_rate * dt);
    s.time += dt;
    return s;
}

SimState step_wait(SimState s, double dt, const ThermalContext& ctx, const DynamicsConfig& cfg) {
    if (dt < 0.0) throw std::invalid_argument("step_wait: negative duration");
    apply_heating_loss(s, s.temperature + cfg.passive_rate * dt, ctx);
    s.time += dt;
    return s;
}

TransmissionTrace run_schedule(const PulseSchedule& schedule, const DynamicsConfig& cfg,
                               const ThermalContext& ctx) {
    TransmissionTrace trace;
    SimState s = initial_state(cfg);
    int probe_index = -1;

    auto record = [&](const SimState& st) {
        const double beta = ctx.beta_bar(st.temperature);
        const double n = survived_count(st, ctx);
        trace.time.push_back(st.time);
        trace.value.push_back(transmission(beta, n));
        trace.temperature.push_back(st.temperature);
        trace.atoms.push_back(n);
        trace.beta.push_back(beta);
        trace.segment.push_back(probe_index);
    };

    for (const Segment& seg : schedule.segments) {
        if (std::holds_alternative<ProbeSegment>(seg)) {
            const auto& probe = std::get<ProbeSegment>(seg);
            if (!(probe.duration > 0.0)) {
                throw std::invalid_argument("run_schedule: probe duration must be positive");
            }
            ++probe_index;
            const long ticks =
                std::lround(std::floor(probe.duration / cfg.sample_period * (1.0 + 1e-12) + 1e-12));
            record(s);
            double done = 0.0;
            for (long k = 1; k <= ticks; ++k) {
                const double target = std::min(probe.duration, k * cfg.sample_period);
                s = step_probe(s, target - done, probe.power_norm, ctx, cfg);
                done = target;
                record(s);
            }
            if (probe.duration - done > 1e-9 * probe.duration) {
                s = step_probe(s, probe.duration - done, probe.power_norm, ctx, cfg);
                record(s);
            }
        } else if (std::holds_alternative<CoolSegment>(seg)) {
            const auto& cool = std::get<CoolSegment>(seg);
            if (!(cool.duration > 0.0)) {
                throw std::invalid_argument("run_schedule: cool duration must be positive");
            }
            s = step_cool(s, cool.duration, cfg);
        } else if (std::holds_alternative<WaitSegment>(seg)) {
            const auto& wait = std::get<WaitSegment>(seg);
            if (!(wait.duration > 0.0)) {
                throw std::invalid_argument("run_schedule: wait duration must be positive");
            }
            s = step_wait(s, wait.duration, ctx, cfg);
        } else {
            trace.readout_time.push_back(s.time);
            trace.readout_od.push_back(instant_od(s, ctx));
        }
    }
    return trace;
}

std::vector<std::pair<size_t, size_t>> probe_sample_ranges(const TransmissionTrace& trace) {
    std::vector<std::pair<size_t, size_t>> out;
    int current = -1;
    for (size_t i = 0; i < trace.segment.size(); ++i) {
        if (trace.segment[i] < 0) continue;
        if (trace.segment[i] != current) {
            current = trace.segment[i];
            out.emplace_back(i, i);
        } else {
            out.back().second = i;
        }
    }
    return out;
}

StitchedTrace stitch(const TransmissionTrace& trace) {
    StitchedTrace st;
    double offset = 0.0;        // cumulative probe time at the current segment start
    double seg_start = 0.0;     // global time of the current segment start
    double seg_last = 0.0;      // last sample time inside the current segment
    int current = -1;
    for (size_t i = 0; i < trace.time.size(); ++i) {
        if (trace.segment[i] < 0) continue;
        if (trace.segment[i] != current) {
            if (current >= 0) offset += seg_last - seg_start;
            current = trace.segment[i];
            seg_start = trace.time[i];
        }
        seg_last = trace.time[i];
        st.probe_time.push_back(offset + (trace.time[i] - seg_start));
        st.value.push_back(trace.value[i]);
        st.segment.push_back(current);
    }
    return st;
}

}  // namespace nearprobe
