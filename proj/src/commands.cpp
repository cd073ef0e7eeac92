#include "nearprobe/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nearprobe/errors.hpp"
#include "nearprobe/fitting.hpp"
#include "nearprobe/io.hpp"
#include "nearprobe/quadrature.hpp"

namespace nearprobe {

using nlohmann::json;

namespace {

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

std::string heating_cache_canonical(const RunConfig& cfg, double recoil_temperature) {
    std::ostringstream s;
    s << "depth=" << format_double(cfg.trap_depth) << ";stiffness=" << format_double(cfg.trap_stiffness)
      << ";center=" << format_double(cfg.trap_center) << ";mass=" << format_double(cfg.atom_mass)
      << ";linewidth=" << format_double(cfg.atom_linewidth)
      << ";amplitude=" << format_double(cfg.excited_amplitude)
      << ";decay=" << format_double(cfg.excited_decay)
      << ";recoil=" << format_double(recoil_temperature) << ";seed=" << cfg.mc_seed
      << ";samples=" << cfg.mc_samples
      << ";sampling=" << (cfg.mc_sampling == OrbitSampling::TimeWeighted ? "tw" : "up");
    return s.str();
}

}  // namespace

Workspace::Workspace(RunConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    atom_ = make_species(cfg_.atom_mass, cfg_.atom_linewidth, cfg_.atom_wavelength);
}

MorsePotential Workspace::trap() const {
    return {cfg_.trap_depth, cfg_.trap_stiffness, cfg_.trap_center};
}

RepulsivePotential Workspace::excited() const {
    return {cfg_.excited_amplitude, cfg_.excited_decay, cfg_.trap_center};
}

CouplingProfile Workspace::profile() const {
    return {cfg_.coupling_beta_ref, cfg_.coupling_decay_length, cfg_.trap_center};
}

const BoundStateTable& Workspace::table() {
    if (!table_) table_ = build_bound_states(trap(), cfg_.atom_mass);
    return *table_;
}

const PerStateCoupling& Workspace::per_state() {
    if (!psc_) psc_ = per_state_coupling(table(), profile(), excited());
    return *psc_;
}

const HeatingTable& Workspace::heating() {
    if (heating_) return *heating_;
    const std::string canonical = heating_cache_canonical(cfg_, atom_.recoil_temperature);
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(content_hash(canonical)));
    const std::string cache_path = cfg_.mc_cache_dir + "/heating_" + hex + ".tsv";

    std::ifstream probe(cache_path);
    if (probe) {
        const Table t = read_table(cache_path);
        if (static_cast<int>(t.rows.size()) == table().size() && t.columns.size() == 3) {
            HeatingTable h;
            h.recoil_temperature = atom_.recoil_temperature;
            h.samples = cfg_.mc_samples;
            h.seed = cfg_.mc_seed;
            for (const auto& row : t.rows) {
                h.delta_T.push_back(row[1]);
                h.standard_error.push_back(row[2]);
            }
            heating_ = std::move(h);
            return *heating_;
        }
    }

    McSettings mc;
    mc.samples_per_state = cfg_.mc_samples;
    mc.seed = cfg_.mc_seed;
    mc.threads = cfg_.threads;
    mc.sampling = cfg_.mc_sampling;
    heating_ = build_heating_table(table(), excited(), atom_.recoil_temperature,
                                   cfg_.atom_linewidth, mc);

    ensure_directory(cfg_.mc_cache_dir);
    Table t;
    t.comments = {"monte-carlo heating table", canonical};
    t.columns = {"n", "delta_T_K", "se_K"};
    for (int n = 0; n < table().size(); ++n) {
        t.rows.push_back({static_cast<double>(n), heating_->delta_T[n],
                          heating_->standard_error[n]});
    }
    write_table(cache_path, t);
    return *heating_;
}

const ThermalContext& Workspace::context() {
    if (!ctx_) {
        ctx_ = ThermalContext(table(), per_state(), heating(), atom_, cfg_.grid);
        ctx_->recoil_only = cfg_.recoil_only;
    }
    return *ctx_;
}

void Workspace::invalidate_coupling() {
    psc_.reset();
    ctx_.reset();
}

void cmd_spectrum(Workspace& ws, const std::string& out_dir) {
    ensure_directory(out_dir);
    const BoundStateTable& t = ws.table();
    Table out;
    out.columns = {"n", "energy_uK", "mean_distance_nm"};
    for (int n = 0; n < t.size(); ++n) {
        out.rows.push_back({static_cast<double>(n), t.energies[n] / si.k_B * 1e6,
                            t.mean_distances[n] * 1e9});
    }
    write_table(out_dir + "/bound_states.tsv", out);

    json summary;
    summary["command"] = "spectrum";
    summary["bound_states"] = t.size();
    summary["n_max"] = t.n_max;
    summary["trap_frequency_kHz"] = t.omega / (2.0 * std::numbers::pi) / 1e3;
    summary["well_parameter_lambda"] = t.lambda;
    write_json(out_dir + "/summary.json", summary);
}

void cmd_coupling(Workspace& ws, const std::string& out_dir) {
    ensure_directory(out_dir);
    const BoundStateTable& t = ws.table();
    const PerStateCoupling& psc = ws.per_state();

    Table sweep;
    sweep.columns = {"temperature_uK", "beta_bar", "remaining_fraction", "detuning_rad_s"};
    const ThermalGrid& grid = ws.cfg().grid;
    for (int i = 0; i < grid.points; ++i) {
        const double f = static_cast<double>(i) / (grid.points - 1);
        const double T = grid.t_min * std::pow(grid.t_max / grid.t_min, f);
        const ThermalOccupation occ = occupation(t, T);
        sweep.rows.push_back({T * 1e6, mean_beta(psc, occ),
                              remaining_fraction(t.potential.depth, T), mean_detuning(psc, occ)});
    }
    write_table(out_dir + "/coupling_vs_temperature.tsv", sweep);

    // State-resolved couplings, Morse against a harmonic trap of the same
    // frequency.
    Table states;
    states.columns = {"n", "beta_morse", "beta_harmonic", "detuning_rad_s"};
    const CouplingProfile profile = ws.profile();
    const Domain dom = quadrature_domain(t);
    for (int n = 0; n < t.size(); ++n) {
        const double beta_h = refined_simpson(
            [&](double d) {
                const double psi = harmonic_wavefunction(t.mass, t.omega, t.potential.center, n, d);
                return psi * psi * beta_of_distance(profile, std::max(d, 1e-12));
            },
            dom.lo, dom.hi, 1e-8, std::max(128, 8 * (n + 1)));
        states.rows.push_back({static_cast<double>(n), psc.beta_n[n], beta_h, psc.delta_n[n]});
    }
    write_table(out_dir + "/state_coupling.tsv", states);

    json summary;
    summary["command"] = "coupling";
    summary["beta_bar_inf"] = mean_beta(psc, occupation(t, HUGE_VAL));
    summary["beta_bar_cold"] = mean_beta(psc, occupation(t, ws.cfg().calib_cold_temperature));
    summary["beta_bar_100uK"] = mean_beta(psc, occupation(t, 100e-6));
    write_json(out_dir + "/summary.json", summary);
}

void cmd_heating(Workspace& ws, const std::string& out_dir) {
    ensure_directory(out_dir);
    const BoundStateTable& t = ws.table();
    const HeatingTable& h = ws.heating();

    Table per_state;
    per_state.columns = {"n", "energy_uK", "delta_T_uK", "se_uK"};
    for (int n = 0; n < t.size(); ++n) {
        per_state.rows.push_back({static_cast<double>(n), t.energies[n] / si.k_B * 1e6,
                                  h.delta_T[n] * 1e6, h.standard_error[n] * 1e6});
    }
    write_table(out_dir + "/heating_per_state.tsv", per_state);

    Table vs_T;
    vs_T.columns = {"temperature_uK", "delta_T_uK", "detuning_rad_s"};
    const PerStateCoupling& psc = ws.per_state();
    const ThermalGrid& grid = ws.cfg().grid;
    for (int i = 0; i < grid.points; ++i) {
        const double f = static_cast<double>(i) / (grid.points - 1);
        const double T = grid.t_min * std::pow(grid.t_max / grid.t_min, f);
        const ThermalOccupation occ = occupation(t, T);
        vs_T.rows.push_back(
            {T * 1e6, mean_heating_per_scatter(h, occ) * 1e6, mean_detuning(psc, occ)});
    }
    write_table(out_dir + "/heating_vs_temperature.tsv", vs_T);

    json summary;
    summary["command"] = "heating";
    summary["seed"] = h.seed;
    summary["samples_per_state"] = h.samples;
    summary["recoil_temperature_nK"] = h.recoil_temperature * 1e9;
    // Reference point: recoil-only heating rate at s = 1, resonance.
    summary["recoil_only_rate_K_per_s"] =
        scattering_rate(1.0, 0.0, ws.atom().linewidth) * h.recoil_temperature;
    write_json(out_dir + "/summary.json", summary);
}

namespace {

PulseSchedule schedule_for_value(const RunConfig& cfg, double value) {
    PulseSchedule s = cfg.schedule;
    switch (cfg.sweep_parameter) {
        case SweepParameter::None:
            break;
        case SweepParameter::ProbePower:
            for (Segment& seg : s.segments) {
                if (auto* p = std::get_if<ProbeSegment>(&seg)) p->power_norm = value;
            }
            break;
        case SweepParameter::FirstWait:
            for (Segment& seg : s.segments) {
                if (auto* w = std::get_if<WaitSegment>(&seg)) {
                    w->duration = value;
                    break;
                }
            }
            break;
        case SweepParameter::CoolDuration:
            for (Segment& seg : s.segments) {
                if (auto* c = std::get_if<CoolSegment>(&seg)) c->duration = value;
            }
            break;
    }
    return s;
}

}  // namespace

double mean_od_recovery(const TransmissionTrace& trace) {
    const auto ranges = probe_sample_ranges(trace);
    if (ranges.size() < 2) {
        throw std::invalid_argument("mean_od_recovery: need at least two probe segments");
    }
    double acc = 0.0;
    for (size_t k = 0; k + 1 < ranges.size(); ++k) {
        const double od_end = -std::log(trace.value[ranges[k].second]);
        const double od_next = -std::log(trace.value[ranges[k + 1].first]);
        acc += od_next - od_end;
    }
    return acc / static_cast<double>(ranges.size() - 1);
}

void cmd_simulate(Workspace& ws, const std::string& out_dir) {
    ensure_directory(out_dir);
    const RunConfig& cfg = ws.cfg();
    if (cfg.schedule.segments.empty()) {
        throw ConfigError("simulate: config defines no schedule.segment entries");
    }
    const ThermalContext& ctx = ws.context();

    std::vector<double> values = cfg.sweep_values;
    if (cfg.sweep_parameter == SweepParameter::None) values = {0.0};

    json runs = json::array();
    double max_saturation = 0.0;
    Table sweep_readouts;
    sweep_readouts.columns = {"sweep_value", "od"};
    Table sweep_summary;
    sweep_summary.columns = {"sweep_value", "final_temperature_uK", "final_atoms",
                             "final_beta_bar", "final_transmission"};
    if (cfg.analysis_flank_metrics) {
        for (const char* c : {"gamma_per_s", "gamma_ini_per_s", "od0_long", "delta_od_ini"}) {
            sweep_summary.columns.push_back(c);
        }
    }
    if (cfg.analysis_od_recovery) sweep_summary.columns.push_back("mean_od_recovery");
    for (size_t vi = 0; vi < values.size(); ++vi) {
        const PulseSchedule schedule = schedule_for_value(cfg, values[vi]);
        const TransmissionTrace trace = run_schedule(schedule, cfg.dynamics, ctx);
        for (const Segment& seg : schedule.segments) {
            if (const auto* p = std::get_if<ProbeSegment>(&seg)) {
                max_saturation = std::max(
                    max_saturation, saturation_parameter(p->power_norm, ctx.beta_bar(
                                        cfg.dynamics.initial_temperature), ctx.beta_bar_inf()));
            }
        }

        char tag[24];
        std::snprintf(tag, sizeof(tag), "%03u", static_cast<unsigned>(vi));

        Table t;
        t.columns = {"time_s", "transmission", "temperature_uK", "atoms", "beta_bar"};
        for (size_t i = 0; i < trace.time.size(); ++i) {
            t.rows.push_back({trace.time[i], trace.value[i], trace.temperature[i] * 1e6,
                              trace.atoms[i], trace.beta[i]});
        }
        write_table(out_dir + "/trace_" + tag + ".tsv", t);

        const StitchedTrace st = stitch(trace);
        if (!st.probe_time.empty()) {
            Table stt;
            stt.columns = {"probe_time_s", "transmission", "segment"};
            for (size_t i = 0; i < st.probe_time.size(); ++i) {
                stt.rows.push_back({st.probe_time[i], st.value[i],
                                    static_cast<double>(st.segment[i])});
            }
            write_table(out_dir + "/stitched_" + tag + ".tsv", stt);
        }
        if (!trace.readout_time.empty()) {
            Table rt;
            rt.columns = {"time_s", "od"};
            for (size_t i = 0; i < trace.readout_time.size(); ++i) {
                rt.rows.push_back({trace.readout_time[i], trace.readout_od[i]});
            }
            write_table(out_dir + "/readouts_" + tag + ".tsv", rt);
        }

        json rec;
        rec["value"] = values[vi];
        rec["trace"] = "trace_" + std::string(tag) + ".tsv";
        std::vector<double> row = {values[vi]};
        if (!trace.time.empty()) {
            rec["final_temperature_uK"] = trace.temperature.back() * 1e6;
            rec["final_atoms"] = trace.atoms.back();
            rec["final_beta_bar"] = trace.beta.back();
            rec["final_transmission"] = trace.value.back();
            row.push_back(trace.temperature.back() * 1e6);
            row.push_back(trace.atoms.back());
            row.push_back(trace.beta.back());
            row.push_back(trace.value.back());
        } else {
            for (int k = 0; k < 4; ++k) row.push_back(0.0);
        }
        if (!trace.readout_od.empty()) {
            rec["readout_od"] = trace.readout_od;
            sweep_readouts.rows.push_back({values[vi], trace.readout_od.back()});
        }
        if (cfg.analysis_flank_metrics && !st.probe_time.empty()) {
            std::vector<double> x = st.probe_time, y = st.value;
            filter_strictly_increasing(x, y);
            if (x.back() - x.front() >= 500e-6) {
                const FlankMetrics fm = extract_flank_metrics(x, y);
                rec["gamma_per_s"] = fm.gamma;
                rec["gamma_ini_per_s"] = fm.gamma_ini;
                rec["od0_long"] = fm.od0_long;
                rec["delta_od_ini"] = fm.delta_od_ini;
                row.push_back(fm.gamma);
                row.push_back(fm.gamma_ini);
                row.push_back(fm.od0_long);
                row.push_back(fm.delta_od_ini);
            } else {
                // short stitched traces: overall double-exponential fit plus
                // the first pulse's early flank constant
                const FitResult whole = fit(model_double_exp(), x, y);
                double rss = 0.0;
                for (size_t i = 0; i < x.size(); ++i) {
                    const double r =
                        double_exp_transmission(whole.params[0], whole.params[1], x[i]) - y[i];
                    rss += r * r;
                }
                std::vector<double> ex, ey;
                for (size_t i = 0; i < x.size() && x[i] <= 10e-6 + 1e-12; ++i) {
                    ex.push_back(x[i]);
                    ey.push_back(y[i]);
                }
                const FitResult early = fit(model_double_exp(), ex, ey);
                rec["stitched_od0"] = whole.params[0];
                rec["stitched_gamma_per_s"] = whole.params[1];
                rec["stitched_fit_rms"] = std::sqrt(rss / x.size());
                rec["first_pulse_gamma_ini_per_s"] = early.params[1];
                row.push_back(whole.params[1]);
                row.push_back(early.params[1]);
                row.push_back(whole.params[0]);
                row.push_back(0.0);
            }
        }
        if (cfg.analysis_od_recovery) {
            const double recovery = mean_od_recovery(trace);
            rec["mean_od_recovery"] = recovery;
            row.push_back(recovery);
        }
        if (row.size() == sweep_summary.columns.size()) sweep_summary.rows.push_back(row);
        runs.push_back(rec);
    }
    if (cfg.sweep_parameter != SweepParameter::None) {
        write_table(out_dir + "/sweep_summary.tsv", sweep_summary);
        if (!sweep_readouts.rows.empty()) {
            write_table(out_dir + "/sweep_readouts.tsv", sweep_readouts);
        }
    }

    if (max_saturation > 1.0) {
        std::fprintf(stderr,
                     "note: saturation parameter reaches %.2f > 1; the scattering model is only "
                     "valid well below saturation\n",
                     max_saturation);
    }

    json summary;
    summary["command"] = "simulate";
    summary["sweep_values"] = values.size() == 1 && cfg.sweep_parameter == SweepParameter::None
                                  ? json::array()
                                  : json(values);
    summary["runs"] = runs;
    write_json(out_dir + "/summary.json", summary);
}

void cmd_fit(Workspace& ws, const std::string& model_id, const std::string& data_path,
             std::optional<std::pair<double, double>> window_us, const std::string& out_dir) {
    ensure_directory(out_dir);
    const XySeries data = read_xy(data_path);
    std::vector<double> x = data.x, y = data.y;
    if (window_us) {
        std::vector<double> fx, fy;
        for (size_t i = 0; i < x.size(); ++i) {
            const double rel_us = (x[i] - data.x.front()) * 1e6;
            if (rel_us >= window_us->first - 1e-9 && rel_us <= window_us->second + 1e-9) {
                fx.push_back(x[i]);
                fy.push_back(y[i]);
            }
        }
        x.swap(fx);
        y.swap(fy);
    }
    filter_strictly_increasing(x, y);
    const FitModel model = model_by_id(model_id, ws.atom().linewidth);
    const FitResult res = fit(model, x, y);

    json report;
    report["command"] = "fit";
    report["model"] = model.id;
    report["data"] = std::filesystem::path(data_path).filename().string();
    report["points"] = x.size();
    if (window_us) report["window_us"] = {window_us->first, window_us->second};
    json params;
    for (size_t j = 0; j < model.param_names.size(); ++j) {
        params[model.param_names[j]] = {{"value", res.params[j]},
                                        {"sigma", res.uncertainties[j]},
                                        {"at_bound", static_cast<bool>(res.at_bound[j])}};
    }
    report["parameters"] = params;
    report["residual_norm"] = res.residual_norm;
    report["converged"] = res.converged;
    report["iterations"] = res.iterations;
    if (!res.diagnostic.empty()) report["diagnostic"] = res.diagnostic;
    write_json(out_dir + "/fit_report.json", report);
}

CoolingCalibration calibrate_cooling_rate(const ThermalContext& ctx, DynamicsConfig dyn,
                                          double target_rate) {
    const std::vector<double> durations = {1e-3, 2e-3, 3e-3, 4e-3, 5e-3, 7e-3, 10e-3, 14e-3};

    auto observable = [&](double kappa) {
        dyn.cooling_rate = kappa;
        std::vector<double> recovery;
        for (double t_cool : durations) {
            PulseSchedule s;
            for (int k = 0; k < 20; ++k) {
                s.segments.push_back(ProbeSegment{20e-6, 0.26});
                s.segments.push_back(CoolSegment{t_cool});
            }
            recovery.push_back(mean_od_recovery(run_schedule(s, dyn, ctx)));
        }
        const FitResult r = fit(model_saturation_absorption(), durations, recovery);
        return 1.0 / r.params[1];
    };

    double k0 = target_rate, k1 = 1.6 * target_rate;
    double f0 = observable(k0) - target_rate;
    double f1 = observable(k1) - target_rate;
    for (int it = 0; it < 30 && std::abs(f1) > 1e-3 * target_rate && f1 != f0; ++it) {
        const double k2 = std::clamp(k1 - f1 * (k1 - k0) / (f1 - f0), 1.0, 1e6);
        k0 = k1;
        f0 = f1;
        k1 = k2;
        f1 = observable(k1) - target_rate;
    }
    if (std::abs(f1) > 0.05 * target_rate) {
        throw NumericalError("calibrate_cooling_rate: no cooling constant reproduces rate " +
                             format_double(target_rate) + " (best " +
                             format_double(f1 + target_rate) + ")");
    }

    // Peak temperature after one probe pulse, for the implied K/s diagnostic.
    dyn.cooling_rate = k1;
    PulseSchedule one;
    one.segments.push_back(ProbeSegment{20e-6, 0.26});
    const TransmissionTrace tr = run_schedule(one, dyn, ctx);
    const double t_hot = tr.temperature.back();

    CoolingCalibration out;
    out.kappa_cool = k1;
    out.fitted_rate = f1 + target_rate;
    out.implied_peak_rate = k1 * (t_hot - dyn.initial_temperature);
    return out;
}

void cmd_calibrate(Workspace& ws, const std::string& out_dir) {
    ensure_directory(out_dir);
    CalibrationTargets targets;
    targets.beta_hot = ws.cfg().calib_beta_hot;
    targets.beta_cold = ws.cfg().calib_beta_cold;
    targets.cold_temperature = ws.cfg().calib_cold_temperature;
    const CalibrationResult cal = calibrate_coupling(targets, ws.table());

    ws.cfg().coupling_beta_ref = cal.profile.beta_ref;
    ws.cfg().coupling_decay_length = cal.profile.decay_length;
    ws.invalidate_coupling();

    const CoolingCalibration cooling =
        calibrate_cooling_rate(ws.context(), ws.cfg().dynamics, 360.0);

    json out;
    out["command"] = "calibrate";
    out["beta_at_center"] = cal.profile.beta_ref;
    out["decay_length_nm"] = cal.profile.decay_length * 1e9;
    out["residual"] = cal.residual;
    out["beta_bar_100uK"] = cal.beta_100uK;
    out["iterations"] = cal.iterations;
    out["kappa_cool_per_s"] = cooling.kappa_cool;
    out["od_recovery_rate_per_s"] = cooling.fitted_rate;
    out["implied_peak_cooling_rate_mK_per_s"] = cooling.implied_peak_rate * 1e3;
    write_json(out_dir + "/calibration.json", out);
}

}  // namespace nearprobe
