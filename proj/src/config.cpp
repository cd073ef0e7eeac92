#include "nearprobe/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nearprobe/constants.hpp"
#include "nearprobe/errors.hpp"

namespace nearprobe {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& s) {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters in number '" + s + "'");
    return v;
}

long to_long(const std::string& s) {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters in integer '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("expected true/false, got '" + s + "'");
}

Segment parse_segment(const std::string& value) {
    const std::vector<std::string> tok = split_ws(value);
    if (tok.empty()) throw std::invalid_argument("empty schedule segment");
    if (tok[0] == "probe") {
        if (tok.size() != 3) throw std::invalid_argument("probe needs: probe <duration> <power>");
        return ProbeSegment{parse_duration(tok[1]), to_double(tok[2])};
    }
    if (tok[0] == "cool") {
        if (tok.size() != 2) throw std::invalid_argument("cool needs: cool <duration>");
        return CoolSegment{parse_duration(tok[1])};
    }
    if (tok[0] == "wait") {
        if (tok.size() != 2) throw std::invalid_argument("wait needs: wait <duration>");
        return WaitSegment{parse_duration(tok[1])};
    }
    if (tok[0] == "readout") {
        if (tok.size() != 1) throw std::invalid_argument("readout takes no arguments");
        return ReadoutSegment{};
    }
    throw std::invalid_argument("unknown segment type '" + tok[0] +
                                "' (expected probe, cool, wait, readout)");
}

}  // namespace

double parse_duration(const std::string& token) {
    double scale = 0.0;
    std::string num;
    if (token.size() > 2 && token.substr(token.size() - 2) == "us") {
        scale = 1e-6;
        num = token.substr(0, token.size() - 2);
    } else if (token.size() > 2 && token.substr(token.size() - 2) == "ms") {
        scale = 1e-3;
        num = token.substr(0, token.size() - 2);
    } else if (token.size() > 1 && token.back() == 's') {
        scale = 1.0;
        num = token.substr(0, token.size() - 1);
    } else {
        throw std::invalid_argument("duration '" + token + "' needs a unit suffix (us, ms, s)");
    }
    return to_double(num) * scale;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    const double uK = 1e-6 * si.k_B;  // energy per microkelvin

    // Scalar setters; schedule.segment and sweep.values are handled apart.
    const std::map<std::string, std::function<void(RunConfig&, const std::string&)>> keys = {
        {"trap.depth_uK", [uK](RunConfig& c, const std::string& v) { c.trap_depth = to_double(v) * uK; }},
        {"trap.stiffness_per_um", [](RunConfig& c, const std::string& v) { c.trap_stiffness = to_double(v) * 1e6; }},
        {"trap.center_nm", [](RunConfig& c, const std::string& v) { c.trap_center = to_double(v) * 1e-9; }},
        {"atom.mass_kg", [](RunConfig& c, const std::string& v) { c.atom_mass = to_double(v); }},
        {"atom.linewidth_MHz", [](RunConfig& c, const std::string& v) { c.atom_linewidth = 2.0 * std::numbers::pi * to_double(v) * 1e6; }},
        {"atom.wavelength_nm", [](RunConfig& c, const std::string& v) { c.atom_wavelength = to_double(v) * 1e-9; }},
        {"excited.amplitude_uK", [uK](RunConfig& c, const std::string& v) { c.excited_amplitude = to_double(v) * uK; }},
        {"excited.decay_per_um", [](RunConfig& c, const std::string& v) { c.excited_decay = to_double(v) * 1e6; }},
        {"coupling.beta_at_center", [](RunConfig& c, const std::string& v) { c.coupling_beta_ref = to_double(v); }},
        {"coupling.decay_length_nm", [](RunConfig& c, const std::string& v) { c.coupling_decay_length = to_double(v) * 1e-9; }},
        {"calibration.beta_hot", [](RunConfig& c, const std::string& v) { c.calib_beta_hot = to_double(v); }},
        {"calibration.beta_cold", [](RunConfig& c, const std::string& v) { c.calib_beta_cold = to_double(v); }},
        {"calibration.cold_temperature_uK", [](RunConfig& c, const std::string& v) { c.calib_cold_temperature = to_double(v) * 1e-6; }},
        {"mc.samples_per_state", [](RunConfig& c, const std::string& v) { c.mc_samples = to_long(v); }},
        {"mc.seed", [](RunConfig& c, const std::string& v) { c.mc_seed = static_cast<uint64_t>(to_long(v)); }},
        {"mc.sampling", [](RunConfig& c, const std::string& v) {
             if (v == "time_weighted") c.mc_sampling = OrbitSampling::TimeWeighted;
             else if (v == "uniform_position") c.mc_sampling = OrbitSampling::UniformPosition;
             else throw std::invalid_argument("mc.sampling must be time_weighted or uniform_position");
         }},
        {"mc.cache_dir", [](RunConfig& c, const std::string& v) { c.mc_cache_dir = v; }},
        {"dynamics.initial_temperature_uK", [](RunConfig& c, const std::string& v) { c.dynamics.initial_temperature = to_double(v) * 1e-6; }},
        {"dynamics.passive_heating_mK_per_s", [](RunConfig& c, const std::string& v) { c.dynamics.passive_rate = to_double(v) * 1e-3; }},
        {"dynamics.cooling_rate_per_s", [](RunConfig& c, const std::string& v) { c.dynamics.cooling_rate = to_double(v); }},
        {"dynamics.rel_tol", [](RunConfig& c, const std::string& v) { c.dynamics.rel_tol = to_double(v); }},
        {"dynamics.sample_period_us", [](RunConfig& c, const std::string& v) { c.dynamics.sample_period = to_double(v) * 1e-6; }},
        {"dynamics.atom_number", [](RunConfig& c, const std::string& v) { c.dynamics.atom_number = to_double(v); }},
        {"dynamics.recoil_only", [](RunConfig& c, const std::string& v) { c.recoil_only = to_bool(v); }},
        {"table.points", [](RunConfig& c, const std::string& v) { c.grid.points = static_cast<int>(to_long(v)); }},
        {"table.t_min_uK", [](RunConfig& c, const std::string& v) { c.grid.t_min = to_double(v) * 1e-6; }},
        {"table.t_max_uK", [](RunConfig& c, const std::string& v) { c.grid.t_max = to_double(v) * 1e-6; }},
        {"sweep.parameter", [](RunConfig& c, const std::string& v) {
             if (v == "none") c.sweep_parameter = SweepParameter::None;
             else if (v == "probe_power") c.sweep_parameter = SweepParameter::ProbePower;
             else if (v == "first_wait") c.sweep_parameter = SweepParameter::FirstWait;
             else if (v == "cool_duration") c.sweep_parameter = SweepParameter::CoolDuration;
             else throw std::invalid_argument("sweep.parameter must be none, probe_power, first_wait or cool_duration");
         }},
        {"analysis.flank_metrics", [](RunConfig& c, const std::string& v) { c.analysis_flank_metrics = to_bool(v); }},
        {"analysis.od_recovery", [](RunConfig& c, const std::string& v) { c.analysis_od_recovery = to_bool(v); }},
    };

    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        auto fail = [&](const std::string& why) -> void {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + why);
        };
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (value.empty()) fail("empty value for key '" + key + "'");
        try {
            if (key == "schedule.segment") {
                cfg.schedule.segments.push_back(parse_segment(value));
            } else if (key == "sweep.values") {
                for (const std::string& tok : split_ws(value)) {
                    // duration-valued sweeps accept unit suffixes
                    try {
                        cfg.sweep_values.push_back(to_double(tok));
                    } catch (const std::exception&) {
                        cfg.sweep_values.push_back(parse_duration(tok));
                    }
                }
            } else {
                const auto it = keys.find(key);
                if (it == keys.end()) fail("unknown key '" + key + "'");
                if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
                it->second(cfg, value);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(std::string(e.what()));
        }
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

void validate(const RunConfig& cfg) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("config: " + what);
    };
    require(cfg.trap_depth > 0.0, "trap.depth_uK must be positive");
    require(cfg.trap_stiffness > 0.0, "trap.stiffness_per_um must be positive");
    require(cfg.trap_center > 0.0, "trap.center_nm must be positive");
    require(cfg.atom_mass > 0.0, "atom.mass_kg must be positive");
    require(cfg.atom_linewidth > 0.0, "atom.linewidth_MHz must be positive");
    require(cfg.atom_wavelength > 0.0, "atom.wavelength_nm must be positive");
    require(cfg.excited_amplitude >= 0.0, "excited.amplitude_uK must be >= 0");
    require(cfg.excited_decay > 0.0, "excited.decay_per_um must be positive");
    require(cfg.coupling_beta_ref > 0.0 && cfg.coupling_beta_ref < 0.5,
            "coupling.beta_at_center must lie in (0, 0.5)");
    require(cfg.coupling_decay_length > 0.0, "coupling.decay_length_nm must be positive");
    require(cfg.mc_samples >= 10000, "mc.samples_per_state must be >= 10000");
    require(cfg.dynamics.initial_temperature > 0.0,
            "dynamics.initial_temperature_uK must be positive");
    require(cfg.dynamics.passive_rate >= 0.0, "dynamics.passive_heating_mK_per_s must be >= 0");
    require(cfg.dynamics.cooling_rate >= 0.0, "dynamics.cooling_rate_per_s must be >= 0");
    require(cfg.dynamics.rel_tol > 0.0 && cfg.dynamics.rel_tol < 1e-2,
            "dynamics.rel_tol must lie in (0, 1e-2)");
    require(cfg.dynamics.sample_period > 0.0, "dynamics.sample_period_us must be positive");
    require(cfg.dynamics.atom_number >= 0.0, "dynamics.atom_number must be >= 0");
    require(cfg.grid.points >= 8, "table.points must be >= 8");
    require(cfg.grid.t_min > 0.0 && cfg.grid.t_max > cfg.grid.t_min,
            "table temperature range must be increasing and positive");
    for (const Segment& seg : cfg.schedule.segments) {
        if (const auto* p = std::get_if<ProbeSegment>(&seg)) {
            require(p->duration > 0.0, "probe duration must be positive");
            require(p->power_norm >= 0.0, "probe power must be >= 0");
        } else if (const auto* c = std::get_if<CoolSegment>(&seg)) {
            require(c->duration > 0.0, "cool duration must be positive");
        } else if (const auto* w = std::get_if<WaitSegment>(&seg)) {
            require(w->duration > 0.0, "wait duration must be positive");
        }
    }
    if (cfg.sweep_parameter != SweepParameter::None) {
        require(!cfg.sweep_values.empty(), "sweep.values must be set when sweep.parameter is");
    }
}

}  // namespace nearprobe
