#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nearprobe/heating.hpp"
#include "nearprobe/thermal_context.hpp"
#include "test_context.hpp"

using namespace nearprobe;
using nearprobe::testing::fixture;

TEST_CASE("scattering rate formula") {
    const double gamma = cesium_defaults().linewidth;

    SUBCASE("resonant saturation point") {
        CHECK(scattering_rate(1.0, 0.0, gamma) == doctest::Approx(gamma / 4.0).epsilon(1e-14));
        CHECK(scattering_rate(1.0, 0.0, gamma) == doctest::Approx(8.2e6).epsilon(0.01));
    }

    SUBCASE("linear regime at small s") {
        const double s = 1e-8;
        CHECK(scattering_rate(s, 0.0, gamma) ==
              doctest::Approx(gamma * s / 2.0).epsilon(1e-6));
    }

    SUBCASE("detuning suppression") {
        CHECK(scattering_rate(1.0, gamma, gamma) ==
              doctest::Approx(gamma / 2.0 / 6.0).epsilon(1e-12));
    }

    CHECK_THROWS_AS(scattering_rate(-0.1, 0.0, gamma), std::invalid_argument);
}

TEST_CASE("excited-state dwell heating") {
    const auto& f = fixture();
    McSettings mc;
    mc.samples_per_state = 20000;
    mc.seed = 7;

    SUBCASE("flat excited potential leaves only the free-flight drift") {
        // With no excited-state force the momentum never changes; the only
        // energy change is the position drift re-scored in the ground
        // potential, a (Omega/Gamma)^2-scale effect of a few nK. Bound it
        // far below the recoil temperature.
        const RepulsivePotential flat{0.0, f.cfg.excited_decay, f.cfg.trap_center};
        const StateHeating h = excited_dwell_heating(f.table.energies[0], f.trap, flat,
                                                     f.cfg.atom_mass, f.atom.linewidth, mc, 0);
        CHECK(std::abs(h.mean_gain) < 20e-9);
        CHECK(h.mean_gain > -3.0 * h.standard_error);
        CHECK(std::abs(h.mean_gain) < 0.2 * f.atom.recoil_temperature);
    }

    SUBCASE("vanishing dwell time gives exactly zero gain") {
        // Gamma so large that every dwell is < 1e-4 orbital periods
        const RepulsivePotential flat{0.0, f.cfg.excited_decay, f.cfg.trap_center};
        const StateHeating h = excited_dwell_heating(f.table.energies[0], f.trap, flat,
                                                     f.cfg.atom_mass, 1e15, mc, 0);
        CHECK(std::abs(h.mean_gain) < 1e-12);
    }

    SUBCASE("default excited potential heats the ground state beyond recoil") {
        McSettings full = mc;
        full.samples_per_state = 100000;  // the configured default count
        const StateHeating h = excited_dwell_heating(f.table.energies[0], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, full, 0);
        CHECK(h.mean_gain > f.atom.recoil_temperature);
        CHECK(h.standard_error < 0.02 * h.mean_gain);
    }

    SUBCASE("deterministic for a fixed seed, sensitive to the seed") {
        const StateHeating a = excited_dwell_heating(f.table.energies[3], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, mc, 3);
        const StateHeating b = excited_dwell_heating(f.table.energies[3], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, mc, 3);
        CHECK(a.mean_gain == b.mean_gain);  // bitwise
        CHECK(a.standard_error == b.standard_error);
        McSettings other = mc;
        other.seed = 8;
        const StateHeating c = excited_dwell_heating(f.table.energies[3], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, other, 3);
        CHECK(c.mean_gain != a.mean_gain);
    }

    SUBCASE("thread count does not change the result") {
        McSettings one = mc, four = mc;
        one.threads = 1;
        four.threads = 4;
        const StateHeating a = excited_dwell_heating(f.table.energies[5], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, one, 5);
        const StateHeating b = excited_dwell_heating(f.table.energies[5], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, four, 5);
        CHECK(a.mean_gain == b.mean_gain);
    }

    SUBCASE("shorter dwells heat less") {
        const StateHeating slow = excited_dwell_heating(f.table.energies[0], f.trap, f.excited,
                                                        f.cfg.atom_mass, f.atom.linewidth, mc, 0);
        const StateHeating fast = excited_dwell_heating(
            f.table.energies[0], f.trap, f.excited, f.cfg.atom_mass, 4.0 * f.atom.linewidth, mc, 0);
        const double se = std::hypot(slow.standard_error, fast.standard_error);
        CHECK(slow.mean_gain - fast.mean_gain > 3.0 * se);
    }

    SUBCASE("position-uniform sampling is available and consistent in scale") {
        McSettings up = mc;
        up.sampling = OrbitSampling::UniformPosition;
        const StateHeating a = excited_dwell_heating(f.table.energies[0], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, mc, 0);
        const StateHeating b = excited_dwell_heating(f.table.energies[0], f.trap, f.excited,
                                                     f.cfg.atom_mass, f.atom.linewidth, up, 0);
        CHECK(b.mean_gain > 0.0);
        CHECK(b.mean_gain > 0.3 * a.mean_gain);
        CHECK(b.mean_gain < 3.0 * a.mean_gain);
    }

    SUBCASE("sample budget below the minimum is rejected") {
        McSettings small = mc;
        small.samples_per_state = 5000;
        CHECK_THROWS_AS(excited_dwell_heating(f.table.energies[0], f.trap, f.excited,
                                              f.cfg.atom_mass, f.atom.linewidth, small, 0),
                        std::invalid_argument);
    }

    SUBCASE("doubling the samples halves the estimator variance") {
        // 3-sigma statistical test on the repeat-run variance ratio
        const int repeats = 48;
        auto variance_at = [&](long samples, uint64_t seed_base) {
            std::vector<double> means;
            for (int r = 0; r < repeats; ++r) {
                McSettings m = mc;
                m.samples_per_state = samples;
                m.seed = seed_base + r;
                means.push_back(excited_dwell_heating(f.table.energies[0], f.trap, f.excited,
                                                      f.cfg.atom_mass, f.atom.linewidth, m, 0)
                                    .mean_gain);
            }
            double mean = 0.0;
            for (double v : means) mean += v;
            mean /= repeats;
            double var = 0.0;
            for (double v : means) var += (v - mean) * (v - mean);
            return var / (repeats - 1);
        };
        const double v1 = variance_at(10000, 1000);
        const double v2 = variance_at(20000, 2000);
        const double ratio = v1 / v2;
        // var of a sample variance: relative sd sqrt(2/(repeats-1)) each
        const double sigma_log = std::sqrt(4.0 / (repeats - 1));
        CHECK(std::log(ratio) > std::log(2.0) - 3.0 * sigma_log);
        CHECK(std::log(ratio) < std::log(2.0) + 3.0 * sigma_log);
    }
}

TEST_CASE("heating table and thermal averages") {
    const auto& f = fixture();

    SUBCASE("per-state heating is positive and bounded by the deep states") {
        // near-threshold states have nK-scale heating; hold them to the
        // statistical bound, the well-resolved states to strict positivity
        for (int n = 0; n <= f.table.n_max; ++n) {
            CHECK(f.heating.delta_T[n] > -3.0 * f.heating.standard_error[n]);
        }
        for (int n = 0; n <= 40; ++n) {
            CHECK(f.heating.delta_T[n] > 0.0);
        }
        CHECK(f.heating.delta_T[f.table.n_max] < 0.1 * f.heating.delta_T[0]);
    }

    SUBCASE("recoil floor when the table is zeroed") {
        HeatingTable zero = f.heating;
        for (double& v : zero.delta_T) v = 0.0;
        for (double T : {1e-7, 1e-6, 1e-4, 1e-2}) {
            CHECK(mean_heating_per_scatter(zero, occupation(f.table, T)) ==
                  doctest::Approx(f.atom.recoil_temperature).epsilon(1e-12));
        }
    }

    SUBCASE("cold limit is the ground-state value plus recoil") {
        CHECK(mean_heating_per_scatter(f.heating, occupation(f.table, 1e-8)) ==
              doctest::Approx(f.heating.delta_T[0] + f.atom.recoil_temperature).epsilon(1e-9));
    }

    SUBCASE("matches a long-double weighted sum at 50 uK") {
        const ThermalOccupation occ = occupation(f.table, 50e-6);
        long double acc = 0.0L;
        for (int n = 0; n < f.table.size(); ++n) {
            acc += (static_cast<long double>(f.heating.delta_T[n]) + f.atom.recoil_temperature) *
                   occ.weights[n];
        }
        CHECK(mean_heating_per_scatter(f.heating, occ) ==
              doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
    }

    SUBCASE("heating per scatter never falls below recoil") {
        for (int i = 0; i < 40; ++i) {
            const double T = 1e-7 * std::pow(1e5, i / 39.0);
            CHECK(mean_heating_per_scatter(f.heating, occupation(f.table, T)) >=
                  f.atom.recoil_temperature);
        }
    }
}

TEST_CASE("heating rate") {
    const auto& f = fixture();

    SUBCASE("recoil-only mode reproduces the 1 K/s scale at saturation") {
        ThermalContext recoil = f.ctx;
        recoil.recoil_only = true;
        const double rate = heating_rate(1.0, 1e-6, recoil);
        CHECK(rate > 0.8);
        CHECK(rate < 1.2);
    }

    SUBCASE("no probe, no heating") {
        CHECK(heating_rate(0.0, 1e-6, f.ctx) == 0.0);
    }

    SUBCASE("far below saturation the rate sits under the passive scale") {
        ThermalContext recoil = f.ctx;
        recoil.recoil_only = true;
        const double rate = heating_rate(1e-4, 1e-6, recoil);
        CHECK(rate < 1e-3);       // below 1 mK/s
        CHECK(rate > 1e-5);       // but on the 0.1 mK/s scale
    }
}

TEST_CASE("classical orbit period matches the analytic Morse value") {
    const auto& f = fixture();
    // omega(E) = Omega sqrt(-E/D) in the threshold convention
    for (int n : {0, 10, 30, 50, 61}) {
        const double e = f.table.energies[n];
        const double omega_e = f.table.omega * std::sqrt(-e / f.trap.depth);
        const double expected = std::numbers::pi / omega_e;
        const double got = classical_half_period(f.trap, e, f.cfg.atom_mass);
        CHECK(got == doctest::Approx(expected).epsilon(0.01));
    }
}
