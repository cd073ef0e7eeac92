#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nearprobe/coupling.hpp"
#include "nearprobe/errors.hpp"
#include "nearprobe/quadrature.hpp"
#include "test_context.hpp"

using namespace nearprobe;
using nearprobe::testing::fixture;

TEST_CASE("coupling profile versus distance") {
    const CouplingProfile p{0.024, 100e-9, 231e-9};
    CHECK(beta_of_distance(p, p.reference) == doctest::Approx(0.024).epsilon(1e-14));
    CHECK(beta_of_distance(p, p.reference + p.decay_length * std::log(2.0)) ==
          doctest::Approx(0.012).epsilon(1e-12));
    CHECK_THROWS_AS(beta_of_distance(p, -1e-9), std::invalid_argument);
}

TEST_CASE("thermal occupation") {
    const auto& f = fixture();

    SUBCASE("weights sum to one at every temperature") {
        for (double T : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
            const ThermalOccupation occ = occupation(f.table, T);
            double sum = 0.0;
            for (double w : occ.weights) sum += w;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    SUBCASE("ground-state limit") {
        const ThermalOccupation occ = occupation(f.table, 1e-7);
        CHECK(occ.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(occ.weights[1] < 1e-12);
    }

    SUBCASE("equal weights at infinite temperature") {
        const ThermalOccupation occ = occupation(f.table, HUGE_VAL);
        for (double w : occ.weights) {
            CHECK(w == doctest::Approx(1.0 / f.table.size()).epsilon(1e-14));
        }
    }

    SUBCASE("matches long-double reference summation at 10 uK") {
        const double T = 10e-6;
        const ThermalOccupation occ = occupation(f.table, T);
        long double z = 0.0L;
        for (int n = 0; n < f.table.size(); ++n) {
            z += expl(-static_cast<long double>(f.table.energies[n] - f.table.energies[0]) /
                      (static_cast<long double>(si.k_B) * T));
        }
        for (int n = 0; n < f.table.size(); ++n) {
            const long double want =
                expl(-static_cast<long double>(f.table.energies[n] - f.table.energies[0]) /
                     (static_cast<long double>(si.k_B) * T)) /
                z;
            CHECK(occ.weights[n] == doctest::Approx(static_cast<double>(want)).epsilon(1e-13));
        }
    }

    SUBCASE("non-positive temperature rejected") {
        CHECK_THROWS_AS(occupation(f.table, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(occupation(f.table, -1e-6), std::invalid_argument);
    }
}

TEST_CASE("state-resolved coupling and detuning") {
    const auto& f = fixture();

    SUBCASE("beta_n falls toward zero at the highest bound state") {
        CHECK(f.psc.beta_n[f.table.n_max] < f.psc.beta_n[0] / 10.0);
        for (int n = 1; n <= f.table.n_max; ++n) CHECK(f.psc.beta_n[n] < f.psc.beta_n[n - 1]);
    }

    SUBCASE("beta_n within the physical range") {
        for (double b : f.psc.beta_n) {
            CHECK(b > 0.0);
            CHECK(b < 0.5);
        }
    }

    SUBCASE("detuning vanishes at the potential minimum") {
        // delta_0 is the ground-state average, close to zero on the Gamma scale
        CHECK(std::abs(f.psc.delta_n[0]) < 0.1 * f.atom.linewidth);
    }

    SUBCASE("constant splitting gives a temperature-independent average") {
        // overlap of a constant is the constant; thermal averaging keeps it
        const std::vector<double> flat(f.table.size(), 1234.5);
        for (double T : {1e-6, 5e-5, HUGE_VAL}) {
            CHECK(thermal_average(flat, occupation(f.table, T)) ==
                  doctest::Approx(1234.5).epsilon(1e-12));
        }
    }

    SUBCASE("mean detuning matches the direct weighted sum at 50 uK") {
        const ThermalOccupation occ = occupation(f.table, 50e-6);
        long double acc = 0.0L;
        for (int n = 0; n < f.table.size(); ++n) {
            acc += static_cast<long double>(f.psc.delta_n[n]) * occ.weights[n];
        }
        CHECK(mean_detuning(f.psc, occ) ==
              doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
    }
}

TEST_CASE("remaining fraction") {
    const double D = 240e-6 * si.k_B;
    CHECK(remaining_fraction(D, 1e-9) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(remaining_fraction(D, D / (si.k_B * std::log(2.0))) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(remaining_fraction(D, 100e-6) == doctest::Approx(0.909).epsilon(1e-3));
    CHECK(remaining_fraction(D, 100e-6) > 0.90);  // less than 10% lost at 100 uK

    SUBCASE("plateau below a tenth of the depth") {
        for (double T = 1e-7; T <= 24e-6; T *= 1.5) {
            CHECK(remaining_fraction(D, T) > 0.9999);
        }
    }

    SUBCASE("decreasing in temperature, strictly once resolvable") {
        // below ~2 uK the fraction is 1.0 to machine precision
        double prev = 2.0;
        for (int i = 0; i < 60; ++i) {
            const double T = 1e-7 * std::pow(1e5, i / 59.0);
            const double v = remaining_fraction(D, T);
            CHECK(v <= prev);
            if (T >= 10e-6) CHECK(v < prev);
            prev = v;
        }
    }

    CHECK_THROWS_AS(remaining_fraction(D, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(remaining_fraction(-D, 1e-6), std::invalid_argument);
}

TEST_CASE("mean coupling versus temperature") {
    const auto& f = fixture();

    SUBCASE("monotone decrease over 50 log-spaced points") {
        // below ~0.5 uK the occupation is numerically frozen in the ground
        // state; allow ties at machine precision there
        double prev = HUGE_VAL;
        for (int i = 0; i < 50; ++i) {
            const double T = 1e-7 * std::pow(1e5, i / 49.0);
            const double bb = mean_beta(f.psc, occupation(f.table, T));
            CHECK(bb <= prev * (1.0 + 1e-12));
            prev = bb;
        }
        CHECK(mean_beta(f.psc, occupation(f.table, 1e-2)) <
              mean_beta(f.psc, occupation(f.table, 1e-7)));
    }

    SUBCASE("harmonic-basis couplings grow with n where the Morse ones fall") {
        const Domain dom = quadrature_domain(f.table);
        double prev = 0.0;
        for (int n = 40; n <= f.table.n_max; ++n) {
            const double bh = refined_simpson(
                [&](double d) {
                    const double psi = harmonic_wavefunction(f.table.mass, f.table.omega,
                                                             f.trap.center, n, d);
                    return psi * psi * beta_of_distance(f.profile, std::max(d, 1e-12));
                },
                dom.lo, dom.hi, 1e-8, 8 * (n + 1));
            if (n > 40) {
                CHECK(bh >= prev);                          // harmonic: non-decreasing
                CHECK(f.psc.beta_n[n] < f.psc.beta_n[n - 1]);  // Morse: decreasing
            }
            prev = bh;
        }
    }
}

TEST_CASE("two-point calibration") {
    const auto& f = fixture();

    SUBCASE("reference targets round-trip") {
        const CalibrationResult cal = calibrate_coupling({0.012, 0.024, 1e-6}, f.table);
        CHECK(cal.residual < 1e-6);
        CHECK(cal.profile.decay_length > 10e-9);
        CHECK(cal.profile.decay_length < 1e-6);
        CHECK(cal.beta_100uK > 0.015);
        CHECK(cal.beta_100uK < 0.019);

        const PerStateCoupling psc = per_state_coupling(f.table, cal.profile, f.excited);
        CHECK(mean_beta(psc, occupation(f.table, HUGE_VAL)) ==
              doctest::Approx(0.012).epsilon(1e-6));
        CHECK(mean_beta(psc, occupation(f.table, 1e-6)) == doctest::Approx(0.024).epsilon(1e-6));
    }

    SUBCASE("degenerate targets rejected") {
        CHECK_THROWS_AS(calibrate_coupling({0.02, 0.02, 1e-6}, f.table), std::invalid_argument);
        CHECK_THROWS_AS(calibrate_coupling({0.03, 0.02, 1e-6}, f.table), std::invalid_argument);
    }

    SUBCASE("unreachable ratio fails with diagnostics") {
        CHECK_THROWS_AS(calibrate_coupling({0.001, 0.4, 1e-6}, f.table), NumericalError);
    }
}
