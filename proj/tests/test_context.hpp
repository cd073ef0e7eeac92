#pragma once

// Shared fixture: reference trap, calibrated coupling and a reduced-sample
// heating table. Built once per test binary.

#include "nearprobe/bound_states.hpp"
#include "nearprobe/constants.hpp"
#include "nearprobe/config.hpp"
#include "nearprobe/coupling.hpp"
#include "nearprobe/heating.hpp"
#include "nearprobe/thermal_context.hpp"

namespace nearprobe::testing {

struct Fixture {
    RunConfig cfg;
    AtomSpecies atom;
    MorsePotential trap;
    RepulsivePotential excited;
    CouplingProfile profile;
    BoundStateTable table;
    PerStateCoupling psc;
    HeatingTable heating;
    ThermalContext ctx;
};

inline const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture x;
        x.atom = make_species(x.cfg.atom_mass, x.cfg.atom_linewidth, x.cfg.atom_wavelength);
        x.trap = {x.cfg.trap_depth, x.cfg.trap_stiffness, x.cfg.trap_center};
        x.excited = {x.cfg.excited_amplitude, x.cfg.excited_decay, x.cfg.trap_center};
        x.profile = {x.cfg.coupling_beta_ref, x.cfg.coupling_decay_length, x.cfg.trap_center};
        x.table = build_bound_states(x.trap, x.cfg.atom_mass);
        x.psc = per_state_coupling(x.table, x.profile, x.excited);
        McSettings mc;
        mc.samples_per_state = 10000;
        mc.seed = 20260811ull;
        x.heating = build_heating_table(x.table, x.excited, x.atom.recoil_temperature,
                                        x.atom.linewidth, mc);
        x.ctx = ThermalContext(x.table, x.psc, x.heating, x.atom);
        return x;
    }();
    return f;
}

}  // namespace nearprobe::testing
