import math

import pytest

import nearprobe as np_


def reference_trap():
    si = np_.si
    return np_.MorsePotential(240e-6 * si.k_B, 5.84e6, 231e-9)


def test_cesium_constants():
    cs = np_.cesium_defaults()
    assert cs.saturated_power == pytest.approx(3.8e-12, rel=0.02)
    assert cs.recoil_temperature == pytest.approx(99e-9, rel=0.01)
    assert cs.wavenumber * cs.wavelength == pytest.approx(2 * math.pi)


def test_bound_state_census():
    cs = np_.cesium_defaults()
    table = np_.build_bound_states(reference_trap(), cs.mass)
    assert table.size() == 62
    assert table.n_max == 61
    assert table.omega / (2 * math.pi) == pytest.approx(161e3, rel=0.02)
    energies = table.energies
    assert all(e < 0 for e in energies)
    assert all(b > a for a, b in zip(energies, energies[1:]))
    dbar = table.mean_distances
    assert all(b >= a for a, b in zip(dbar, dbar[1:]))


def test_wavefunction_normalization():
    cs = np_.cesium_defaults()
    table = np_.build_bound_states(reference_trap(), cs.mass)
    norm = np_.state_overlap(table, 0, lambda d: 1.0)
    assert norm == pytest.approx(1.0, abs=1e-6)


def test_occupation_and_survival():
    cs = np_.cesium_defaults()
    table = np_.build_bound_states(reference_trap(), cs.mass)
    occ = np_.occupation(table, math.inf)
    assert occ.weights[0] == pytest.approx(1.0 / 62)
    assert sum(occ.weights) == pytest.approx(1.0, abs=1e-12)
    depth = 240e-6 * np_.si.k_B
    assert np_.remaining_fraction(depth, 100e-6) == pytest.approx(0.909, abs=1e-3)


def test_transmission_and_rates():
    assert np_.transmission(0.011, 29.0) == pytest.approx(0.276, abs=2e-3)
    assert np_.transmission(0.0, 10.0) == 1.0
    cs = np_.cesium_defaults()
    assert np_.scattering_rate(1.0, 0.0, cs.linewidth) == pytest.approx(cs.linewidth / 4)
    assert np_.double_exp_transmission(1.23, 6e3, 500e-6) == pytest.approx(0.941, abs=1e-3)
    assert np_.saturation_parameter(0.26, 0.024, 0.012) == pytest.approx(0.52)


def test_fit_round_trip():
    truth_od0, truth_gamma = 1.23, 6000.0
    t = [i * 1e-5 for i in range(100)]
    y = [np_.double_exp_transmission(truth_od0, truth_gamma, ti) for ti in t]
    res = np_.fit_model("double_exp", t, y)
    assert res["converged"]
    assert res["params"]["od0"] == pytest.approx(truth_od0, rel=1e-8)
    assert res["params"]["gamma"] == pytest.approx(truth_gamma, rel=1e-8)


@pytest.fixture(scope="module")
def context():
    cs = np_.cesium_defaults()
    trap = reference_trap()
    table = np_.build_bound_states(trap, cs.mass)
    profile = np_.CouplingProfile(0.0242017727, 88.95446058e-9, trap.center)
    excited = np_.RepulsivePotential(480e-6 * np_.si.k_B, 10.22e6, trap.center)
    psc = np_.per_state_coupling(table, profile, excited)
    mc = np_.McSettings()
    mc.samples_per_state = 10000
    heating = np_.build_heating_table(table, excited, cs.recoil_temperature, cs.linewidth, mc)
    return np_.ThermalContext(table, psc, heating, cs)


def test_probe_schedule(context):
    cfg = np_.DynamicsConfig()
    schedule = np_.PulseSchedule()
    schedule.probe(20e-6, 0.26).cool(8e-3).probe(20e-6, 0.26)
    trace = np_.run_schedule(schedule, cfg, context)
    assert len(trace.time) == 2 * 21
    # probe heats, transmission rises; cooling restores coupling
    assert trace.value[20] > trace.value[0]
    assert 50e-6 < trace.temperature[20] < 150e-6
    assert trace.value[21] < trace.value[20]
    stitched = np_.stitch(trace)
    assert stitched.probe_time[-1] == pytest.approx(40e-6)


def test_mean_beta_anchor(context):
    assert context.beta_bar_inf() == pytest.approx(0.012, rel=1e-4)
    assert context.beta_bar(1e-6) == pytest.approx(0.024, rel=1e-3)
