// Python bindings for the core operations: spectra, coupling, heating,
// schedule simulation and fitting.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nearprobe/bound_states.hpp"
#include "nearprobe/commands.hpp"
#include "nearprobe/constants.hpp"
#include "nearprobe/coupling.hpp"
#include "nearprobe/dynamics.hpp"
#include "nearprobe/fd_oracle.hpp"
#include "nearprobe/fitting.hpp"
#include "nearprobe/heating.hpp"
#include "nearprobe/potentials.hpp"
#include "nearprobe/thermal_context.hpp"

namespace py = pybind11;
using namespace nearprobe;

namespace {

py::dict fit_to_dict(const FitModel& model, const FitResult& r) {
    py::dict params, sigmas;
    for (size_t j = 0; j < model.param_names.size(); ++j) {
        params[model.param_names[j].c_str()] = r.params[j];
        sigmas[model.param_names[j].c_str()] = r.uncertainties[j];
    }
    py::dict out;
    out["model"] = model.id;
    out["params"] = params;
    out["sigmas"] = sigmas;
    out["residual_norm"] = r.residual_norm;
    out["converged"] = r.converged;
    out["iterations"] = r.iterations;
    out["diagnostic"] = r.diagnostic;
    return out;
}

}  // namespace

PYBIND11_MODULE(_nearprobe, m) {
    m.doc() = "simulator for near-field probing of atoms trapped beside a waveguide";

    py::class_<PhysicalConstants>(m, "PhysicalConstants")
        .def_readonly("h", &PhysicalConstants::h)
        .def_readonly("hbar", &PhysicalConstants::hbar)
        .def_readonly("k_B", &PhysicalConstants::k_B)
        .def_readonly("c", &PhysicalConstants::c);
    m.attr("si") = si;

    py::class_<AtomSpecies>(m, "AtomSpecies")
        .def_readonly("mass", &AtomSpecies::mass)
        .def_readonly("linewidth", &AtomSpecies::linewidth)
        .def_readonly("wavelength", &AtomSpecies::wavelength)
        .def_readonly("wavenumber", &AtomSpecies::wavenumber)
        .def_readonly("recoil_temperature", &AtomSpecies::recoil_temperature)
        .def_readonly("saturated_power", &AtomSpecies::saturated_power);
    m.def("cesium_defaults", &cesium_defaults);
    m.def("make_species", &make_species, py::arg("mass"), py::arg("linewidth"),
          py::arg("wavelength"));

    py::class_<MorsePotential>(m, "MorsePotential")
        .def(py::init<double, double, double>(), py::arg("depth"), py::arg("stiffness"),
             py::arg("center"))
        .def_readwrite("depth", &MorsePotential::depth)
        .def_readwrite("stiffness", &MorsePotential::stiffness)
        .def_readwrite("center", &MorsePotential::center);
    py::class_<RepulsivePotential>(m, "RepulsivePotential")
        .def(py::init<double, double, double>(), py::arg("amplitude"), py::arg("decay"),
             py::arg("reference"))
        .def_readwrite("amplitude", &RepulsivePotential::amplitude)
        .def_readwrite("decay", &RepulsivePotential::decay)
        .def_readwrite("reference", &RepulsivePotential::reference);
    m.def("morse_energy", &morse_energy, py::arg("potential"), py::arg("d"));
    m.def("repulsive_energy", &repulsive_energy, py::arg("potential"), py::arg("d"));
    m.def("trap_frequency", &trap_frequency, py::arg("potential"), py::arg("mass"));
    m.def("morse_lambda", &morse_lambda, py::arg("potential"), py::arg("mass"));

    py::class_<BoundStateTable>(m, "BoundStateTable")
        .def_readonly("mass", &BoundStateTable::mass)
        .def_readonly("omega", &BoundStateTable::omega)
        .def_readonly("well_parameter", &BoundStateTable::lambda)
        .def_readonly("n_max", &BoundStateTable::n_max)
        .def_readonly("energies", &BoundStateTable::energies)
        .def_readonly("mean_distances", &BoundStateTable::mean_distances)
        .def("size", &BoundStateTable::size)
        .def("energy_above_minimum", &BoundStateTable::energy_above_minimum, py::arg("n"))
        .def("wavefunction",
             [](const BoundStateTable& t, int n, double d) { return wavefunction(t, n, d); },
             py::arg("n"), py::arg("d"));
    m.def("build_bound_states", &build_bound_states, py::arg("potential"), py::arg("mass"));
    m.def("harmonic_wavefunction", &harmonic_wavefunction, py::arg("mass"), py::arg("omega"),
          py::arg("center"), py::arg("n"), py::arg("d"));
    m.def("state_overlap", &state_overlap, py::arg("table"), py::arg("n"), py::arg("f"),
          py::arg("rel_tol") = 1e-8);

    py::class_<CouplingProfile>(m, "CouplingProfile")
        .def(py::init<double, double, double>(), py::arg("beta_ref"), py::arg("decay_length"),
             py::arg("reference"))
        .def_readwrite("beta_ref", &CouplingProfile::beta_ref)
        .def_readwrite("decay_length", &CouplingProfile::decay_length)
        .def_readwrite("reference", &CouplingProfile::reference);
    m.def("beta_of_distance", &beta_of_distance, py::arg("profile"), py::arg("d"));

    py::class_<ThermalOccupation>(m, "ThermalOccupation")
        .def_readonly("temperature", &ThermalOccupation::temperature)
        .def_readonly("weights", &ThermalOccupation::weights);
    m.def("occupation", &occupation, py::arg("table"), py::arg("temperature"));

    py::class_<PerStateCoupling>(m, "PerStateCoupling")
        .def_readonly("beta_n", &PerStateCoupling::beta_n)
        .def_readonly("delta_n", &PerStateCoupling::delta_n);
    m.def("per_state_coupling", &per_state_coupling, py::arg("table"), py::arg("profile"),
          py::arg("excited"));
    m.def("mean_beta", &mean_beta, py::arg("per_state"), py::arg("occupation"));
    m.def("mean_detuning", &mean_detuning, py::arg("per_state"), py::arg("occupation"));
    m.def("remaining_fraction", &remaining_fraction, py::arg("depth"), py::arg("temperature"));

    py::class_<CalibrationResult>(m, "CalibrationResult")
        .def_readonly("profile", &CalibrationResult::profile)
        .def_readonly("residual", &CalibrationResult::residual)
        .def_readonly("beta_100uK", &CalibrationResult::beta_100uK)
        .def_readonly("iterations", &CalibrationResult::iterations);
    m.def(
        "calibrate_coupling",
        [](double beta_hot, double beta_cold, double cold_temperature,
           const BoundStateTable& table) {
            return calibrate_coupling({beta_hot, beta_cold, cold_temperature}, table);
        },
        py::arg("beta_hot"), py::arg("beta_cold"), py::arg("cold_temperature"), py::arg("table"));

    m.def("scattering_rate", &scattering_rate, py::arg("s"), py::arg("detuning"),
          py::arg("linewidth"));

    py::class_<McSettings>(m, "McSettings")
        .def(py::init<>())
        .def_readwrite("samples_per_state", &McSettings::samples_per_state)
        .def_readwrite("seed", &McSettings::seed)
        .def_readwrite("threads", &McSettings::threads);
    py::class_<HeatingTable>(m, "HeatingTable")
        .def_readonly("delta_T", &HeatingTable::delta_T)
        .def_readonly("standard_error", &HeatingTable::standard_error)
        .def_readonly("recoil_temperature", &HeatingTable::recoil_temperature)
        .def_readonly("samples", &HeatingTable::samples)
        .def_readonly("seed", &HeatingTable::seed);
    m.def("build_heating_table", &build_heating_table, py::arg("table"), py::arg("excited"),
          py::arg("recoil_temperature"), py::arg("linewidth"), py::arg("settings"),
          py::call_guard<py::gil_scoped_release>());
    m.def("mean_heating_per_scatter", &mean_heating_per_scatter, py::arg("heating"),
          py::arg("occupation"));

    py::class_<ThermalContext>(m, "ThermalContext")
        .def(py::init<const BoundStateTable&, const PerStateCoupling&, const HeatingTable&,
                      const AtomSpecies&>(),
             py::arg("table"), py::arg("per_state"), py::arg("heating"), py::arg("atom"))
        .def_readwrite("recoil_only", &ThermalContext::recoil_only)
        .def("beta_bar", &ThermalContext::beta_bar, py::arg("temperature"))
        .def("delta", &ThermalContext::delta, py::arg("temperature"))
        .def("heating_per_scatter", &ThermalContext::heating_per_scatter, py::arg("temperature"))
        .def("beta_bar_inf", &ThermalContext::beta_bar_inf);
    m.def("heating_rate", &heating_rate, py::arg("s"), py::arg("temperature"), py::arg("context"));

    m.def("saturation_parameter", &saturation_parameter, py::arg("power_norm"),
          py::arg("beta_bar"), py::arg("beta_bar_inf"));
    m.def("transmission", &transmission, py::arg("beta_bar"), py::arg("atom_number"));
    m.def("double_exp_transmission", &double_exp_transmission, py::arg("od0"), py::arg("gamma"),
          py::arg("t"));

    py::class_<DynamicsConfig>(m, "DynamicsConfig")
        .def(py::init<>())
        .def_readwrite("initial_temperature", &DynamicsConfig::initial_temperature)
        .def_readwrite("passive_rate", &DynamicsConfig::passive_rate)
        .def_readwrite("cooling_rate", &DynamicsConfig::cooling_rate)
        .def_readwrite("rel_tol", &DynamicsConfig::rel_tol)
        .def_readwrite("sample_period", &DynamicsConfig::sample_period)
        .def_readwrite("atom_number", &DynamicsConfig::atom_number);

    py::class_<PulseSchedule>(m, "PulseSchedule")
        .def(py::init<>())
        .def("probe",
             [](PulseSchedule& s, double duration, double power) -> PulseSchedule& {
                 s.segments.push_back(ProbeSegment{duration, power});
                 return s;
             },
             py::arg("duration"), py::arg("power_norm"), py::return_value_policy::reference)
        .def("cool",
             [](PulseSchedule& s, double duration) -> PulseSchedule& {
                 s.segments.push_back(CoolSegment{duration});
                 return s;
             },
             py::arg("duration"), py::return_value_policy::reference)
        .def("wait",
             [](PulseSchedule& s, double duration) -> PulseSchedule& {
                 s.segments.push_back(WaitSegment{duration});
                 return s;
             },
             py::arg("duration"), py::return_value_policy::reference)
        .def("readout", [](PulseSchedule& s) -> PulseSchedule& {
            s.segments.push_back(ReadoutSegment{});
            return s;
        }, py::return_value_policy::reference);

    py::class_<TransmissionTrace>(m, "TransmissionTrace")
        .def_readonly("time", &TransmissionTrace::time)
        .def_readonly("value", &TransmissionTrace::value)
        .def_readonly("temperature", &TransmissionTrace::temperature)
        .def_readonly("atoms", &TransmissionTrace::atoms)
        .def_readonly("beta", &TransmissionTrace::beta)
        .def_readonly("segment", &TransmissionTrace::segment)
        .def_readonly("readout_time", &TransmissionTrace::readout_time)
        .def_readonly("readout_od", &TransmissionTrace::readout_od);
    py::class_<StitchedTrace>(m, "StitchedTrace")
        .def_readonly("probe_time", &StitchedTrace::probe_time)
        .def_readonly("value", &StitchedTrace::value)
        .def_readonly("segment", &StitchedTrace::segment);
    m.def("run_schedule", &run_schedule, py::arg("schedule"), py::arg("config"),
          py::arg("context"), py::call_guard<py::gil_scoped_release>());
    m.def("stitch", &stitch, py::arg("trace"));

    m.def(
        "fit_model",
        [](const std::string& id, const std::vector<double>& x, const std::vector<double>& y,
           double linewidth) {
            const FitModel model = model_by_id(id, linewidth);
            return fit_to_dict(model, fit(model, x, y));
        },
        py::arg("model"), py::arg("x"), py::arg("y"),
        py::arg("linewidth") = cesium_defaults().linewidth);

    py::class_<FlankMetrics>(m, "FlankMetrics")
        .def_readonly("gamma", &FlankMetrics::gamma)
        .def_readonly("gamma_ini", &FlankMetrics::gamma_ini)
        .def_readonly("od0_long", &FlankMetrics::od0_long)
        .def_readonly("delta_od_ini", &FlankMetrics::delta_od_ini);
    m.def("extract_flank_metrics", &extract_flank_metrics, py::arg("t"), py::arg("y"));

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
