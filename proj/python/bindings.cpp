#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rcsense/analysis.hpp"
#include "rcsense/benchmarks.hpp"
#include "rcsense/commands.hpp"
#include "rcsense/config.hpp"
#include "rcsense/delay_reservoir.hpp"
#include "rcsense/error.hpp"
#include "rcsense/esn.hpp"
#include "rcsense/signal.hpp"
#include "rcsense/sweet.hpp"

namespace py = pybind11;
using namespace rcsense;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SweetScenario scenario_named(const std::string& name) {
  if (name == "oect") return oect_scenario();
  if (name == "memristor") return memristor_scenario();
  throw InvalidArgument("unknown scenario '" + name + "' (expected oect or memristor)");
}

py::dict trajectory_dict(const SweetTrajectory& t, double drive_frequency) {
  py::dict d;
  d["sample_rate"] = t.phi.sample_rate();
  d["drive"] = to_vector(t.drive.samples());
  d["phi"] = to_vector(t.phi.samples());
  d["xi"] = to_vector(t.xi.samples());
  d["cycles"] = t.cycles;
  d["hit_max_cycles"] = t.hit_max_cycles;
  py::list starts;
  for (const auto& p : t.packets) starts.append(p.start_time);
  d["packet_starts"] = starts;
  const SensingFeatures f = extract_features(t, drive_frequency);
  d["tau_c"] = f.fit_ok ? py::cast(f.tau_c) : py::none();
  d["first_amplitude"] = f.first_amplitude;
  d["packet_count"] = t.packets.size();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reservoir computing and reservoir-based sensing";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<OutOfRangeError>(m, "OutOfRangeError", numeric.ptr());

  // --- echo state networks ---------------------------------------------------

  py::class_<EchoStateNetwork>(m, "EchoStateNetwork")
      .def(py::init([](std::size_t n_reservoir, std::size_t n_inputs, double spectral_radius,
                       double sparsity, double input_scaling, double leak_rate,
                       const std::string& activation, std::uint64_t seed) {
             ReservoirParams p;
             p.n_reservoir = n_reservoir;
             p.n_inputs = n_inputs;
             p.spectral_radius = spectral_radius;
             p.sparsity = sparsity;
             p.input_scaling = input_scaling;
             p.leak_rate = leak_rate;
             p.activation = activation_from_string(activation);
             p.seed = seed;
             return init_reservoir(p);
           }),
           py::arg("n_reservoir") = 100, py::arg("n_inputs") = 1,
           py::arg("spectral_radius") = 0.9, py::arg("sparsity") = 0.1,
           py::arg("input_scaling") = 1.0, py::arg("leak_rate") = 1.0,
           py::arg("activation") = "tanh", py::arg("seed") = 0)
      .def_property_readonly("w", &EchoStateNetwork::w)
      .def_property_readonly("w_in", &EchoStateNetwork::w_in)
      .def_property("state", &EchoStateNetwork::state, &EchoStateNetwork::set_state)
      .def(
          "update_state",
          [](EchoStateNetwork& esn, const Eigen::VectorXd& u) { return esn.update_state(u); },
          py::arg("u"))
      .def(
          "run",
          [](EchoStateNetwork& esn, const Eigen::MatrixXd& inputs, std::optional<std::size_t> washout,
             bool include_input, bool include_bias) {
            return run(esn, inputs, washout, std::nullopt, StateLayout{include_input, include_bias})
                .values;
          },
          py::arg("inputs"), py::arg("washout") = py::none(), py::arg("include_input") = true,
          py::arg("include_bias") = true,
          "Resets the state and returns the collected state rows after washout.");

  m.def("spectral_radius", &spectral_radius, py::arg("matrix"));
  m.def(
      "train_pinv",
      [](const Eigen::MatrixXd& s, const Eigen::MatrixXd& y) { return train_pinv(s, y).w_out; },
      py::arg("states"), py::arg("targets"), "Least-squares readout; returns W_out (L x M).");
  m.def(
      "train_ridge",
      [](const Eigen::MatrixXd& s, const Eigen::MatrixXd& y, double lambda) {
        return train_ridge(s, y, lambda).w_out;
      },
      py::arg("states"), py::arg("targets"), py::arg("ridge"));
  m.def("nrmse", &nrmse, py::arg("predicted"), py::arg("target"));

  // --- delay reservoir -------------------------------------------------------

  m.def("virtual_neuron_count", &virtual_neuron_count, py::arg("tau"), py::arg("theta"));
  m.def(
      "generate_mask",
      [](const std::string& kind, std::size_t n, std::uint64_t seed) {
        return to_vector(generate_mask(mask_kind_from_string(kind), n, seed).values());
      },
      py::arg("kind"), py::arg("n_virtual"), py::arg("seed") = 0);
  m.def(
      "run_delay_reservoir",
      [](const std::vector<double>& inputs, double tau, double theta, double gamma, double eta,
         const std::vector<double>& mask, const std::string& nonlinearity) {
        DelayReservoirConfig c;
        c.tau = tau;
        c.theta = theta;
        c.gamma = gamma;
        c.eta = eta;
        c.nonlinearity = Nonlinearity::from_name(nonlinearity);
        c.mask = Mask(mask, MaskKind::custom);
        return run_delay_reservoir(c, inputs).states;
      },
      py::arg("inputs"), py::arg("tau"), py::arg("theta"), py::arg("gamma"), py::arg("eta"),
      py::arg("mask"), py::arg("nonlinearity") = "tanh",
      "Virtual-node states, one row per input symbol.");
  m.def("random_bits", &random_bits, py::arg("n"), py::arg("seed"));
  m.def(
      "parity_targets",
      [](const std::vector<double>& u) { return Eigen::VectorXd(parity_targets(u).col(0)); },
      py::arg("bits"));

  // --- analysis --------------------------------------------------------------

  m.def(
      "packet_spectrum",
      [](const std::vector<double>& x, double rate, double f) {
        const PacketSpectrum s = packet_spectrum(x, rate, f);
        py::dict d;
        d["amplitude"] = s.amplitude;
        d["cycles"] = s.cycles;
        d["leakage"] = s.leakage;
        return d;
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("target_frequency"));
  m.def(
      "fit_decay",
      [](const std::vector<double>& times, const std::vector<double>& amplitudes) {
        if (times.size() != amplitudes.size()) {
          throw InvalidArgument("fit_decay: times and amplitudes differ in length");
        }
        PacketSpectrumSeries s;
        for (std::size_t i = 0; i < times.size(); ++i) s.entries.push_back({times[i], amplitudes[i]});
        const DecayFit f = fit_decay(s);
        py::dict d;
        d["a0"] = f.a0;
        d["tau_c"] = f.tau_c;
        d["r_squared"] = f.r_squared;
        return d;
      },
      py::arg("times"), py::arg("amplitudes"), "Fits A(t) = A0 exp(-t / tau_c).");
  m.def(
      "infer_concentration",
      [](const std::vector<double>& concentrations, const std::vector<double>& taus, double tau_c) {
        if (concentrations.size() != taus.size()) {
          throw InvalidArgument("infer_concentration: concentrations and tau_c differ in length");
        }
        std::vector<CalibrationPoint> pts;
        for (std::size_t i = 0; i < taus.size(); ++i) pts.push_back({concentrations[i], taus[i]});
        return infer_concentration(build_calibration(std::move(pts)), tau_c);
      },
      py::arg("concentrations"), py::arg("tau_c_values"), py::arg("tau_c"),
      "Calibrates on the given pairs and inverts the curve at tau_c.");

  // --- sensing loop ----------------------------------------------------------

  m.def(
      "simulate",
      [](const std::string& scenario, double q, std::uint64_t seed) {
        const SweetScenario sc = scenario_named(scenario);
        py::gil_scoped_release release;
        SweetTrajectory t = run_sweet_loop(sc.device, q, sc.loop, sc.sample_rate, seed);
        py::gil_scoped_acquire acquire;
        return trajectory_dict(t, sc.loop.drive.frequency);
      },
      py::arg("scenario"), py::arg("q"), py::arg("seed") = 0,
      "One loop run of the default oect or memristor scenario at environment value q.");
  m.def(
      "quality_of_sensing",
      [](const std::map<double, std::vector<std::vector<double>>>& classes) {
        return quality_of_sensing(classes);
      },
      py::arg("classes"));

  // --- experiments -----------------------------------------------------------

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::filesystem::path& out_dir,
         std::optional<std::uint64_t> seed, std::size_t jobs, bool validate_integration) {
        const ExperimentConfig cfg = parse_config(config_text);
        RunOptions o;
        o.out_dir = out_dir;
        o.seed = seed;
        o.jobs = jobs;
        o.validate_integration = validate_integration;
        std::ostringstream log;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, o, log);
        }
        py::dict d;
        d["out_dir"] = r.out_dir;
        d["files"] = r.files;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none(), py::arg("jobs") = 1,
      py::arg("validate_integration") = false,
      "Runs a scenario from TOML text and writes its artifacts and manifest.");
}
