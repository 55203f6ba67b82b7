#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "itgen/cli.hpp"
#include "itgen/core.hpp"
#include "itgen/eval.hpp"
#include "itgen/generative.hpp"
#include "itgen/ingest.hpp"
#include "itgen/rng.hpp"
#include "itgen/smp.hpp"

namespace py = pybind11;
using namespace itgen;

namespace {

LogHistogram histogram_from_masses(std::vector<double> edges, std::vector<double> masses) {
  if (edges.size() != masses.size() + 1) {
    throw DataError("edges must have one more entry than masses");
  }
  LogHistogram h;
  h.edges = std::move(edges);
  h.masses = std::move(masses);
  return h;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semi-Markov + generative modeling of industrial network traffic";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::enum_<ProductionState>(m, "ProductionState")
      .value("Running", ProductionState::Running)
      .value("Reentry", ProductionState::Reentry)
      .value("Stopped", ProductionState::Stopped)
      .value("Aborted", ProductionState::Aborted)
      .value("Ended", ProductionState::Ended);

  m.def("quantize_payload", &quantize_payload, py::arg("raw_bytes"),
        "Round a payload up to the next multiple of 32 bytes.");

  m.def(
      "kl_divergence",
      [](std::vector<double> edges, std::vector<double> p, std::vector<double> q) {
        return kl_divergence(histogram_from_masses(edges, std::move(p)),
                             histogram_from_masses(std::move(edges), std::move(q)));
      },
      py::arg("edges"), py::arg("p"), py::arg("q"),
      "KL divergence in nats between two histograms sharing ln-space edges.");

  m.def(
      "build_histogram",
      [](const std::vector<double>& samples_ms, int bins) {
        const auto h = build_histogram(samples_ms, bins);
        return py::make_tuple(h.edges, h.masses);
      },
      py::arg("samples_ms"), py::arg("bins") = 50,
      "Equal-width ln-space histogram; returns (edges, masses).");

  // Pipeline commands mirroring the CLI subcommands.
  py::class_<SynthDataConfig>(m, "SynthDataConfig")
      .def(py::init<>())
      .def_readwrite("out_dir", &SynthDataConfig::out_dir)
      .def_readwrite("seed", &SynthDataConfig::seed)
      .def_readwrite("jumps", &SynthDataConfig::jumps)
      .def_readwrite("spec_path", &SynthDataConfig::spec_path);
  m.def("synth_data", &cmd_synth_data, py::arg("config"));

  py::class_<IngestConfig>(m, "IngestConfig")
      .def(py::init<>())
      .def_readwrite("log_path", &IngestConfig::log_path)
      .def_readwrite("state_map_path", &IngestConfig::state_map_path)
      .def_readwrite("out_dir", &IngestConfig::out_dir);
  m.def("ingest", &cmd_ingest, py::arg("config"));

  py::class_<FitSmpConfig>(m, "FitSmpConfig")
      .def(py::init<>())
      .def_readwrite("episodes_path", &FitSmpConfig::episodes_path)
      .def_readwrite("out_dir", &FitSmpConfig::out_dir)
      .def_readwrite("out_name", &FitSmpConfig::out_name);
  m.def("fit_smp", &cmd_fit_smp, py::arg("config"));

  py::class_<TrainCommandConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("samples_path", &TrainCommandConfig::samples_path)
      .def_readwrite("out_dir", &TrainCommandConfig::out_dir)
      .def_readwrite("kind", &TrainCommandConfig::kind)
      .def_readwrite("mode", &TrainCommandConfig::mode)
      .def_readwrite("state", &TrainCommandConfig::state)
      .def_readwrite("epochs", &TrainCommandConfig::epochs)
      .def_readwrite("batch_size", &TrainCommandConfig::batch_size)
      .def_readwrite("learning_rate", &TrainCommandConfig::learning_rate)
      .def_readwrite("split_ratio", &TrainCommandConfig::split_ratio)
      .def_readwrite("seed", &TrainCommandConfig::seed);
  m.def("train", &cmd_train, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<GenerateConfig>(m, "GenerateConfig")
      .def(py::init<>())
      .def_readwrite("smp_path", &GenerateConfig::smp_path)
      .def_readwrite("state_models", &GenerateConfig::state_models)
      .def_readwrite("cvae_path", &GenerateConfig::cvae_path)
      .def_readwrite("samples_path", &GenerateConfig::samples_path)
      .def_readwrite("jumps", &GenerateConfig::jumps)
      .def_readwrite("seed", &GenerateConfig::seed)
      .def_readwrite("out_dir", &GenerateConfig::out_dir)
      .def_readwrite("out_name", &GenerateConfig::out_name);
  m.def("generate", &cmd_generate, py::arg("config"));

  py::class_<EvaluateConfig>(m, "EvaluateConfig")
      .def(py::init<>())
      .def_readwrite("samples_path", &EvaluateConfig::samples_path)
      .def_readwrite("models_dir", &EvaluateConfig::models_dir)
      .def_readwrite("out_dir", &EvaluateConfig::out_dir)
      .def_readwrite("split_ratio", &EvaluateConfig::split_ratio)
      .def_readwrite("seed", &EvaluateConfig::seed)
      .def_readwrite("bins", &EvaluateConfig::bins)
      .def_readwrite("min_generated", &EvaluateConfig::min_generated);
  m.def("evaluate", &cmd_evaluate, py::arg("config"));

  // Direct model access for notebook-style use.
  m.def(
      "sample_model",
      [](const std::string& path, std::optional<ProductionState> state, int n,
         std::uint64_t seed) {
        const auto model = load_model(path);
        Rng rng(seed);
        return sample_interarrivals_ms(model, state, n, rng);
      },
      py::arg("model_path"), py::arg("state") = std::nullopt, py::arg("n") = 1000,
      py::arg("seed") = 0,
      "Draw denormalized interarrival times (ms) from a saved model.");
}
