#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "csm/error.hpp"
#include "csm/hilbert.hpp"
#include "csm/measurement.hpp"
#include "csm/qnd.hpp"
#include "csm/scenario.hpp"
#include "csm/trajectory.hpp"

namespace py = pybind11;

namespace {

csm::Context make_context(const std::string &kind, std::size_t dim, double theta, std::uint64_t seed,
                          const std::optional<csm::Matrix> &matrix, const std::string &id) {
    const std::string name = id.empty() ? kind : id;
    if (kind == "computational") return csm::build_context(name, csm::spec::Computational{}, dim);
    if (kind == "fourier") return csm::build_context(name, csm::spec::Fourier{}, dim);
    if (kind == "rotation") return csm::build_context(name, csm::spec::Rotation{theta}, dim);
    if (kind == "haar") return csm::build_context(name, csm::spec::Haar{seed}, dim);
    if (kind == "explicit") {
        if (!matrix) throw py::value_error("explicit contexts need a matrix");
        return csm::build_context(name, csm::spec::Explicit{*matrix}, dim);
    }
    throw py::value_error("unknown context kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contexts-systems-modalities measurement simulator";
    m.attr("__version__") = CSM_SIM_VERSION;

    py::register_exception<csm::Error>(m, "CsmError", PyExc_RuntimeError);

    py::class_<csm::Context>(m, "Context")
        .def_property_readonly("id", &csm::Context::id)
        .def_property_readonly("dim", &csm::Context::dim)
        .def_property_readonly("basis", &csm::Context::basis)
        .def("__repr__", [](const csm::Context &c) {
            return "<Context '" + c.id() + "' dim=" + std::to_string(c.dim()) + ">";
        });

    m.def("build_context", &make_context, py::arg("kind"), py::arg("dim") = 2, py::arg("theta") = 0.0,
          py::arg("seed") = 0, py::arg("matrix") = std::nullopt, py::arg("id") = "",
          "Build a context: computational, fourier, rotation (theta), haar (seed) or explicit (matrix).");

    m.def("haar_random_unitary", [](std::uint64_t seed, std::size_t dim) {
        return csm::haar_random_unitary(seed, dim).matrix;
    }, py::arg("seed"), py::arg("dim"));

    m.def("context_change_unitary", [](const csm::Context &from, const csm::Context &to) {
        return csm::context_change_unitary(from, to).matrix;
    });

    m.def("projector", [](const csm::Context &c, std::size_t index) {
        return csm::projector(csm::Modality(c, index)).matrix;
    });

    m.def("born_probability", [](const csm::Context &a, std::size_t i, const csm::Context &b, std::size_t j) {
        return csm::born_probability(csm::Modality(a, i), csm::Modality(b, j));
    });

    m.def("transition_matrix", [](const csm::Context &from, const csm::Context &to) {
        return csm::transition_matrix(from, to).entries;
    });

    m.def("propagate", [](const csm::RealVector &dist, const csm::RealMatrix &transition) {
        return csm::propagate(csm::ProbabilityDistribution(dist), csm::TransitionMatrix{transition}).weights();
    });

    m.def("irreversible_return", [](const csm::Context &home, std::size_t initial, const csm::Context &mid,
                                    std::size_t final_index) {
        return csm::irreversible_return(csm::Modality(home, initial), mid, final_index);
    });

    m.def("reversible_return", [](const csm::Context &home, std::size_t initial, const csm::Context &mid,
                                  std::size_t final_index) {
        return csm::reversible_return(csm::Modality(home, initial), mid, final_index);
    });

    m.def("interference_return", [](const csm::Context &home, std::size_t initial, const csm::Context &mid,
                                    const std::vector<double> &phases, std::size_t final_index) {
        return csm::interference_return(csm::Modality(home, initial), mid, phases, final_index);
    });

    m.def("gram_uniform", [](std::size_t n, double g) { return csm::gram_uniform(n, g).entries(); });

    m.def("meter_states_from_gram", [](const csm::Matrix &gram) {
        return csm::meter_states_from_gram(csm::GramMatrix(gram)).states();
    });

    m.def("meter_return_probability", [](const csm::Context &home, std::size_t initial, const csm::Context &pointer,
                                         const csm::Matrix &gram, std::size_t final_index) {
        return csm::meter_return_probability(csm::Modality(home, initial), pointer, csm::GramMatrix(gram),
                                             final_index);
    });

    m.def("reduced_system_state", [](const csm::Context &home, std::size_t initial, const csm::Context &pointer,
                                     const csm::Matrix &gram) {
        return csm::reduced_system_state(csm::Modality(home, initial), pointer, csm::GramMatrix(gram)).matrix();
    });

    m.def("meter_chain_reduced_state", [](const csm::Context &home, std::size_t initial, const csm::Context &pointer,
                                          const csm::Matrix &gram, std::size_t m_count) {
        return csm::meter_chain_reduced_state(csm::Modality(home, initial), pointer, csm::GramMatrix(gram), m_count)
            .matrix();
    });

    m.def("meter_protocol_entropy", [](const csm::Context &home, std::size_t initial, const csm::Context &pointer,
                                       const csm::Matrix &gram) {
        return csm::meter_protocol_entropy(csm::Modality(home, initial), pointer, csm::GramMatrix(gram));
    });

    m.def("shannon_entropy", [](const csm::RealVector &dist) {
        return csm::shannon_entropy(csm::ProbabilityDistribution(dist));
    });

    m.def("mean_entropy_production",
          [](const std::vector<csm::Context> &contexts, std::size_t initial, std::size_t n_samples,
             std::uint64_t seed, std::size_t workers) {
              const csm::Protocol protocol(contexts, initial);
              csm::TrajectoryEnsembleStats stats;
              {
                  py::gil_scoped_release release;
                  stats = csm::mean_entropy_production(protocol, n_samples, seed, workers);
              }
              py::dict out;
              out["sample_count"] = stats.sample_count;
              out["mean_entropy_production"] = stats.mean_entropy_production;
              out["std_error"] = stats.std_error;
              out["final_distribution"] = csm::RealVector(stats.final_distribution.weights());
              out["final_frequencies"] = stats.final_frequencies;
              out["shannon_entropy_final"] = stats.shannon_entropy_final;
              return out;
          },
          py::arg("contexts"), py::arg("initial"), py::arg("n_samples"), py::arg("seed") = 0,
          py::arg("workers") = 1);

    m.def("exact_entropy_production", [](const std::vector<csm::Context> &contexts, std::size_t initial) {
        const csm::ExactEnsembleStats stats = csm::exact_entropy_production(csm::Protocol(contexts, initial));
        py::dict out;
        out["path_count"] = stats.path_count;
        out["mean_entropy_production"] = stats.mean_entropy_production;
        out["shannon_entropy_final"] = stats.shannon_entropy_final;
        return out;
    });

    m.def("run_scenario_json",
          [](const std::string &text, std::uint64_t seed, std::size_t n_samples, bool exhaustive,
             std::size_t workers) {
              csm::RunOptions options{seed, n_samples, exhaustive, workers};
              return csm::dump_report(csm::run_scenario(csm::parse_scenario_text(text), options));
          },
          py::arg("scenario"), py::arg("seed") = 0, py::arg("n_samples") = 10000, py::arg("exhaustive") = false,
          py::arg("workers") = 1, "Run a scenario given as JSON text; returns the report as JSON text.");

    m.def("verify_scenario_json", [](const std::string &text, double tolerance) {
        return csm::dump_report(csm::verify_scenario(csm::parse_scenario_text(text), tolerance).to_json());
    }, py::arg("scenario"), py::arg("tolerance") = 1e-10);

}
