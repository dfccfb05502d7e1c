#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include "csm/error.hpp"
#include "csm/measurement.hpp"
#include "csm/qnd.hpp"
#include "csm/rng.hpp"
#include "csm/scenario.hpp"
#include "csm/trajectory.hpp"

namespace csm {

namespace {

Json real_matrix_to_json(const RealMatrix &m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json complex_matrix_to_json(const Matrix &m) {
    return {{"re", real_matrix_to_json(m.real())}, {"im", real_matrix_to_json(m.imag())}};
}

Json vector_to_json(const RealVector &v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

double max_coherence(const DensityMatrix &rho) {
    double best = 0.0;
    for (std::size_t r = 0; r < rho.dim(); ++r) {
        for (std::size_t c = 0; c < rho.dim(); ++c) {
            if (r != c) best = std::max(best, std::abs(rho(r, c)));
        }
    }
    return best;
}

std::vector<double> meter_returns(const Modality &initial, const Context &pointer, const GramMatrix &gram) {
    std::vector<double> out;
    for (std::size_t k = 0; k < initial.context().dim(); ++k) {
        out.push_back(meter_return_probability(initial, pointer, gram, k));
    }
    return out;
}

std::vector<double> phase_vector(std::size_t dim, double phi) {
    std::vector<double> phases(dim, 0.0);
    phases[1] = phi;
    return phases;
}

Json table_to_json(const SweepTable &table) {
    Json rows = Json::array();
    for (const auto &row : table.rows) {
        Json entry;
        for (std::size_t c = 0; c < table.header.size(); ++c) entry[table.header[c]] = row[c];
        rows.push_back(std::move(entry));
    }
    return rows;
}

}  // namespace

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
    if (name == "g") return SweepParam::G;
    if (name == "m_count") return SweepParam::MCount;
    if (name == "phi") return SweepParam::Phi;
    return std::nullopt;
}

std::string_view sweep_param_name(SweepParam param) {
    switch (param) {
        case SweepParam::G: return "g";
        case SweepParam::MCount: return "m_count";
        case SweepParam::Phi: return "phi";
    }
    return "?";
}

std::vector<double> linspace(double from, double to, std::size_t steps) {
    if (steps == 0) return {};
    if (steps == 1) return {from};
    std::vector<double> out(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        out[i] = from + (to - from) * t;
    }
    out.back() = to;
    return out;
}

SweepTable sweep_table(const Scenario &scenario, const ScenarioObjects &objects, SweepParam param,
                       const std::vector<double> &values) {
    const Modality initial = objects.protocol.initial();
    const std::size_t n = scenario.dim;
    SweepTable table;
    table.param = param;
    table.header.emplace_back(sweep_param_name(param));

    if ((param == SweepParam::G || param == SweepParam::MCount) && !objects.pointer) {
        throw Error(ErrorCode::ValidationError, "sweep over " + std::string(sweep_param_name(param)) +
                                                    " needs a meter in scenario '" + scenario.source + "'");
    }

    switch (param) {
        case SweepParam::G: {
            for (std::size_t k = 0; k < n; ++k) table.header.push_back("return_" + std::to_string(k));
            table.header.emplace_back("entropy");
            table.header.emplace_back("coherence");
            for (double g : values) {
                const GramMatrix gram = gram_uniform(n, g);
                std::vector<double> row{g};
                for (double p : meter_returns(initial, *objects.pointer, gram)) row.push_back(p);
                row.push_back(meter_protocol_entropy(initial, *objects.pointer, gram));
                row.push_back(max_coherence(reduced_system_state(initial, *objects.pointer, gram)));
                table.rows.push_back(std::move(row));
            }
            break;
        }
        case SweepParam::MCount: {
            table.header.emplace_back("coherence");
            for (std::size_t j = 0; j < n; ++j) table.header.push_back("diag_" + std::to_string(j));
            for (double value : values) {
                if (!(value >= 0.0) || value != std::floor(value)) {
                    throw Error(ErrorCode::ValidationError, "m_count values must be non-negative integers");
                }
                const auto m = static_cast<std::size_t>(value);
                const DensityMatrix rho = meter_chain_reduced_state(initial, *objects.pointer, *objects.gram, m);
                std::vector<double> row{value, max_coherence(rho)};
                for (std::size_t j = 0; j < n; ++j) row.push_back(rho(j, j).real());
                table.rows.push_back(std::move(row));
            }
            break;
        }
        case SweepParam::Phi: {
            for (std::size_t k = 0; k < n; ++k) table.header.push_back("return_" + std::to_string(k));
            for (double phi : values) {
                const std::vector<double> phases = phase_vector(n, phi);
                std::vector<double> row{phi};
                for (std::size_t k = 0; k < n; ++k) {
                    row.push_back(interference_return(initial, objects.intermediate, phases, k));
                }
                table.rows.push_back(std::move(row));
            }
            break;
        }
    }
    return table;
}

std::vector<SweepTable> scenario_sweeps(const Scenario &scenario, const ScenarioObjects &objects) {
    std::vector<SweepTable> tables;
    if (!scenario.sweep) return tables;
    const SweepSpec &sweep = *scenario.sweep;
    if (!sweep.g.empty()) tables.push_back(sweep_table(scenario, objects, SweepParam::G, sweep.g));
    if (!sweep.m_count.empty()) {
        std::vector<double> values(sweep.m_count.begin(), sweep.m_count.end());
        tables.push_back(sweep_table(scenario, objects, SweepParam::MCount, values));
    }
    if (!sweep.phi.empty()) tables.push_back(sweep_table(scenario, objects, SweepParam::Phi, sweep.phi));
    return tables;
}

std::string to_csv(const SweepTable &table) {
    std::string out;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c > 0) out += ',';
        out += table.header[c];
    }
    out += '\n';
    char buffer[64];
    for (const auto &row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            std::snprintf(buffer, sizeof buffer, "%.17g", row[c]);
            out += buffer;
        }
        out += '\n';
    }
    return out;
}

Json run_scenario(const Scenario &scenario, const RunOptions &options) {
    const ScenarioObjects objects = build_scenario(scenario);
    const Protocol &protocol = objects.protocol;
    const Modality initial = protocol.initial();
    const std::size_t n = scenario.dim;

    Json report;
    report["tool"] = "csm-sim";
    report["version"] = CSM_SIM_VERSION;
    report["rng"] = kRngName;
    report["seed"] = options.seed;
    report["n_samples"] = options.n_samples;
    report["exhaustive"] = options.exhaustive;
    report["scenario"] = scenario_to_json(scenario);

    try {
        Json steps = Json::array();
        for (std::size_t k = 0; k < protocol.steps(); ++k) {
            steps.push_back({{"from", protocol.contexts()[k].id()},
                             {"to", protocol.contexts()[k + 1].id()},
                             {"transition", real_matrix_to_json(protocol.forward_step(k).entries)}});
        }
        report["protocol"] = {{"sequence", scenario.sequence},
                              {"initial", {{"context", scenario.initial.context}, {"index", scenario.initial.index}}},
                              {"steps", std::move(steps)},
                              {"final_marginal", vector_to_json(protocol.final_marginal().weights())},
                              {"final_shannon_entropy", shannon_entropy(protocol.final_marginal())}};

        Json reversible = Json::array(), irreversible = Json::array();
        for (std::size_t k = 0; k < n; ++k) {
            reversible.push_back(reversible_return(initial, objects.intermediate, k));
            irreversible.push_back(irreversible_return(initial, objects.intermediate, k));
        }
        report["returns"] = {{"intermediate", objects.intermediate.id()},
                             {"initial_index", scenario.initial.index},
                             {"reversible", std::move(reversible)},
                             {"irreversible", std::move(irreversible)}};

        if (objects.pointer) {
            const Context &pointer = *objects.pointer;
            const GramMatrix &gram = *objects.gram;
            const MeterStates meters = meter_states_from_gram(gram);
            const DensityMatrix reduced = reduced_system_state(initial, pointer, gram);
            Json meter;
            meter["pointer"] = pointer.id();
            meter["gram"] = complex_matrix_to_json(gram.entries());
            meter["dim_meter"] = meters.dim_meter();
            meter["return_probability"] = meter_returns(initial, pointer, gram);
            meter["reduced_state"] = complex_matrix_to_json(reduced.matrix());
            meter["max_coherence"] = max_coherence(reduced);
            meter["entropy"] = meter_protocol_entropy(initial, pointer, gram);
            report["meter"] = std::move(meter);
        }

        if (options.n_samples > 0) {
            const TrajectoryEnsembleStats stats =
                mean_entropy_production(protocol, options.n_samples, options.seed, options.workers);
            Json ensemble;
            ensemble["sample_count"] = stats.sample_count;
            ensemble["mean_entropy_production"] = stats.mean_entropy_production;
            ensemble["std_error"] = stats.std_error;
            ensemble["final_distribution"] = vector_to_json(stats.final_distribution.weights());
            ensemble["final_frequencies"] = vector_to_json(stats.final_frequencies);
            ensemble["shannon_entropy_final"] = stats.shannon_entropy_final;
            const double gap = std::abs(stats.mean_entropy_production - stats.shannon_entropy_final);
            ensemble["within_3_std_error"] = gap <= 3.0 * stats.std_error;
            report["ensemble"] = std::move(ensemble);
        }

        if (options.exhaustive) {
            const ExactEnsembleStats exact = exact_entropy_production(protocol);
            report["exact_ensemble"] = {{"path_count", exact.path_count},
                                        {"total_probability", exact.total_probability},
                                        {"mean_entropy_production", exact.mean_entropy_production},
                                        {"final_distribution", vector_to_json(exact.final_distribution.weights())},
                                        {"shannon_entropy_final", exact.shannon_entropy_final}};
        }

        const std::vector<SweepTable> tables = scenario_sweeps(scenario, objects);
        if (!tables.empty()) {
            Json sweep = Json::object();
            for (const SweepTable &t : tables) sweep[std::string(sweep_param_name(t.param))] = table_to_json(t);
            report["sweep"] = std::move(sweep);
        }
    } catch (const Error &e) {
        throw Error(e.code(), "scenario '" + scenario.source + "': " + e.what());
    }
    return report;
}

}  // namespace csm
