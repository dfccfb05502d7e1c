#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "csm/error.hpp"
#include "csm/measurement.hpp"
#include "csm/qnd.hpp"
#include "csm/scenario.hpp"
#include "csm/trajectory.hpp"

namespace csm {

namespace {

class CheckList {
  public:
    explicit CheckList(double tolerance) : tolerance_(tolerance) {}

    void add(std::string name, double residual, std::string detail = {}) {
        const bool ok = std::isfinite(residual) && residual <= tolerance_;
        checks_.push_back({std::move(name), residual, ok, std::move(detail)});
    }

    /// Runs `compute`; a thrown domain error becomes a failed check.
    void run(const std::string &name, const std::function<double()> &compute) {
        try {
            add(name, compute());
        } catch (const Error &e) {
            add(name, std::numeric_limits<double>::infinity(), e.what());
        }
    }

    std::vector<Check> take() { return std::move(checks_); }

  private:
    double tolerance_;
    std::vector<Check> checks_;
};

double identity_residual(const Matrix &m) {
    return max_abs_diff(m, Matrix::Identity(m.rows(), m.cols()));
}

double stochastic_residual(const RealMatrix &t) {
    const double rows = (t.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double cols = (t.colwise().sum().array() - 1.0).abs().maxCoeff();
    return std::max(rows, cols);
}

Json residual_to_json(double r) {
    if (std::isfinite(r)) return r;
    return nullptr;
}

void context_checks(CheckList &list, const Context &c) {
    const std::string prefix = "context/" + c.id() + "/";
    list.add(prefix + "orthonormality", orthonormality_residual(c.basis()));
    double projector_residual = 0.0;
    const auto n = static_cast<Eigen::Index>(c.dim());
    Matrix closure = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < c.dim(); ++j) {
        const Matrix p = projector(Modality(c, j)).matrix;
        projector_residual = std::max({projector_residual, max_abs_diff(p * p, p), max_abs_diff(p, p.adjoint()),
                                       std::abs(p.trace() - Complex{1.0, 0.0})});
        closure += p;
    }
    list.add(prefix + "projectors", projector_residual);
    list.add(prefix + "closure", identity_residual(closure));
}

void pair_checks(CheckList &list, const Context &a, const Context &b) {
    const std::string prefix = "pair/" + a.id() + "->" + b.id() + "/";
    const RealMatrix forward = transition_matrix(a, b).entries;
    const RealMatrix backward = transition_matrix(b, a).entries;
    list.add(prefix + "unistochastic", stochastic_residual(forward));
    list.add(prefix + "born_symmetry", (forward - backward.transpose()).cwiseAbs().maxCoeff());
    list.add(prefix + "inverse",
             identity_residual(compose(context_change_unitary(a, b), context_change_unitary(b, a)).matrix));
    list.add(prefix + "maps_basis", max_abs_diff(context_change_unitary(a, b).matrix * a.basis(), b.basis()));
    list.add(prefix + "reversible_return", identity_residual(reversible_return_matrix(a, b).cast<Complex>()));
    const RealMatrix irreversible = irreversible_return_matrix(a, b);
    list.add(prefix + "irreversible_normalization", (irreversible.colwise().sum().array() - 1.0).abs().maxCoeff());
}

void meter_checks(CheckList &list, const Modality &initial, const Context &pointer, const GramMatrix &gram) {
    const std::size_t n = pointer.dim();
    list.run("meter/realization", [&] {
        const MeterStates meters = meter_states_from_gram(gram);
        return max_abs_diff(meters.states().adjoint() * meters.states(), gram.entries());
    });
    list.run("meter/limit_orthogonal", [&] {
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            r = std::max(r, std::abs(meter_return_probability(initial, pointer, gram_identity(n), k) -
                                     irreversible_return(initial, pointer, k)));
        }
        return r;
    });
    list.run("meter/limit_indistinguishable", [&] {
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double delta = k == initial.index() ? 1.0 : 0.0;
            r = std::max(r, std::abs(meter_return_probability(initial, pointer, gram_ones(n), k) - delta));
        }
        return r;
    });
    list.run("meter/normalization", [&] {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) total += meter_return_probability(initial, pointer, gram, k);
        return std::abs(total - 1.0);
    });
    list.run("meter/two_forms", [&] {
        const CompositeState xi = entangle(initial, pointer, meter_states_from_gram(gram));
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            r = std::max(r, std::abs(meter_return_probability(initial, pointer, gram, k) -
                                     composite_probability(xi, pointer, Modality(initial.context(), k))));
        }
        return r;
    });
    list.run("meter/reduced_state_routes", [&] {
        const CompositeState xi = entangle(initial, pointer, meter_states_from_gram(gram));
        return max_abs_diff(reduced_system_state(xi).matrix(), reduced_system_state(initial, pointer, gram).matrix());
    });
}

void protocol_checks(CheckList &list, const Protocol &protocol) {
    list.add("protocol/marginal_normalization", std::abs(protocol.final_marginal().weights().sum() - 1.0));
    std::vector<PathProbability> paths;
    try {
        paths = enumerate_paths(protocol);
    } catch (const Error &) {
        return;
    }
    list.run("protocol/telescoping", [&] {
        double r = 0.0;
        for (const PathProbability &path : paths) {
            if (path.probability <= kNegligibleProbability) continue;
            r = std::max(r, std::abs(entropy_production(protocol, path.outcomes, protocol.final_marginal()) -
                                     telescoped_entropy_production(protocol, path.outcomes,
                                                                   protocol.final_marginal())));
        }
        return r;
    });
    list.run("protocol/shannon_identity", [&] {
        const ExactEnsembleStats exact = exact_entropy_production(protocol);
        return std::abs(exact.mean_entropy_production - shannon_entropy(protocol.final_marginal()));
    });
}

}  // namespace

bool VerifyResult::passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.passed; });
}

Json VerifyResult::to_json() const {
    Json doc;
    doc["tool"] = "csm-sim";
    doc["version"] = CSM_SIM_VERSION;
    doc["tolerance"] = tolerance;
    doc["passed"] = passed();
    Json list = Json::array();
    double worst = 0.0;
    for (const Check &c : checks) {
        Json entry = {{"name", c.name}, {"residual", residual_to_json(c.residual)}, {"passed", c.passed}};
        if (!c.detail.empty()) entry["detail"] = c.detail;
        list.push_back(std::move(entry));
        if (std::isfinite(c.residual)) worst = std::max(worst, c.residual);
    }
    doc["max_residual"] = worst;
    doc["checks"] = std::move(list);
    const auto failure = std::find_if(checks.begin(), checks.end(), [](const Check &c) { return !c.passed; });
    if (failure != checks.end()) {
        doc["first_failure"] = {{"name", failure->name}, {"residual", residual_to_json(failure->residual)}};
        if (!failure->detail.empty()) doc["first_failure"]["detail"] = failure->detail;
    }
    return doc;
}

VerifyResult verify_scenario(const Scenario &scenario, double tolerance) {
    validate_scenario(scenario);
    CheckList list(tolerance);

    // Explicit bases are checked before anything is built.
    bool buildable = true;
    for (const auto &[name, spec] : scenario.contexts) {
        if (const auto *e = std::get_if<spec::Explicit>(&spec)) {
            const double residual = orthonormality_residual(e->matrix);
            if (!(residual <= kInputTolerance)) {
                list.add("context/" + name + "/orthonormality", residual, "explicit basis is not orthonormal");
                buildable = false;
            }
        }
    }

    if (buildable) {
        try {
            const ScenarioObjects objects = build_scenario(scenario);
            for (const auto &[name, context] : objects.contexts) context_checks(list, context);
            for (const auto &[a_name, a] : objects.contexts) {
                for (const auto &[b_name, b] : objects.contexts) {
                    if (a_name != b_name) pair_checks(list, a, b);
                }
            }
            double composition = 0.0;
            for (const auto &[a_name, a] : objects.contexts) {
                for (const auto &[b_name, b] : objects.contexts) {
                    for (const auto &[c_name, c] : objects.contexts) {
                        composition = std::max(
                            composition, max_abs_diff(compose(context_change_unitary(a, b), context_change_unitary(b, c)).matrix,
                                                      context_change_unitary(a, c).matrix));
                    }
                }
            }
            list.add("contexts/group_composition", composition);
            if (objects.pointer) meter_checks(list, objects.protocol.initial(), *objects.pointer, *objects.gram);
            protocol_checks(list, objects.protocol);
        } catch (const Error &e) {
            list.add("build", std::numeric_limits<double>::infinity(), e.what());
        }
    }

    VerifyResult result;
    result.tolerance = tolerance;
    result.checks = list.take();
    return result;
}

}  // namespace csm
