#include "csm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "csm/error.hpp"

namespace csm {

namespace {

[[noreturn]] void invalid(const std::string &field, const std::string &reason) {
    throw Error(ErrorCode::ValidationError, "field '" + field + "': " + reason);
}

void reject_unknown_keys(const Json &object, const std::string &field, std::initializer_list<std::string_view> allowed) {
    for (const auto &[key, value] : object.items()) {
        bool known = false;
        for (std::string_view a : allowed) known = known || key == a;
        if (!known) invalid(field.empty() ? key : field + "." + key, "unknown key");
    }
}

const Json &require(const Json &object, const std::string &field, const std::string &key) {
    const auto it = object.find(key);
    if (it == object.end()) invalid(field.empty() ? key : field + "." + key, "required field missing");
    return *it;
}

const Json &require_object(const Json &value, const std::string &field) {
    if (!value.is_object()) invalid(field, "expected an object");
    return value;
}

double require_number(const Json &value, const std::string &field) {
    if (!value.is_number()) invalid(field, "expected a number");
    const double x = value.get<double>();
    if (!std::isfinite(x)) invalid(field, "expected a finite number");
    return x;
}

std::uint64_t require_unsigned(const Json &value, const std::string &field) {
    if (!value.is_number_unsigned()) invalid(field, "expected a non-negative integer");
    return value.get<std::uint64_t>();
}

std::string require_string(const Json &value, const std::string &field) {
    if (!value.is_string()) invalid(field, "expected a string");
    return value.get<std::string>();
}

Complex parse_complex(const Json &value, const std::string &field) {
    if (value.is_number()) return {require_number(value, field), 0.0};
    if (value.is_array() && value.size() == 2) {
        return {require_number(value[0], field + "[0]"), require_number(value[1], field + "[1]")};
    }
    invalid(field, "expected a number or a [re, im] pair");
}

// Matrices are written row by row.
Matrix parse_matrix(const Json &value, const std::string &field, std::size_t dim) {
    if (!value.is_array() || value.size() != dim) invalid(field, "expected " + std::to_string(dim) + " rows");
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m(n, n);
    for (std::size_t r = 0; r < dim; ++r) {
        const std::string row_field = field + "[" + std::to_string(r) + "]";
        const Json &row = value[r];
        if (!row.is_array() || row.size() != dim) invalid(row_field, "expected " + std::to_string(dim) + " entries");
        for (std::size_t c = 0; c < dim; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_complex(row[c], row_field + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

ContextSpec parse_context_spec(const Json &value, const std::string &field, std::size_t dim) {
    require_object(value, field);
    const std::string kind = require_string(require(value, field, "kind"), field + ".kind");
    if (kind == "computational") {
        reject_unknown_keys(value, field, {"kind"});
        return spec::Computational{};
    }
    if (kind == "fourier") {
        reject_unknown_keys(value, field, {"kind"});
        return spec::Fourier{};
    }
    if (kind == "rotation") {
        reject_unknown_keys(value, field, {"kind", "theta"});
        if (dim != 2) invalid(field, "rotation contexts require dim 2, scenario has dim " + std::to_string(dim));
        return spec::Rotation{require_number(require(value, field, "theta"), field + ".theta")};
    }
    if (kind == "haar") {
        reject_unknown_keys(value, field, {"kind", "seed"});
        return spec::Haar{require_unsigned(require(value, field, "seed"), field + ".seed")};
    }
    if (kind == "explicit") {
        reject_unknown_keys(value, field, {"kind", "matrix"});
        return spec::Explicit{parse_matrix(require(value, field, "matrix"), field + ".matrix", dim)};
    }
    invalid(field + ".kind", "unknown context kind '" + kind + "'");
}

GramSpec parse_gram_spec(const Json &value, const std::string &field, std::size_t dim) {
    require_object(value, field);
    const std::string kind = require_string(require(value, field, "kind"), field + ".kind");
    if (kind == "uniform") {
        reject_unknown_keys(value, field, {"kind", "g"});
        const double g = require_number(require(value, field, "g"), field + ".g");
        if (g < 0.0 || g > 1.0) invalid(field + ".g", "must lie in [0, 1]");
        return gram_spec::Uniform{g};
    }
    if (kind == "explicit") {
        reject_unknown_keys(value, field, {"kind", "matrix"});
        return gram_spec::Explicit{parse_matrix(require(value, field, "matrix"), field + ".matrix", dim)};
    }
    invalid(field + ".kind", "unknown Gram kind '" + kind + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const Json &value, const std::string &field, Parse parse) {
    if (!value.is_array()) invalid(field, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back(parse(value[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

Json complex_to_json(Complex z) {
    if (z.imag() == 0.0) return z.real();
    return Json::array({z.real(), z.imag()});
}

Json matrix_rows_to_json(const Matrix &m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string annotate(const Scenario &scenario, const std::string &message) {
    return "scenario '" + scenario.source + "': " + message;
}

}  // namespace

Scenario parse_scenario_text(std::string_view text, std::string source) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error &e) {
        const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::ostringstream msg;
        msg << source << ": line " << line << ", column " << column << ": " << e.what();
        throw Error(ErrorCode::ParseError, msg.str());
    }
    if (!doc.is_object()) invalid("<root>", "expected an object");
    reject_unknown_keys(doc, "", {"schema_version", "dim", "contexts", "protocol", "meter", "sweep"});

    const Json &version = require(doc, "", "schema_version");
    if (!version.is_number_integer() || version.get<std::int64_t>() != kSchemaVersion) {
        invalid("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    }

    Scenario s;
    s.source = std::move(source);
    const std::uint64_t dim = require_unsigned(require(doc, "", "dim"), "dim");
    if (dim < 2 || dim > 64) invalid("dim", "must be between 2 and 64");
    s.dim = static_cast<std::size_t>(dim);

    const Json &contexts = require_object(require(doc, "", "contexts"), "contexts");
    if (contexts.empty()) invalid("contexts", "at least one context is required");
    for (const auto &[name, value] : contexts.items()) {
        s.contexts.emplace(name, parse_context_spec(value, "contexts." + name, s.dim));
    }

    const Json &protocol = require_object(require(doc, "", "protocol"), "protocol");
    reject_unknown_keys(protocol, "protocol", {"initial", "sequence"});
    const Json &initial = require_object(require(protocol, "protocol", "initial"), "protocol.initial");
    reject_unknown_keys(initial, "protocol.initial", {"context", "index"});
    s.initial.context = require_string(require(initial, "protocol.initial", "context"), "protocol.initial.context");
    s.initial.index = static_cast<std::size_t>(
        require_unsigned(require(initial, "protocol.initial", "index"), "protocol.initial.index"));
    s.sequence = parse_list<std::string>(require(protocol, "protocol", "sequence"), "protocol.sequence",
                                         [](const Json &v, const std::string &f) { return require_string(v, f); });

    if (const auto it = doc.find("meter"); it != doc.end()) {
        const Json &meter = require_object(*it, "meter");
        reject_unknown_keys(meter, "meter", {"pointer", "gram"});
        MeterSpec m;
        m.pointer = require_string(require(meter, "meter", "pointer"), "meter.pointer");
        m.gram = parse_gram_spec(require(meter, "meter", "gram"), "meter.gram", s.dim);
        s.meter = std::move(m);
    }

    if (const auto it = doc.find("sweep"); it != doc.end()) {
        const Json &sweep = require_object(*it, "sweep");
        reject_unknown_keys(sweep, "sweep", {"g", "m_count", "phi"});
        SweepSpec sw;
        if (sweep.contains("g")) {
            sw.g = parse_list<double>(sweep["g"], "sweep.g", [](const Json &v, const std::string &f) {
                const double g = require_number(v, f);
                if (g < 0.0 || g > 1.0) invalid(f, "must lie in [0, 1]");
                return g;
            });
        }
        if (sweep.contains("m_count")) {
            sw.m_count = parse_list<std::size_t>(sweep["m_count"], "sweep.m_count",
                                                 [](const Json &v, const std::string &f) {
                                                     return static_cast<std::size_t>(require_unsigned(v, f));
                                                 });
        }
        if (sweep.contains("phi")) {
            sw.phi = parse_list<double>(sweep["phi"], "sweep.phi",
                                        [](const Json &v, const std::string &f) { return require_number(v, f); });
        }
        s.sweep = std::move(sw);
    }

    validate_scenario(s);
    return s;
}

Scenario parse_scenario(const std::filesystem::path &path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, "scenario file '" + path.string() + "' not found");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open scenario file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path.string());
}

void validate_scenario(const Scenario &s) {
    if (s.dim < 2) invalid("dim", "must be at least 2");
    if (s.contexts.empty()) invalid("contexts", "at least one context is required");
    for (const auto &[name, spec] : s.contexts) {
        if (std::holds_alternative<spec::Rotation>(spec) && s.dim != 2) {
            invalid("contexts." + name, "rotation contexts require dim 2, scenario has dim " + std::to_string(s.dim));
        }
        if (const auto *e = std::get_if<spec::Explicit>(&spec)) {
            if (static_cast<std::size_t>(e->matrix.rows()) != s.dim ||
                static_cast<std::size_t>(e->matrix.cols()) != s.dim) {
                invalid("contexts." + name + ".matrix", "must be " + std::to_string(s.dim) + "x" +
                                                          std::to_string(s.dim));
            }
        }
    }
    auto resolve = [&](const std::string &name, const std::string &field) {
        if (!s.contexts.contains(name)) invalid(field, "undefined context '" + name + "'");
    };
    resolve(s.initial.context, "protocol.initial.context");
    if (s.initial.index >= s.dim) invalid("protocol.initial.index", "must be less than dim");
    if (s.sequence.empty()) invalid("protocol.sequence", "must not be empty");
    for (std::size_t k = 0; k < s.sequence.size(); ++k) {
        resolve(s.sequence[k], "protocol.sequence[" + std::to_string(k) + "]");
    }
    if (s.sequence.front() != s.initial.context) {
        invalid("protocol.sequence[0]", "must be the initial context '" + s.initial.context + "'");
    }
    if (s.meter) {
        resolve(s.meter->pointer, "meter.pointer");
        try {
            (void)build_gram(s.meter->gram, s.dim);
        } catch (const Error &e) {
            invalid("meter.gram", e.what());
        }
    }
    if (s.sweep && !s.meter && (!s.sweep->g.empty() || !s.sweep->m_count.empty())) {
        invalid("sweep", "g and m_count sweeps need a meter");
    }
}

GramMatrix build_gram(const GramSpec &spec, std::size_t dim) {
    if (const auto *u = std::get_if<gram_spec::Uniform>(&spec)) return gram_uniform(dim, u->g);
    const auto &e = std::get<gram_spec::Explicit>(spec);
    if (static_cast<std::size_t>(e.matrix.rows()) != dim) {
        throw Error(ErrorCode::DimensionMismatch, "Gram matrix must be " + std::to_string(dim) + "x" +
                                                      std::to_string(dim));
    }
    return GramMatrix(e.matrix);
}

ScenarioObjects build_scenario(const Scenario &s) {
    validate_scenario(s);
    try {
        std::map<std::string, Context> contexts;
        for (const auto &[name, spec] : s.contexts) contexts.emplace(name, build_context(name, spec, s.dim));

        std::vector<Context> sequence;
        for (const std::string &name : s.sequence) sequence.push_back(contexts.at(name));
        Protocol protocol(std::move(sequence), s.initial.index);

        std::optional<Context> pointer;
        std::optional<GramMatrix> gram;
        if (s.meter) {
            pointer = contexts.at(s.meter->pointer);
            gram = build_gram(s.meter->gram, s.dim);
        }
        const std::string &intermediate_name =
            s.meter ? s.meter->pointer : (s.sequence.size() >= 2 ? s.sequence[1] : s.sequence[0]);
        Context intermediate = contexts.at(intermediate_name);
        return ScenarioObjects{std::move(contexts), std::move(protocol), std::move(intermediate), std::move(pointer),
                               std::move(gram)};
    } catch (const Error &e) {
        throw Error(e.code(), annotate(s, e.what()));
    }
}

Json scenario_to_json(const Scenario &s) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["dim"] = s.dim;
    Json contexts = Json::object();
    for (const auto &[name, spec] : s.contexts) {
        Json c;
        std::visit(
            [&](const auto &v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, spec::Computational>) {
                    c["kind"] = "computational";
                } else if constexpr (std::is_same_v<T, spec::Fourier>) {
                    c["kind"] = "fourier";
                } else if constexpr (std::is_same_v<T, spec::Rotation>) {
                    c["kind"] = "rotation";
                    c["theta"] = v.theta;
                } else if constexpr (std::is_same_v<T, spec::Haar>) {
                    c["kind"] = "haar";
                    c["seed"] = v.seed;
                } else {
                    c["kind"] = "explicit";
                    c["matrix"] = matrix_rows_to_json(v.matrix);
                }
            },
            spec);
        contexts[name] = std::move(c);
    }
    doc["contexts"] = std::move(contexts);
    doc["protocol"] = {{"initial", {{"context", s.initial.context}, {"index", s.initial.index}}},
                       {"sequence", s.sequence}};
    if (s.meter) {
        Json gram;
        if (const auto *u = std::get_if<gram_spec::Uniform>(&s.meter->gram)) {
            gram = {{"kind", "uniform"}, {"g", u->g}};
        } else {
            gram = {{"kind", "explicit"},
                    {"matrix", matrix_rows_to_json(std::get<gram_spec::Explicit>(s.meter->gram).matrix)}};
        }
        doc["meter"] = {{"pointer", s.meter->pointer}, {"gram", std::move(gram)}};
    }
    if (s.sweep) {
        Json sweep = Json::object();
        if (!s.sweep->g.empty()) sweep["g"] = s.sweep->g;
        if (!s.sweep->m_count.empty()) sweep["m_count"] = s.sweep->m_count;
        if (!s.sweep->phi.empty()) sweep["phi"] = s.sweep->phi;
        doc["sweep"] = std::move(sweep);
    }
    return doc;
}

std::string dump_report(const Json &report) { return report.dump(2) + "\n"; }

}  // namespace csm
