#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csm/hilbert.hpp"
#include "csm/qnd.hpp"
#include "csm/trajectory.hpp"

namespace csm {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace gram_spec {
struct Uniform {
    double g = 0.0;
};
struct Explicit {
    Matrix matrix;
};
}  // namespace gram_spec

using GramSpec = std::variant<gram_spec::Uniform, gram_spec::Explicit>;

struct InitialSpec {
    std::string context;
    std::size_t index = 0;
};

struct MeterSpec {
    std::string pointer;
    GramSpec gram;
};

struct SweepSpec {
    std::vector<double> g;
    std::vector<std::size_t> m_count;
    std::vector<double> phi;
};

/// A declarative experiment, as read from a scenario file. Context specs are
/// kept unbuilt so that `verify` can report on bases that fail validation.
struct Scenario {
    std::string source = "<memory>";
    std::size_t dim = 2;
    std::map<std::string, ContextSpec> contexts;
    InitialSpec initial;
    /// Full measurement sequence; the first entry is the initial context.
    std::vector<std::string> sequence;
    std::optional<MeterSpec> meter;
    std::optional<SweepSpec> sweep;
};

/// Objects instantiated from a Scenario.
struct ScenarioObjects {
    std::map<std::string, Context> contexts;
    Protocol protocol;
    /// Context the return and interference probabilities go through: the
    /// meter pointer when a meter is configured, else the second context of
    /// the sequence, else the initial context.
    Context intermediate;
    std::optional<Context> pointer;
    std::optional<GramMatrix> gram;
};

Scenario parse_scenario(const std::filesystem::path &path);
Scenario parse_scenario_text(std::string_view text, std::string source = "<memory>");

/// Structural validation of an in-memory scenario (names resolve, dims agree).
void validate_scenario(const Scenario &scenario);

/// Builds every context, the protocol and the meter. Domain errors are
/// rethrown with the scenario source prefixed.
ScenarioObjects build_scenario(const Scenario &scenario);

GramMatrix build_gram(const GramSpec &spec, std::size_t dim);

/// Canonical JSON form of a scenario (the report echo).
Json scenario_to_json(const Scenario &scenario);

// ---------------------------------------------------------------------------
// Running

struct RunOptions {
    std::uint64_t seed = 0;
    std::size_t n_samples = 10000;
    bool exhaustive = false;
    std::size_t workers = 1;
};

enum class SweepParam { G, MCount, Phi };

std::optional<SweepParam> parse_sweep_param(std::string_view name);
std::string_view sweep_param_name(SweepParam param);

/// One row per grid point, columns named by `header`.
struct SweepTable {
    SweepParam param = SweepParam::G;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

SweepTable sweep_table(const Scenario &scenario, const ScenarioObjects &objects, SweepParam param,
                       const std::vector<double> &values);

/// `steps` evenly spaced points from `from` to `to` inclusive.
std::vector<double> linspace(double from, double to, std::size_t steps);

/// Comma-separated table with a header row, numbers printed with %.17g.
std::string to_csv(const SweepTable &table);

/// Executes the scenario: exact return probabilities, meter analysis,
/// trajectory ensemble and configured sweeps. Deterministic in
/// (scenario, options.seed, options.n_samples, options.exhaustive).
Json run_scenario(const Scenario &scenario, const RunOptions &options);

/// Every sweep configured in the scenario, as tables.
std::vector<SweepTable> scenario_sweeps(const Scenario &scenario, const ScenarioObjects &objects);

// ---------------------------------------------------------------------------
// Verification

struct Check {
    std::string name;
    double residual = 0.0;
    bool passed = false;
    std::string detail;
};

struct VerifyResult {
    double tolerance = 0.0;
    std::vector<Check> checks;
    bool passed() const;
    Json to_json() const;
};

/// Runs the invariant suites of every module on the scenario's objects. A
/// check passes when its residual is at most `tolerance`.
VerifyResult verify_scenario(const Scenario &scenario, double tolerance);

/// Report serialization used by the CLI (two-space indent, trailing newline).
std::string dump_report(const Json &report);

}  // namespace csm
