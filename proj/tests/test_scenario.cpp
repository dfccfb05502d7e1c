#include "csm/scenario.hpp"

#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace csm;
using namespace csm::testing;

namespace {

std::string data(const std::string &name) { return std::string(CSM_TEST_DATA) + "/" + name; }

const char *kMinimal = R"({
  "schema_version": 1,
  "dim": 2,
  "contexts": {"z": {"kind": "computational"}},
  "protocol": {"initial": {"context": "z", "index": 0}, "sequence": ["z", "z"]}
})";

/// Asserts a ValidationError whose message mentions `needle`.
void expect_invalid(const std::string &text, const std::string &needle) {
    try {
        parse_scenario_text(text);
        ADD_FAILURE() << "expected ValidationError mentioning " << needle;
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ValidationError) << e.what();
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

std::string replace(std::string text, const std::string &from, const std::string &to) {
    const auto at = text.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return text.replace(at, from.size(), to);
}

}  // namespace

TEST(Parse, minimal_file) {
    const Scenario s = parse_scenario_text(kMinimal);
    EXPECT_EQ(s.dim, 2U);
    EXPECT_EQ(s.contexts.size(), 1U);
    EXPECT_EQ(s.sequence.size(), 2U);
    EXPECT_FALSE(s.meter.has_value());
    const ScenarioObjects objects = build_scenario(s);
    EXPECT_EQ(objects.protocol.steps(), 1U);
}

TEST(Parse, fixture_files) {
    const Scenario meter = parse_scenario(data("meter_sweep.json"));
    ASSERT_TRUE(meter.meter.has_value());
    EXPECT_EQ(meter.meter->pointer, "x");
    ASSERT_TRUE(meter.sweep.has_value());
    EXPECT_EQ(meter.sweep->m_count.size(), 5U);

    const Scenario three = parse_scenario(data("three_level.json"));
    const ScenarioObjects objects = build_scenario(three);
    EXPECT_EQ((*objects.gram)(0, 1), Complex(0.3, 0.2));
    EXPECT_EQ((*objects.gram)(1, 0), Complex(0.3, -0.2));
    EXPECT_EQ(objects.intermediate.id(), "h");
}

TEST(Parse, undefined_name) {
    try {
        parse_scenario(data("unknown_context.json"));
        ADD_FAILURE() << "no error";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ValidationError);
        EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("protocol.sequence[1]"), std::string::npos);
    }
}

TEST(Parse, rotation_needs_dim_two) {
    std::string text = replace(kMinimal, R"("dim": 2)", R"("dim": 3)");
    text = replace(text, R"({"kind": "computational"})", R"({"kind": "rotation", "theta": 0.5})");
    expect_invalid(text, "rotation");
}

TEST(Parse, rejects_unknown_keys) {
    expect_invalid(replace(kMinimal, R"("dim": 2,)", R"("dim": 2, "colour": 1,)"), "colour");
    expect_invalid(replace(kMinimal, R"({"kind": "computational"})", R"({"kind": "computational", "seed": 1})"),
                   "contexts.z.seed");
    expect_invalid(replace(kMinimal, R"("index": 0})", R"("index": 0, "extra": true})"), "protocol.initial.extra");
}

TEST(Parse, field_errors) {
    expect_invalid(replace(kMinimal, R"("schema_version": 1)", R"("schema_version": 2)"), "schema_version");
    expect_invalid(replace(kMinimal, R"("dim": 2)", R"("dim": 1)"), "dim");
    expect_invalid(replace(kMinimal, R"("dim": 2)", R"("dim": "two")"), "dim");
    expect_invalid(replace(kMinimal, R"("index": 0)", R"("index": 2)"), "protocol.initial.index");
    expect_invalid(replace(kMinimal, R"("sequence": ["z", "z"])", R"("sequence": [])"), "protocol.sequence");
    expect_invalid(replace(kMinimal, R"("computational")", R"("spherical")"), "contexts.z.kind");
    const std::string with_meter = replace(kMinimal, R"(]})", R"(]}, "meter": {"pointer": "z", "gram": {"kind": "uniform", "g": 1.5}})");
    expect_invalid(with_meter, "meter.gram.g");
    const std::string bad_gram =
        replace(kMinimal, R"(]})", R"(]}, "meter": {"pointer": "z", "gram": {"kind": "explicit", "matrix": [[1, 2], [2, 1]]}})");
    expect_invalid(bad_gram, "meter.gram");
    const std::string sweep_without_meter = replace(kMinimal, R"(]})", R"(]}, "sweep": {"g": [0.5]})");
    expect_invalid(sweep_without_meter, "sweep");
}

TEST(Parse, syntax_error_has_position) {
    try {
        parse_scenario(data("malformed.json"));
        ADD_FAILURE() << "no error";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
    }
}

TEST(Parse, missing_file) {
    expect_error(ErrorCode::FileNotFound, [] { parse_scenario(data("does_not_exist.json")); });
}

TEST(Parse, echo_round_trips) {
    const Scenario s = parse_scenario(data("three_level.json"));
    const std::string echo = dump_report(scenario_to_json(s));
    const Scenario again = parse_scenario_text(echo);
    EXPECT_EQ(dump_report(scenario_to_json(again)), echo);
}

TEST(Build, annotates_domain_errors) {
    const Scenario s = parse_scenario(data("bad_explicit.json"));
    try {
        build_scenario(s);
        ADD_FAILURE() << "no error";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::NonOrthonormalInput);
        EXPECT_NE(std::string(e.what()).find("bad_explicit.json"), std::string::npos) << e.what();
    }
}

TEST(Run, balanced_ensemble) {
    RunOptions options;
    options.seed = 7;
    options.n_samples = 100000;
    const Json report = run_scenario(parse_scenario(data("balanced.json")), options);
    const Json &ensemble = report.at("ensemble");
    EXPECT_EQ(ensemble.at("sample_count").get<std::size_t>(), 100000U);
    const double mean = ensemble.at("mean_entropy_production").get<double>();
    const double se = ensemble.at("std_error").get<double>();
    EXPECT_LE(std::abs(mean - std::log(2.0)), 3.0 * se);
    EXPECT_NEAR(ensemble.at("shannon_entropy_final").get<double>(), std::log(2.0), 1e-15);
    EXPECT_EQ(report.at("seed").get<std::uint64_t>(), 7U);
    EXPECT_FALSE(report.at("version").get<std::string>().empty());
    EXPECT_NEAR(report.at("returns").at("irreversible")[0].get<double>(), 0.5, 1e-15);
    EXPECT_NEAR(report.at("returns").at("reversible")[0].get<double>(), 1.0, 1e-15);
}

TEST(Run, meter_sweep_returns) {
    RunOptions options;
    options.n_samples = 0;
    const Json report = run_scenario(parse_scenario(data("meter_sweep.json")), options);
    EXPECT_FALSE(report.contains("ensemble"));
    const Json &g = report.at("sweep").at("g");
    const std::vector<double> expected{0.5, 0.75, 1.0};
    ASSERT_EQ(g.size(), expected.size());
    for (std::size_t r = 0; r < expected.size(); ++r) {
        EXPECT_NEAR(g[r].at("return_0").get<double>(), expected[r], 1e-12);
    }
    EXPECT_NEAR(report.at("meter").at("return_probability")[0].get<double>(), 0.75, 1e-12);
    EXPECT_NEAR(report.at("meter").at("max_coherence").get<double>(), 0.25, 1e-12);
    const Json &m = report.at("sweep").at("m_count");
    EXPECT_EQ(m.size(), 5U);
    EXPECT_NEAR(m[4].at("coherence").get<double>(), 0.5 * std::pow(0.5, 8), 1e-15);
    const Json &phi = report.at("sweep").at("phi");
    EXPECT_NEAR(phi[1].at("return_0").get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(phi[2].at("return_0").get<double>(), 0.0, 1e-12);
}

TEST(Run, exhaustive_without_sampling) {
    RunOptions options;
    options.n_samples = 0;
    options.exhaustive = true;
    const Json report = run_scenario(parse_scenario(data("three_level.json")), options);
    EXPECT_FALSE(report.contains("ensemble"));
    const Json &exact = report.at("exact_ensemble");
    EXPECT_NEAR(exact.at("total_probability").get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(exact.at("mean_entropy_production").get<double>(),
                report.at("protocol").at("final_shannon_entropy").get<double>(), 1e-12);
}

TEST(Run, emitted_probabilities_are_valid) {
    RunOptions options;
    options.n_samples = 2000;
    options.exhaustive = true;
    const Json report = run_scenario(parse_scenario(data("three_level.json")), options);
    auto check_distribution = [](const Json &list) {
        double total = 0.0;
        for (const Json &p : list) {
            EXPECT_GE(p.get<double>(), 0.0);
            EXPECT_LE(p.get<double>(), 1.0);
            total += p.get<double>();
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
    };
    check_distribution(report.at("protocol").at("final_marginal"));
    check_distribution(report.at("returns").at("irreversible"));
    check_distribution(report.at("returns").at("reversible"));
    check_distribution(report.at("meter").at("return_probability"));
    check_distribution(report.at("ensemble").at("final_frequencies"));
    check_distribution(report.at("exact_ensemble").at("final_distribution"));
}

TEST(Run, deterministic_reports) {
    const Scenario s = parse_scenario(data("three_level.json"));
    RunOptions options;
    options.seed = 123;
    options.n_samples = 3000;
    const std::string first = dump_report(run_scenario(s, options));
    EXPECT_EQ(dump_report(run_scenario(s, options)), first);
    options.workers = 4;
    EXPECT_EQ(dump_report(run_scenario(s, options)), first);
    options.seed = 124;
    EXPECT_NE(dump_report(run_scenario(s, options)), first);
}

TEST(Verify, passes_on_valid_scenarios) {
    for (const char *name : {"balanced.json", "meter_sweep.json", "three_level.json"}) {
        const VerifyResult result = verify_scenario(parse_scenario(data(name)), 1e-10);
        EXPECT_TRUE(result.passed()) << name << ": " << dump_report(result.to_json());
        EXPECT_GT(result.checks.size(), 10U);
    }
}

TEST(Verify, reports_non_orthonormal_basis) {
    const VerifyResult result = verify_scenario(parse_scenario(data("bad_explicit.json")), 1e-10);
    EXPECT_FALSE(result.passed());
    const Json doc = result.to_json();
    EXPECT_EQ(doc.at("first_failure").at("name").get<std::string>(), "context/skew/orthonormality");
    // Gram matrix of the columns (1, 0) and (0.5, 1) is off by 0.5 and 0.25.
    EXPECT_NEAR(doc.at("first_failure").at("residual").get<double>(), 0.5, 1e-15);
}

TEST(Verify, machine_precision_floor) {
    const VerifyResult result = verify_scenario(parse_scenario(data("three_level.json")), 1e-16);
    EXPECT_FALSE(result.passed());
    double worst = 0.0;
    for (const Check &c : result.checks) worst = std::max(worst, c.residual);
    EXPECT_GT(worst, 1e-16);
    EXPECT_LT(worst, 1e-12);
}

TEST(Sweep, csv_format_and_grid) {
    const Scenario s = parse_scenario(data("meter_sweep.json"));
    const ScenarioObjects objects = build_scenario(s);
    const std::vector<double> grid = linspace(0.0, 1.0, 5);
    ASSERT_EQ(grid.size(), 5U);
    EXPECT_EQ(grid.front(), 0.0);
    EXPECT_EQ(grid.back(), 1.0);
    const std::string csv = to_csv(sweep_table(s, objects, SweepParam::G, grid));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "g,return_0,return_1,entropy,coherence");
    EXPECT_NE(csv.find("\n0.25,0.625"), std::string::npos) << csv;
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    EXPECT_EQ(lines, 6U);
    EXPECT_EQ(linspace(2.0, 2.0, 1), std::vector<double>{2.0});
}

TEST(Sweep, full_precision_numbers) {
    SweepTable table;
    table.header = {"g", "value"};
    table.rows = {{0.1, 1.0 / 3.0}};
    EXPECT_EQ(to_csv(table), "g,value\n0.10000000000000001,0.33333333333333331\n");
}

TEST(Sweep, rejects_bad_requests) {
    const Scenario plain = parse_scenario(data("balanced.json"));
    const ScenarioObjects plain_objects = build_scenario(plain);
    expect_error(ErrorCode::ValidationError, [&] { sweep_table(plain, plain_objects, SweepParam::G, {0.5}); });
    const Scenario s = parse_scenario(data("meter_sweep.json"));
    const ScenarioObjects objects = build_scenario(s);
    expect_error(ErrorCode::ValidationError, [&] { sweep_table(s, objects, SweepParam::MCount, {1.5}); });
    expect_error(ErrorCode::StrengthOutOfRange, [&] { sweep_table(s, objects, SweepParam::G, {1.5}); });
    EXPECT_EQ(parse_sweep_param("phi"), SweepParam::Phi);
    EXPECT_FALSE(parse_sweep_param("theta").has_value());
}
