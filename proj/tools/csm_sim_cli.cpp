// csm-sim: scenario-driven front end.
//
//   csm-sim run <file> --seed S --trajectories N --out <path>
//   csm-sim verify <file> --tolerance T
//   csm-sim sweep <file> --param g --from A --to B --steps K
//
// Exit codes: 0 success, 1 verification failure, 2 usage, parse or domain error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "csm/error.hpp"
#include "csm/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

std::size_t default_workers() {
    if (const char *env = std::getenv("CSM_SIM_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value >= 1) return static_cast<std::size_t>(value);
        } catch (const std::exception &) {
        }
        std::cerr << "csm-sim: ignoring invalid CSM_SIM_THREADS='" << env << "'\n";
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void write_output(const std::string &path, const std::string &content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw csm::Error(csm::ErrorCode::FileNotFound, "cannot write '" + path + "'");
    out << content;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Contexts-systems-modalities measurement simulator"};
    app.set_version_flag("--version", std::string("csm-sim ") + CSM_SIM_VERSION);
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_path;

    auto *run = app.add_subcommand("run", "Run a scenario and write a JSON report");
    std::uint64_t seed = 0;
    std::size_t trajectories = 10000;
    bool exhaustive = false;
    std::string tables_dir;
    std::size_t threads = 0;
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--seed", seed, "Ensemble seed");
    run->add_option("--trajectories", trajectories, "Number of sampled trajectories (0 disables sampling)");
    run->add_flag("--exhaustive", exhaustive, "Also compute exact results by path enumeration");
    run->add_option("--out", out_path, "Report path (default stdout)");
    run->add_option("--tables", tables_dir, "Directory for sweep CSV tables");
    run->add_option("--threads", threads, "Worker threads (default: CSM_SIM_THREADS or hardware)");

    auto *verify = app.add_subcommand("verify", "Check every invariant on the scenario's objects");
    double tolerance = 1e-10;
    verify->add_option("scenario", scenario_path, "Scenario file")->required();
    verify->add_option("--tolerance", tolerance, "Largest accepted residual")->check(CLI::PositiveNumber);
    verify->add_option("--out", out_path, "Report path (default stdout)");

    auto *sweep = app.add_subcommand("sweep", "Tabulate one parameter over a grid as CSV");
    std::string param_name;
    double from = 0.0, to = 1.0;
    std::size_t steps = 11;
    sweep->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep->add_option("--param", param_name, "g, m_count or phi")->required()->check(CLI::IsMember({"g", "m_count", "phi"}));
    sweep->add_option("--from", from, "First grid value")->required();
    sweep->add_option("--to", to, "Last grid value")->required();
    sweep->add_option("--steps", steps, "Number of grid points, endpoints included")->required()->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_path, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const csm::Scenario scenario = csm::parse_scenario(scenario_path);

        if (*run) {
            csm::RunOptions options;
            options.seed = seed;
            options.n_samples = trajectories;
            options.exhaustive = exhaustive;
            options.workers = threads > 0 ? threads : default_workers();
            write_output(out_path, csm::dump_report(csm::run_scenario(scenario, options)));
            if (!tables_dir.empty()) {
                std::filesystem::create_directories(tables_dir);
                const csm::ScenarioObjects objects = csm::build_scenario(scenario);
                for (const csm::SweepTable &table : csm::scenario_sweeps(scenario, objects)) {
                    const auto file = std::filesystem::path(tables_dir) /
                                      ("sweep_" + std::string(csm::sweep_param_name(table.param)) + ".csv");
                    write_output(file.string(), csm::to_csv(table));
                }
            }
            return kExitOk;
        }

        if (*verify) {
            const csm::VerifyResult result = csm::verify_scenario(scenario, tolerance);
            write_output(out_path, csm::dump_report(result.to_json()));
            if (!result.passed()) {
                for (const csm::Check &c : result.checks) {
                    if (c.passed) continue;
                    std::cerr << "csm-sim: verification failed: " << c.name << " residual " << c.residual;
                    if (!c.detail.empty()) std::cerr << " (" << c.detail << ")";
                    std::cerr << "\n";
                    break;
                }
                return kExitVerifyFailed;
            }
            return kExitOk;
        }

        const auto param = csm::parse_sweep_param(param_name);
        const csm::ScenarioObjects objects = csm::build_scenario(scenario);
        const csm::SweepTable table = csm::sweep_table(scenario, objects, *param, csm::linspace(from, to, steps));
        write_output(out_path, csm::to_csv(table));
        return kExitOk;
    } catch (const csm::Error &e) {
        std::cerr << "csm-sim: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "csm-sim: " << e.what() << "\n";
        return kExitUsage;
    }
}
