#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "adiabatic/config.hpp"
#include "adiabatic/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

namespace ex = adiabatic::experiment;
namespace cfg = adiabatic::config;

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic transition laboratory: simulations, sweeps and complex-time analyses"};
    app.set_version_flag("--version", std::string(ex::kToolName) + " " + ex::kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, output_path;
    int jobs = 1;
    double tolerance = 0.0;
    app.add_option("--config", config_path, "Experiment file (TOML)");
    app.add_option("--output", output_path, "CSV output path (standard output when omitted)");
    app.add_option("--jobs", jobs, "Concurrent epsilon points (0 = hardware threads)")->check(CLI::NonNegativeNumber);
    app.add_option("--tolerance", tolerance, "Integrator local error tolerance (overrides the config)");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "Single transition per epsilon with coefficient diagnostics"},
        {"sweep", "Transition probabilities over the epsilon grid with an exponential fit"},
        {"crossing", "Locate complex crossing points of a level pair"},
        {"loop-integral", "Eigenvalue integral around the loop enclosing a crossing"},
        {"prefactor", "Geometric prefactor theta from eigenvector continuation"},
        {"dissipativity", "Check a path for the dissipativity condition"},
        {"superadiabatic", "Superadiabatic transitions, optimal truncation, intertwining"},
        {"fit", "Fit ln P = ln C - 2 gamma / eps to a CSV"},
        {"compare", "Numerical transitions next to the asymptotic formula"},
        {"defaults", "Print the default configuration"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    if (command == "defaults") {
        const std::string text = cfg::defaults_text();
        if (output_path.empty()) {
            std::cout << text;
        } else if (!write_file(output_path, text)) {
            std::cerr << "error: cannot write " << output_path << "\n";
            return kExitConfig;
        }
        return 0;
    }

    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "config error: cannot open " << config_path << "\n";
            return kExitConfig;
        }
        std::ostringstream s;
        s << in.rdbuf();
        text = s.str();
    }
    cfg::Validation v = cfg::validate(text);
    if (app.count("--tolerance")) {
        if (!(tolerance >= 1e-12 && tolerance < 1.0))
            v.errors.push_back("--tolerance: must lie in [1e-12, 1)");
        else
            v.config.integrator_tolerance = tolerance;
    }
    if (!output_path.empty()) v.config.output = output_path;
    const auto op = cfg::operation_from_string(command);
    if (v.config.operation && v.config.operation != op)
        v.errors.push_back("run.operation: config is for '" + cfg::to_string(*v.config.operation) +
                           "' but the subcommand is '" + command + "'");
    if (!v.ok()) {
        for (const auto& e : v.errors) std::cerr << "config error: " << e << "\n";
        return kExitConfig;
    }

    ex::RunOptions options;
    options.jobs = jobs == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : jobs;
    ex::Table table;
    try {
        table = ex::run(v.config, *op, options);
    } catch (const ex::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    const std::string csv = ex::to_csv(table);
    if (v.config.output.empty()) {
        std::cout << csv;
        return 0;
    }
    if (!write_file(v.config.output, csv) ||
        !write_file(v.config.output + ".manifest.json", ex::manifest_json(v.config, *op, table, csv))) {
        std::cerr << "error: cannot write " << v.config.output << "\n";
        return kExitConfig;
    }
    return 0;
}
