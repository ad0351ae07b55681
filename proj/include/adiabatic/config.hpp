#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adiabatic/types.hpp"

namespace adiabatic::config {

/// A TOML scalar or flat array. Integers are kept apart from floats so that
/// integer-valued keys can reject 1.5.
struct Value {
    using Scalar = std::variant<bool, std::int64_t, double, std::string>;
    std::variant<bool, std::int64_t, double, std::string, std::vector<Scalar>> data;
    int line = 0;
};

/// Parsed document: "table.key" -> value. Keys before any header live in table "".
struct Document {
    std::map<std::string, Value> entries;
    std::vector<std::string> tables;
};

/// Parses the TOML subset used by experiment files: comments, [table] headers,
/// key = value with strings, integers, floats, booleans and (possibly multi-line)
/// flat arrays. Syntax errors are appended to `errors` with their line number and
/// parsing continues with the next line.
Document parse_toml(const std::string& text, std::vector<std::string>& errors);

enum class Operation {
    Simulate,
    Sweep,
    Crossing,
    LoopIntegral,
    Prefactor,
    Dissipativity,
    Superadiabatic,
    Fit,
    Compare,
};

std::string to_string(Operation op);
std::optional<Operation> operation_from_string(const std::string& name);
std::vector<std::string> operation_names();

struct ExperimentConfig {
    std::optional<Operation> operation;

    std::string model = "landau_zener";
    /// Model parameters as given in [model]; catalog defaults fill the rest.
    std::map<std::string, double> params;

    std::vector<double> epsilons{0.1, 0.08, 0.06, 0.05, 0.04};
    int from_label = 1;
    /// 0 selects the highest label of the model.
    int to_label = 0;
    /// Finite window [t0, t1]; scattering limits when absent.
    std::optional<std::pair<double, double>> window;
    /// Grid points of the coefficient trace reported by `simulate`.
    int samples = 201;

    std::pair<int, int> pair{1, 2};
    double reach = 4.0;
    std::optional<cplx> seed;

    int loop_label = 1;
    double loop_half_width = 1.0;
    double loop_margin = 0.25;

    /// "level_line" or "straight".
    std::string path = "level_line";
    double path_height = 0.6;
    double path_reach = 6.0;

    /// "transition", "truncation", "intertwining" or "effective".
    std::string sa_mode = "transition";
    std::vector<int> orders{0, 1, 2};
    int q_max = 12;
    /// "defect" or "transition".
    std::string criterion = "defect";
    double spacing = 0.005;

    double integrator_tolerance = 1e-10;
    double truncation_tolerance = 1e-10;
    double quadrature_tolerance = 1e-8;
    long max_steps = 100'000'000;

    std::string fit_input;
    std::string fit_column;
    double noise_floor = 0.0;

    std::string output;
};

/// Result of validate: a config when `errors` is empty.
struct Validation {
    ExperimentConfig config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

/// Full parse and check of a config text with defaults applied. Every problem is
/// collected (unknown tables and keys, type and range errors, unknown model or
/// model parameter, empty or non-monotone epsilon grid).
Validation validate(const std::string& text);

/// Canonical TOML rendering of a config; parsing it back gives an equal config.
std::string to_toml(const ExperimentConfig& config);

/// The default config, as printed by the `defaults` subcommand.
std::string defaults_text();

/// FNV-1a 64-bit hash of the canonical rendering, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Short "key=value ..." rendering of the model parameters with defaults filled in.
std::string describe_params(const ExperimentConfig& config);

}  // namespace adiabatic::config
