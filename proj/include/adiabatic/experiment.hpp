#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "adiabatic/config.hpp"
#include "adiabatic/types.hpp"

namespace adiabatic::experiment {

inline constexpr const char* kToolName = "adiabatic-lab";
inline constexpr const char* kToolVersion = "0.1.0";

/// Invalid experiment input discovered while running (missing fit input, a CSV
/// without the needed columns). Maps to the config-error exit code.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Tabular result of one run. Cells are already formatted.
struct Table {
    /// "key: value" metadata written as '#' lines above the column header.
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    /// Summary lines written as '#' lines after the rows (fit results, slopes).
    std::vector<std::string> summary;
};

struct RunOptions {
    /// Upper bound on concurrently evaluated epsilon points.
    int jobs = 1;
};

/// Executes `op` for a validated config. Rows of epsilon-indexed outputs are in
/// increasing epsilon regardless of `jobs`. Throws ConfigError for bad input files
/// and adiabatic::Error for numerical failures.
Table run(const config::ExperimentConfig& config, config::Operation op, const RunOptions& options = {});

/// CSV text with the metadata header, column line, rows and summary.
std::string to_csv(const Table& table);

/// A CSV read back: metadata from "# key: value" lines before the column header.
struct CsvData {
    std::map<std::string, std::string> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name`, or -1.
    int column(const std::string& name) const;
};

CsvData parse_csv(const std::string& text);

/// Run manifest (JSON): tool version, operation, config hash, canonical config,
/// and a hash of the CSV bytes.
std::string manifest_json(const config::ExperimentConfig& config, config::Operation op, const Table& table,
                          const std::string& csv_text);

/// Shortest round-trip decimal form of x.
std::string format_number(double x);

/// Evaluates fn(i) for i in [0, count) on up to `jobs` threads; results keep index
/// order. The first exception in index order is rethrown after all workers finish.
template <class T>
std::vector<T> parallel_map(std::size_t count, int jobs, const std::function<T(std::size_t)>& fn);

}  // namespace adiabatic::experiment

#include <exception>
#include <atomic>
#include <optional>
#include <thread>

namespace adiabatic::experiment {

template <class T>
std::vector<T> parallel_map(std::size_t count, int jobs, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace adiabatic::experiment
