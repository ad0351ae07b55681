#include "doctest.h"

#include <set>

#include "adiabatic/experiment.hpp"

using namespace adiabatic;
using namespace adiabatic::experiment;

namespace {

config::ExperimentConfig make(const std::string& text) {
    auto v = config::validate(text);
    REQUIRE(v.ok());
    return v.config;
}

}  // namespace

TEST_CASE("format_number: shortest round trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-10) == "1e-10");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("parallel_map keeps index order and rethrows the first failure") {
    const std::function<int(std::size_t)> sq = [](std::size_t i) { return static_cast<int>(i * i); };
    const auto r = parallel_map<int>(50, 4, sq);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == static_cast<int>(i * i));
    const std::function<int(std::size_t)> bad = [](std::size_t i) -> int {
        if (i == 3 || i == 7) throw NumericalError("point " + std::to_string(i));
        return 0;
    };
    try {
        parallel_map<int>(10, 3, bad);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()) == "point 3");
    }
}

TEST_CASE("sweep: rows ordered by epsilon, header metadata, provenance columns") {
    const auto cfg = make("[run]\nepsilons = [0.2, 0.15, 0.12, 0.1]\n");
    const auto t = run(cfg, config::Operation::Sweep, {.jobs = 2});
    REQUIRE(t.rows.size() == 4);
    for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(std::stod(t.rows[i][0]) > std::stod(t.rows[i - 1][0]));
    std::set<std::string> keys;
    for (const auto& [k, v] : t.metadata) keys.insert(k);
    for (const char* k : {"tool", "config_hash", "model", "tolerances"}) CHECK(keys.count(k) == 1);
    CHECK(t.columns.front() == "epsilon");
    CHECK(t.columns[t.columns.size() - 2] == "model");
    CHECK(t.columns.back() == "params");
    CHECK(t.rows.front().back() == "a=1.0 delta=0.5");
    CHECK_FALSE(t.summary.empty());
}

TEST_CASE("run is independent of the job count") {
    const auto cfg = make("[model]\nname = \"tanh_sweep\"\n[run]\nepsilons = [0.2, 0.1, 0.08, 0.06]\n");
    CHECK(to_csv(run(cfg, config::Operation::Sweep, {.jobs = 1})) ==
          to_csv(run(cfg, config::Operation::Sweep, {.jobs = 4})));
}

TEST_CASE("to_csv / parse_csv round trip") {
    const auto cfg = make("[run]\nepsilons = [0.1, 0.08, 0.06, 0.05]\n");
    const auto t = run(cfg, config::Operation::Sweep);
    const auto csv = parse_csv(to_csv(t));
    CHECK(csv.columns == t.columns);
    CHECK(csv.rows == t.rows);
    CHECK(csv.metadata.at("config_hash") == config::config_hash(cfg));
    CHECK(csv.column("P21") == 1);
    CHECK(csv.column("nope") == -1);
}

TEST_CASE("manifest records tool version and config hash") {
    const auto cfg = make("[run]\nepsilons = [0.1]\n");
    const auto t = run(cfg, config::Operation::Simulate);
    const std::string m = manifest_json(cfg, config::Operation::Simulate, t, to_csv(t));
    CHECK(m.find(kToolVersion) != std::string::npos);
    CHECK(m.find(config::config_hash(cfg)) != std::string::npos);
}

TEST_CASE("crossing, loop-integral and prefactor operations") {
    const auto cfg = make("[model]\nname = \"tanh_sweep\"\n[run]\nepsilons = [0.1]\n");
    const auto c = run(cfg, config::Operation::Crossing);
    REQUIRE(c.rows.size() == 1);
    CHECK(std::stod(c.rows[0][3]) == doctest::Approx(std::atan(0.3)).epsilon(1e-10));
    const auto l = run(cfg, config::Operation::LoopIntegral);
    CHECK(l.rows.size() == 1);
    const auto p = run(cfg, config::Operation::Prefactor);
    CHECK(p.rows.size() == 1);
}

TEST_CASE("fit rejects a file without epsilon") {
    auto cfg = make("[fit]\ninput = \"/nonexistent/file.csv\"\n");
    CHECK_THROWS_AS(run(cfg, config::Operation::Fit), ConfigError);
}
