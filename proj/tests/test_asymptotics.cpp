#include "doctest.h"

#include <numbers>

#include "adiabatic/asymptotics.hpp"
#include "adiabatic/propagator.hpp"
#include "oracles.hpp"

using namespace adiabatic;

TEST_CASE("fit_decay_rate: exact synthetic data") {
    std::vector<std::pair<double, double>> s;
    for (double eps : {0.2, 0.15, 0.1, 0.08, 0.06}) s.emplace_back(eps, 1.3 * std::exp(-0.4 / eps));
    const auto f = fit_decay_rate(s);
    CHECK(f.gamma_fit == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(f.prefactor_fit == doctest::Approx(1.3).epsilon(1e-10));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.epsilons.size() == 5);
    for (double r : f.residuals) CHECK(std::abs(r) <= 1e-10);
}

TEST_CASE("fit_decay_rate: noise floor exclusion and domain errors") {
    std::vector<std::pair<double, double>> s;
    for (double eps : {0.2, 0.15, 0.1, 0.08, 0.06, 0.02}) s.emplace_back(eps, std::exp(-0.4 / eps));
    const auto f = fit_decay_rate(s, 1e-8);
    // exp(-20) = 2e-9 < 100 * 1e-8.
    REQUIRE(f.excluded.size() == 1);
    CHECK(f.excluded.front() == 0.02);
    CHECK(f.gamma_fit == doctest::Approx(0.2).epsilon(1e-10));

    CHECK_THROWS_AS(fit_decay_rate({{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}}), DomainError);
    CHECK_THROWS_AS(fit_decay_rate({{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.0}, {0.4, 0.3}}), DomainError);
    CHECK_THROWS_AS(fit_decay_rate(s, 1e-4), DomainError);
}

TEST_CASE("loglog_slope and lz_exponent") {
    std::vector<std::pair<double, double>> s;
    for (double eps : {0.02, 0.05, 0.1, 0.2}) s.emplace_back(eps, 3.0 * eps * eps);
    CHECK(loglog_slope(s) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(lz_exponent(1.0, 0.5) == doctest::Approx(-std::numbers::pi / 8.0).epsilon(1e-15));
    CHECK(lz_exponent(2.0, 0.3) == doctest::Approx(-std::numbers::pi * 0.09 / 4.0).epsilon(1e-15));
}

TEST_CASE("single-crossing estimate: Landau-Zener exponent and unit prefactor") {
    const auto lz = models::landau_zener(1.0, 0.5);
    const auto e = theorem1_estimate(lz, 0.1);
    CHECK(e.exponent_per_eps == doctest::Approx(lz_exponent(1.0, 0.5)).epsilon(1e-8));
    CHECK(std::abs(e.log_prefactor) <= 1e-6);
    CHECK(e.value == doctest::Approx(oracle::lz_probability(1.0, 0.5, 0.1)).epsilon(1e-6));
    CHECK(e.dissipative_path_found);
    CHECK(e.regime == "asymptotic formula");
    CHECK(e.in_range);
    REQUIRE(e.components.size() == 1);
    CHECK(e.components.front().partner == 2);
}

TEST_CASE("single-crossing estimate: agreement with the numerical transition improves as eps shrinks") {
    const auto m = models::complex_hermitian(1.0, 0.3, 0.2);
    double previous = 1.0;
    for (double eps : {0.1, 0.05, 0.03}) {
        const auto e = theorem1_estimate(m, eps);
        const double p = transition_probability(m, eps, 1, 2).probability;
        const double dev = std::abs(p - e.value) / e.value;
        CAPTURE(eps);
        CHECK(dev <= 1e-3);
        CHECK(dev < previous);
        previous = dev;
    }
    const auto e = theorem1_estimate(m, 0.05);
    CHECK(e.log_prefactor == doctest::Approx(2.0 * 0.0463168).epsilon(1e-4));
}

TEST_CASE("single-crossing estimate: several crossings are rejected") {
    CHECK_THROWS_AS(theorem1_estimate(oracle::double_crossing(0.2), 0.1), DomainError);
}

TEST_CASE("cascade estimate: cascade exponent is the sum of the pair exponents") {
    const auto m = models::three_level_cascade(0.1, -1.0, 1.0);
    const auto e = theorem1prime_estimate(m, 0.04);
    REQUIRE(e.components.size() == 2);
    CHECK(e.components[0].label == 1);
    CHECK(e.components[0].partner == 2);
    CHECK(e.components[1].label == 2);
    CHECK(e.components[1].partner == 3);
    CHECK(e.exponent_per_eps == doctest::Approx(e.components[0].exponent + e.components[1].exponent));
    CHECK(e.exponent_per_eps == doctest::Approx(-0.259487).epsilon(1e-5));

    // Each isolated pair contributes roughly its own two-level exponent.
    double surrogate = 0.0;
    for (double tc : {-1.0, 1.0}) surrogate += theorem1_estimate(models::cascade_pair_surrogate(0.1, tc), 0.04).exponent_per_eps;
    CHECK(e.exponent_per_eps == doctest::Approx(surrogate).epsilon(0.05));

    for (double eps : {0.04, 0.03}) {
        const double p = transition_probability(m, eps, 1, 3).probability;
        CHECK(p / theorem1prime_estimate(m, eps).value == doctest::Approx(1.0).epsilon(1e-4));
    }
}
