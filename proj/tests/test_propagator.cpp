#include "doctest.h"

#include <numbers>

#include "adiabatic/propagator.hpp"
#include "adiabatic/spectral.hpp"
#include "oracles.hpp"

using namespace adiabatic;

namespace {

Matrix mat2(cplx a, cplx b, cplx c, cplx d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("propagate: constant generator matches the closed-form exponential") {
    const Matrix h0 = mat2(0.4, cplx(0.2, -0.1), cplx(0.2, 0.1), -0.3);
    const auto r = propagate(models::constant(h0), 0.1, -1.0, 2.0);
    const Matrix exact = unitary_exponential(h0, 3.0 / 0.1);
    CHECK(max_abs(r.U - exact) <= 1e-9);
    CHECK(r.unitarity_defect <= 1e-12);
    CHECK(r.step_count > 0);
}

TEST_CASE("propagate: zero-length interval is the identity") {
    const auto r = propagate(models::tanh_sweep(0.3), 0.05, 0.7, 0.7);
    CHECK(max_abs(r.U - Matrix::Identity(2, 2)) == 0.0);
    CHECK(r.step_count == 0);
}

TEST_CASE("propagate: tanh sweep against an independent RK4 and a tighter reference") {
    const auto m = models::tanh_sweep(0.3);
    const double eps = 0.05;
    const auto r = propagate(m, eps, -3.0, 3.0);
    // Fixed-step RK4 at dt = 1.5e-4: global error ~ (dt/eps)^4 * 6/eps ~ 1e-8.
    const Matrix rk = oracle::rk4_propagate([&](double t) { return m.at(t); }, 2, eps, -3.0, 3.0, 40000);
    CHECK(max_abs(r.U - rk) <= 1e-7);

    PropagateOptions tight;
    tight.tolerance = 1e-14;
    const auto ref = propagate(m, eps, -3.0, 3.0, tight);
    CHECK(max_abs(r.U - ref.U) <= 1e-7);
    CHECK(max_abs(r.U - ref.U) <= 10.0 * r.error_estimate + 1e-12);
}

TEST_CASE("propagate: composition and time reversal") {
    const auto m = models::complex_hermitian(1.0, 0.3, 0.2);
    const double eps = 0.07;
    const auto a = propagate(m, eps, -2.0, 0.5);
    const auto b = propagate(m, eps, 0.5, 2.0);
    const auto full = propagate(m, eps, -2.0, 2.0);
    CHECK(max_abs(b.U * a.U - full.U) <= 1e-7);
    const auto back = propagate(m, eps, 2.0, -2.0);
    CHECK(max_abs(back.U * full.U - Matrix::Identity(2, 2)) <= 1e-7);
}

TEST_CASE("propagate: fourth-order convergence of fixed steps") {
    // With the step bound tightened the step count is fixed by the bound, and
    // the error against a tight reference must fall by ~16 per halving.
    const auto m = models::tanh_sweep(0.3);
    const double eps = 0.2;
    PropagateOptions tight;
    tight.tolerance = 1e-14;
    const auto ref = propagate(m, eps, -2.0, 2.0, tight);
    auto err = [&](double factor) {
        PropagateOptions o;
        o.tolerance = 1.0;
        o.step_bound_factor = factor;
        return max_abs(propagate(m, eps, -2.0, 2.0, o).U - ref.U);
    };
    const double ratio = err(0.5) / err(0.25);
    CHECK(std::log2(ratio) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("transition_probability: Landau-Zener formula") {
    const auto lz = models::landau_zener(1.0, 0.5);
    const auto a = transition_probability(lz, 0.1, 1, 2);
    CHECK(a.probability == doctest::Approx(oracle::lz_probability(1.0, 0.5, 0.1)).epsilon(0.03));
    CHECK(a.probability == doctest::Approx(0.01969).epsilon(0.03));
    const auto b = transition_probability(lz, 0.05, 1, 2);
    CHECK(b.probability == doctest::Approx(3.88e-4).epsilon(0.05));
    CHECK(a.unitarity_defect <= 1e-10);
}

TEST_CASE("transition_probability: scattering-safe model uses the truncation time") {
    const auto m = models::tanh_sweep(0.3);
    const auto r = transition_probability(m, 0.1, 1, 2);
    CHECK(r.t_used == doctest::Approx(truncation_time(m, 1e-10)));
    CHECK(r.probability > 0.0);
    CHECK(r.probability < 1.0);
    const auto down = transition_probability(m, 0.1, 2, 1);
    // Two-level unitarity: |U_21| = |U_12|.
    CHECK(down.probability == doctest::Approx(r.probability).epsilon(1e-6));
}

TEST_CASE("finite_time_transition agrees with transition_probability on a long window") {
    const auto m = models::tanh_sweep(0.3);
    const double T = truncation_time(m, 1e-10);
    const double p = finite_time_transition(m, 0.1, -T, T, {1}, {2});
    CHECK(p == doctest::Approx(transition_probability(m, 0.1, 1, 2).probability).epsilon(1e-6));
}

TEST_CASE("adiabatic_propagate: intertwining and first-order distance to U") {
    const auto m = models::tanh_sweep(0.3);
    std::vector<double> dist;
    const std::vector<double> epsilons{0.1, 0.05, 0.025, 0.0125};
    for (double eps : epsilons) {
        const auto v = adiabatic_propagate(m, eps, -3.0, 3.0, {1});
        CHECK(v.intertwining_defect <= 1e-6);
        CHECK(v.unitarity_defect <= 1e-10);
        const auto u = propagate(m, eps, -3.0, 3.0);
        dist.push_back(operator_norm(u.U - v.U));
    }
    // ||U - V|| is O(eps) on a window where H' does not vanish at the ends; the
    // constant oscillates with eps, so only boundedness and decrease are checked.
    for (std::size_t k = 0; k < dist.size(); ++k) {
        CHECK(dist[k] <= 8.0 * epsilons[k]);
        if (k > 0) CHECK(dist[k] < dist[k - 1]);
    }
}

TEST_CASE("transition probability decays faster than any power") {
    const auto m = models::tanh_sweep(0.3);
    const double p1 = transition_probability(m, 0.05, 1, 2).probability;
    const double p2 = transition_probability(m, 0.025, 1, 2).probability;
    const double p3 = transition_probability(m, 0.0125, 1, 2).probability;
    // A power law gives equal log-ratios under halving; exp(-c/eps) doubles them.
    CHECK(std::log(p2 / p3) / std::log(p1 / p2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("coefficients: norm conservation and Born-Fock start") {
    const auto m = models::tanh_sweep(0.3);
    const SpectralFrame f = eigen_frame(m.at(-4.0));
    std::vector<double> grid;
    for (int k = 0; k <= 80; ++k) grid.push_back(-4.0 + 0.1 * k);
    const auto tr = coefficients(m, 0.05, f.vector(1), grid);
    REQUIRE(tr.coefficients.size() == grid.size());
    CHECK(tr.norm_defect <= 1e-9);
    CHECK(std::abs(tr.coefficients.front()(0)) == doctest::Approx(1.0));
    CHECK(std::abs(tr.coefficients.front()(1)) <= 1e-14);
    // Final |c_2|^2 is the finite-window transition probability.
    const double p = finite_time_transition(m, 0.05, -4.0, 4.0, {1}, {2});
    CHECK(std::norm(tr.coefficients.back()(1)) == doctest::Approx(p).epsilon(1e-5));
}

TEST_CASE("propagate: step cap raises NumericalError") {
    PropagateOptions o;
    o.max_steps = 10;
    CHECK_THROWS_AS(propagate(models::tanh_sweep(0.3), 0.01, -5.0, 5.0, o), NumericalError);
}
