#include "doctest.h"

#include <numbers>

#include "adiabatic/complexplane.hpp"
#include "oracles.hpp"

using namespace adiabatic;

TEST_CASE("find_crossing: closed-form locations") {
    const auto lz = find_crossing(models::landau_zener(1.0, 0.5), {1, 2}, cplx(0.1, 0.4));
    CHECK(std::abs(lz.location - cplx(0.0, 0.5)) <= 1e-12);
    CHECK(lz.order_check == doctest::Approx(1.0).epsilon(0.05));
    const auto lz2 = find_crossing(models::landau_zener(2.0, 0.3), {1, 2}, cplx(0.0, 0.1));
    CHECK(std::abs(lz2.location - cplx(0.0, 0.15)) <= 1e-12);
    const auto th = find_crossing(models::tanh_sweep(0.3), {1, 2}, cplx(0.05, 0.25));
    CHECK(std::abs(th.location - cplx(0.0, std::atan(0.3))) <= 1e-12);
    CHECK(th.residual <= 1e-12);
}

TEST_CASE("find_crossing: quadratic convergence of the Newton steps") {
    const auto cp = find_crossing(models::tanh_sweep(0.3), {1, 2}, cplx(0.3, 0.5));
    const auto& s = cp.step_history;
    REQUIRE(s.size() >= 3);
    // Once in the basin, s_{k+1} / s_k^2 stays bounded.
    int checked = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k - 1] < 0.05 && s[k] > 1e-13) {
            CHECK(s[k] <= 10.0 * s[k - 1] * s[k - 1]);
            ++checked;
        }
    }
    CHECK(checked >= 1);
}

TEST_CASE("find_crossing: complex_hermitian crossing") {
    const auto cp = find_crossing(models::complex_hermitian(1.0, 0.3, 0.2), {1, 2}, cplx(0.0, 0.3));
    CHECK(std::abs(cp.location - cplx(0.0, 0.35261)) <= 1e-5);
}

TEST_CASE("find_crossings: one crossing per model, two for the double well") {
    CHECK(find_crossings(models::tanh_sweep(0.3), {1, 2}).size() == 1);
    const auto two = find_crossings(oracle::double_crossing(0.2), {1, 2}, 3.0);
    REQUIRE(two.size() == 2);
    CHECK(two[0].location.real() < 0.0);
    CHECK(two[1].location.real() > 0.0);
    // z^2 - 1 = +-i delta near z = +-1: z = +-1 + i delta/2 to first order.
    CHECK(std::abs(two[1].location - cplx(1.0, 0.1)) <= 0.01);
    CHECK(std::abs(two[0].location - cplx(-1.0, 0.1)) <= 0.01);
}

TEST_CASE("loop_integral: Landau-Zener closed form and branch-cut oracle") {
    const auto lz = models::landau_zener(1.0, 0.5);
    const auto cp = find_crossing(lz, {1, 2}, cplx(0.0, 0.4));
    const auto r = loop_integral(lz, loop_around(lz, cp), 1);
    // -i pi delta^2 / (4 a)
    CHECK(std::abs(r.value - cplx(0.0, -std::numbers::pi * 0.25 / 4.0)) <= 1e-8);
    CHECK(std::abs(r.value - cplx(0.0, -0.19635)) <= 1e-5);
    CHECK(r.exchanged);
    CHECK(r.partner == 2);
    CHECK(std::abs(r.value - oracle::vertical_branch_integral(lz, cp.location)) <= 1e-8);
    CHECK(2.0 * r.value.imag() == doctest::Approx(-std::numbers::pi * 0.25 / 2.0).epsilon(1e-8));
}

TEST_CASE("loop_integral: tanh and complex_hermitian against the branch-cut oracle") {
    for (const auto& m : {models::tanh_sweep(0.3), models::complex_hermitian(1.0, 0.3, 0.2)}) {
        const auto cp = find_crossing(m, {1, 2}, cplx(0.0, 0.3));
        const auto r = loop_integral(m, loop_around(m, cp), 1);
        CAPTURE(m.name);
        CHECK(std::abs(r.value - oracle::vertical_branch_integral(m, cp.location, 80)) <= 1e-7);
        CHECK(std::abs(r.value.real()) <= 1e-8);
    }
    const auto ch = models::complex_hermitian(1.0, 0.3, 0.2);
    const auto r = loop_integral(ch, loop_around(ch, find_crossing(ch, {1, 2}, cplx(0.0, 0.3))), 1);
    CHECK(r.value.imag() == doctest::Approx(-0.1008997).epsilon(1e-5));
}

TEST_CASE("loop_integral: conjugate loop gives the conjugate value") {
    const auto m = models::tanh_sweep(0.3);
    const auto loop = loop_around(m, find_crossing(m, {1, 2}, cplx(0.0, 0.3)));
    const auto up = loop_integral(m, loop, 1);
    const auto down = loop_integral(m, loop.conjugated(), 1);
    CHECK(std::abs(down.value - std::conj(up.value)) <= 1e-9);
    CHECK(loop.conjugated().orientation == -loop.orientation);
}

TEST_CASE("loop_integral: homotopy invariance") {
    const auto m = models::tanh_sweep(0.3);
    const auto cp = find_crossing(m, {1, 2}, cplx(0.0, 0.3));
    const auto a = loop_integral(m, loop_around(m, cp, 1.0, 0.25), 1);
    const auto b = loop_integral(m, loop_around(m, cp, 0.5, 0.1), 1);
    const auto c = loop_integral(m, loop_around(m, cp, 2.0, 0.6), 1);
    CHECK(std::abs(a.value - b.value) <= 1e-9);
    CHECK(std::abs(a.value - c.value) <= 1e-9);
}

TEST_CASE("loop_integral: no exchange without an enclosed crossing; two turns close") {
    const auto lz = models::landau_zener(1.0, 0.5);
    const auto low = loop_integral(lz, rectangle_loop(0.0, 1.0, 0.3), 1);
    CHECK_FALSE(low.exchanged);
    CHECK(low.partner == 1);
    // e_1 is analytic inside: Cauchy.
    CHECK(std::abs(low.value) <= 1e-9);

    const auto cp = find_crossing(lz, {1, 2}, cplx(0.0, 0.4));
    const auto twice = loop_integral(lz, loop_around(lz, cp).repeated(2), 1);
    CHECK_FALSE(twice.exchanged);
    // e_1 then e_2: the integral of tr H = 0 around the loop.
    CHECK(std::abs(twice.value) <= 1e-8);
}

TEST_CASE("loop_integral: samples leaving the strip are rejected") {
    const auto m = models::tanh_sweep(0.3);
    CHECK_THROWS_AS(loop_integral(m, rectangle_loop(0.0, 1.0, 2.0), 1), DomainError);
}

TEST_CASE("geometric_prefactor: real symmetric models have real theta") {
    for (const auto& m : {models::landau_zener(1.0, 0.5), models::tanh_sweep(0.3)}) {
        const auto cp = find_crossing(m, {1, 2}, cplx(0.0, 0.3));
        const auto g = geometric_prefactor(m, loop_around(m, cp), 1);
        CAPTURE(m.name);
        CHECK(std::abs(g.im_theta()) <= 1e-6);
        CHECK(g.partner == 2);
        CHECK(g.complement_defect <= 1e-6);
        CHECK(std::abs(std::abs(g.overlap) - 1.0) <= 1e-6);
    }
}

TEST_CASE("geometric_prefactor: complex hermitian model") {
    const auto m = models::complex_hermitian(1.0, 0.3, 0.2);
    const auto cp = find_crossing(m, {1, 2}, cplx(0.0, 0.3));
    const auto g = geometric_prefactor(m, loop_around(m, cp), 1);
    CHECK(g.im_theta() == doctest::Approx(0.0463168).epsilon(1e-4));
    // Independent of the loop shape.
    const auto h = geometric_prefactor(m, loop_around(m, cp, 0.6, 0.15), 1);
    CHECK(std::abs(h.theta - g.theta) <= 1e-6);
    // b = 0 reduces to the real tanh sweep.
    const auto m0 = models::complex_hermitian(1.0, 0.3, 0.0);
    const auto g0 = geometric_prefactor(m0, loop_around(m0, find_crossing(m0, {1, 2}, cplx(0.0, 0.3))), 1);
    CHECK(std::abs(g0.im_theta()) <= 1e-6);
}

TEST_CASE("dissipativity: level line is dissipative, a horizontal line above the axis is not") {
    const auto lz = models::landau_zener(1.0, 0.5);
    const auto cp = find_crossing(lz, {1, 2}, cplx(0.0, 0.4));
    const auto line = level_line_path(lz, cp, 3.0);
    const auto rep = dissipativity_check(lz, line, {1, 2});
    CHECK(rep.dissipative);
    CHECK(rep.max_violation >= -1e-10);
    CHECK(rep.samples.front().real() <= -3.0 + 1e-9);
    CHECK(rep.samples.back().real() >= 3.0 - 1e-9);

    const auto flat = dissipativity_check(lz, polyline({cplx(-3.0, 0.3), cplx(3.0, 0.3)}), {1, 2});
    CHECK_FALSE(flat.dissipative);
    CHECK(flat.max_violation < -1e-6);

    // The real axis: e_1 - e_2 real, increments vanish.
    const auto axis = dissipativity_check(lz, polyline({cplx(-3.0, 0.0), cplx(3.0, 0.0)}), {1, 2});
    CHECK(axis.dissipative);
}

TEST_CASE("dissipativity: the level line reaches the crossing") {
    const auto m = models::tanh_sweep(0.3);
    const auto cp = find_crossing(m, {1, 2}, cplx(0.0, 0.3));
    const auto line = level_line_path(m, cp, 4.0);
    double closest = 1e9;
    for (const cplx z : line.vertices) closest = std::min(closest, std::abs(z - cp.location));
    CHECK(closest <= 1e-9);
    CHECK(dissipativity_check(m, line, {1, 2}).dissipative);
}
