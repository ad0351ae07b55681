// Property suite shared by the doctest runner and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "adiabatic/asymptotics.hpp"
#include "adiabatic/complexplane.hpp"
#include "adiabatic/propagator.hpp"
#include "adiabatic/spectral.hpp"
#include "oracles.hpp"

namespace props {

using namespace adiabatic;

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline Check at_most(std::string name, double value, double tol) {
    return {std::move(name), value, tol, std::isfinite(value) && value <= tol};
}

inline Check within(std::string name, double value, double target, double tol) {
    return {std::move(name), value, tol, std::isfinite(value) && std::abs(value - target) <= tol};
}

inline std::vector<HamiltonianModel> catalog_models() {
    std::vector<HamiltonianModel> out;
    for (const auto& n : models::catalog()) out.push_back(models::by_name(n, {}));
    return out;
}

/// Unitarity, composition and time reversal of propagations.
inline std::vector<Check> propagation() {
    std::vector<Check> out;
    for (const auto& m : {models::tanh_sweep(0.3), models::complex_hermitian(1.0, 0.3, 0.2),
                          models::three_level_cascade(0.1, -1.0, 1.0)}) {
        const int n = m.dimension;
        const double eps = 0.05;
        const auto full = propagate(m, eps, -3.0, 3.0);
        const auto a = propagate(m, eps, -3.0, 0.4);
        const auto b = propagate(m, eps, 0.4, 3.0);
        const auto back = propagate(m, eps, 3.0, -3.0);
        out.push_back(at_most("unitarity " + m.name, unitarity_defect(full.U), 1e-7));
        out.push_back(at_most("composition " + m.name, max_abs(b.U * a.U - full.U), 1e-7));
        out.push_back(at_most("time reversal " + m.name, max_abs(back.U * full.U - Matrix::Identity(n, n)), 1e-7));
    }
    return out;
}

/// Idempotence, hermiticity, completeness and orthogonality of spectral projectors.
inline std::vector<Check> projector_algebra() {
    std::vector<Check> out;
    for (const auto& m : catalog_models()) {
        double worst = 0.0;
        for (int k = 0; k <= 40; ++k) {
            const SpectralFrame f = eigen_frame(m.at(-4.0 + 0.2 * k));
            const int n = m.dimension;
            Matrix sum = Matrix::Zero(n, n);
            std::vector<Matrix> p;
            for (int j = 1; j <= n; ++j) {
                p.push_back(spectral_projector(f, {j}).matrix);
                sum += p.back();
                worst = std::max({worst, max_abs(p.back() * p.back() - p.back()), hermiticity_defect(p.back())});
            }
            worst = std::max(worst, max_abs(sum - Matrix::Identity(n, n)));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) worst = std::max(worst, max_abs(p[i] * p[j]));
        }
        out.push_back(at_most("projector algebra " + m.name, worst, 1e-9));
    }
    return out;
}

/// H(conj z) = H(z)^dagger on 100 strip points.
inline std::vector<Check> schwarz() {
    std::vector<Check> out;
    for (const auto& m : catalog_models()) {
        double worst = 0.0;
        for (const cplx z : oracle::strip_points(m.strip_halfwidth, 6.0, 100))
            worst = std::max(worst, max_abs(m.evaluate(std::conj(z)) - m.evaluate(z).adjoint()));
        out.push_back(at_most("schwarz reflection " + m.name, worst, 1e-10));
    }
    return out;
}

/// Continuing the eigenbasis once around a crossing exchanges the pair (720 steps).
inline std::vector<Check> monodromy() {
    std::vector<Check> out;
    struct Case {
        HamiltonianModel model;
        std::pair<int, int> pair;
    };
    for (const auto& c : {Case{models::landau_zener(1.0, 0.5), {1, 2}}, Case{models::tanh_sweep(0.3), {1, 2}},
                          Case{models::complex_hermitian(1.0, 0.3, 0.2), {1, 2}},
                          Case{models::three_level_cascade(0.1, -1.0, 1.0), {1, 2}}}) {
        const auto crossings = find_crossings(c.model, c.pair);
        const cplx z0 = crossings.front().location;
        const double r = std::min(0.1, 0.5 * z0.imag());
        std::vector<cplx> pts;
        for (int k = 0; k <= 720; ++k)
            pts.push_back(z0 + std::polar(r, -std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / 720));
        const auto frames = track_frames(c.model, pts);
        const auto perm = label_permutation(frames.back(), c.model.evaluate(pts.back()));
        std::vector<int> expected(c.model.dimension);
        for (int j = 0; j < c.model.dimension; ++j) expected[j] = j + 1;
        std::swap(expected[c.pair.first - 1], expected[c.pair.second - 1]);
        const bool ok = perm == expected;
        out.push_back({"monodromy exchange " + c.model.name, ok ? 0.0 : 1.0, 0.0, ok});
    }
    return out;
}

/// The adiabatic evolution intertwines the spectral projectors.
inline std::vector<Check> intertwining() {
    std::vector<Check> out;
    for (const auto& m : {models::tanh_sweep(0.3), models::complex_hermitian(1.0, 0.3, 0.2)}) {
        double worst = 0.0;
        for (double eps : {0.1, 0.05}) worst = std::max(worst, adiabatic_propagate(m, eps, -3.0, 3.0, {1}).intertwining_defect);
        out.push_back(at_most("intertwining q=0 " + m.name, worst, 1e-6));
    }
    return out;
}

/// sup_t |c_2(t)| = sup_t ||(1 - P(t)) U(t, s) P(s)|| is O(eps) uniformly in t.
inline std::vector<Check> born_fock(std::vector<std::pair<double, double>>* series = nullptr) {
    const auto m = models::tanh_sweep(0.3);
    const SpectralFrame f = eigen_frame(m.at(-6.0));
    std::vector<double> grid;
    for (int k = 0; k <= 600; ++k) grid.push_back(-6.0 + 0.02 * k);
    std::vector<std::pair<double, double>> s;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto tr = coefficients(m, eps, f.vector(1), grid);
        double sup = 0.0;
        for (const auto& c : tr.coefficients) sup = std::max(sup, std::abs(c(1)));
        s.emplace_back(eps, sup);
    }
    if (series) *series = s;
    return {within("born-fock slope tanh_sweep", loglog_slope(s), 1.0, 0.15)};
}

inline std::vector<Check> all() {
    std::vector<Check> out;
    for (auto part : {propagation(), projector_algebra(), schwarz(), monodromy(), intertwining(), born_fock()})
        out.insert(out.end(), part.begin(), part.end());
    return out;
}

}  // namespace props
