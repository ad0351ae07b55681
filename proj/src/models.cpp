#include "adiabatic/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "adiabatic/spectral.hpp"

namespace adiabatic {

Matrix HamiltonianModel::evaluate(cplx z) const {
    if (!in_strip(z)) {
        std::ostringstream msg;
        msg << name << ": point " << z << " outside the analyticity strip |Im z| < "
            << strip_halfwidth;
        throw DomainError(msg.str());
    }
    return generator(z);
}

double HamiltonianModel::param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw DomainError(name + ": no parameter '" + key + "'");
    return it->second;
}

namespace models {
namespace {

const cplx I{0.0, 1.0};

Matrix pauli_combination(cplx x, cplx y, cplx z) {
    Matrix m(2, 2);
    m << z, x - I * y, x + I * y, -z;
    return m;
}

}  // namespace

HamiltonianModel landau_zener(double a, double delta) {
    if (!(a > 0.0) || !(delta > 0.0)) throw DomainError("landau_zener: need a > 0, delta > 0");
    HamiltonianModel m;
    m.name = "landau_zener";
    m.dimension = 2;
    m.generator = [a, delta](cplx z) { return Matrix(0.5 * pauli_combination(delta, 0.0, a * z)); };
    // Entire in z; the strip only bounds where complex-plane work may wander.
    m.strip_halfwidth = 4.0 * delta / a + 4.0;
    m.decay_exponent = 1.0;
    m.scattering_safe = false;
    m.params = {{"a", a}, {"delta", delta}};
    return m;
}

HamiltonianModel tanh_sweep(double delta) {
    if (!(delta > 0.0)) throw DomainError("tanh_sweep: need delta > 0");
    HamiltonianModel m;
    m.name = "tanh_sweep";
    m.dimension = 2;
    m.generator = [delta](cplx z) { return Matrix(0.5 * pauli_combination(delta, 0.0, std::tanh(z))); };
    m.strip_halfwidth = 1.5;  // tanh has poles at +-i pi/2
    m.decay_exponent = 1.0;   // approach is exponential; any alpha works
    m.limits = std::make_pair(Matrix(0.5 * pauli_combination(delta, 0.0, -1.0)),
                              Matrix(0.5 * pauli_combination(delta, 0.0, 1.0)));
    m.scattering_safe = true;
    m.params = {{"delta", delta}};
    return m;
}

HamiltonianModel complex_hermitian(double a, double delta, double b) {
    if (!(a > 0.0) || !(delta > 0.0)) throw DomainError("complex_hermitian: need a > 0, delta > 0");
    HamiltonianModel m;
    m.name = "complex_hermitian";
    m.dimension = 2;
    m.generator = [a, delta, b](cplx z) {
        const cplx az = a * z;
        return Matrix(0.5 * pauli_combination(delta, b / std::cosh(az), std::tanh(az)));
    };
    m.strip_halfwidth = 1.5 / a;
    m.decay_exponent = 1.0;
    m.limits = std::make_pair(Matrix(0.5 * pauli_combination(delta, 0.0, -1.0)),
                              Matrix(0.5 * pauli_combination(delta, 0.0, 1.0)));
    m.scattering_safe = true;
    m.params = {{"a", a}, {"delta", delta}, {"b", b}};
    return m;
}

HamiltonianModel three_level_cascade(double delta, double t0, double t1) {
    if (!(t0 < t1)) throw DomainError("three_level_cascade: need t0 < t1");
    if (delta < 0.0) throw DomainError("three_level_cascade: need delta >= 0");
    const double d2 = std::tanh(t0);
    const double d3 = std::tanh(t1);
    HamiltonianModel m;
    m.name = "three_level_cascade";
    m.dimension = 3;
    m.generator = [delta, d2, d3](cplx z) {
        Matrix h = Matrix::Zero(3, 3);
        h(0, 0) = std::tanh(z);
        h(1, 1) = d2;
        h(2, 2) = d3;
        h(0, 1) = h(1, 0) = delta;
        h(0, 2) = h(2, 0) = delta;
        return h;
    };
    m.strip_halfwidth = 1.5;
    m.decay_exponent = 1.0;
    Matrix lo = Matrix::Zero(3, 3), hi = Matrix::Zero(3, 3);
    lo(0, 0) = -1.0;
    hi(0, 0) = 1.0;
    for (Matrix* h : {&lo, &hi}) {
        (*h)(1, 1) = d2;
        (*h)(2, 2) = d3;
        (*h)(0, 1) = (*h)(1, 0) = delta;
        (*h)(0, 2) = (*h)(2, 0) = delta;
    }
    m.limits = std::make_pair(lo, hi);
    m.scattering_safe = true;
    m.params = {{"delta", delta}, {"t0", t0}, {"t1", t1}};
    return m;
}

HamiltonianModel cascade_pair_surrogate(double delta, double tc) {
    const double dc = std::tanh(tc);
    HamiltonianModel m;
    m.name = "cascade_pair_surrogate";
    m.dimension = 2;
    m.generator = [delta, dc](cplx z) {
        Matrix h(2, 2);
        h << std::tanh(z), delta, delta, dc;
        return h;
    };
    m.strip_halfwidth = 1.5;
    Matrix lo(2, 2), hi(2, 2);
    lo << -1.0, delta, delta, dc;
    hi << 1.0, delta, delta, dc;
    m.limits = std::make_pair(lo, hi);
    m.scattering_safe = true;
    m.params = {{"delta", delta}, {"tc", tc}};
    return m;
}

HamiltonianModel spectator_three_level(double delta, double coupling, double e3) {
    if (!(delta > 0.0)) throw DomainError("spectator_three_level: need delta > 0");
    HamiltonianModel m;
    m.name = "spectator_three_level";
    m.dimension = 3;
    m.generator = [delta, coupling, e3](cplx z) {
        Matrix h = Matrix::Zero(3, 3);
        const cplx th = std::tanh(z);
        const cplx c = coupling / std::cosh(z);
        h(0, 0) = 0.5 * th;
        h(1, 1) = -0.5 * th;
        h(0, 1) = h(1, 0) = 0.5 * delta;
        h(0, 2) = h(2, 0) = c;
        h(1, 2) = h(2, 1) = c;
        h(2, 2) = e3;
        return h;
    };
    m.strip_halfwidth = 1.5;
    Matrix lo = Matrix::Zero(3, 3), hi = Matrix::Zero(3, 3);
    lo(0, 0) = -0.5;
    lo(1, 1) = 0.5;
    hi(0, 0) = 0.5;
    hi(1, 1) = -0.5;
    for (Matrix* h : {&lo, &hi}) {
        (*h)(0, 1) = (*h)(1, 0) = 0.5 * delta;
        (*h)(2, 2) = e3;
    }
    m.limits = std::make_pair(lo, hi);
    m.scattering_safe = true;
    m.params = {{"delta", delta}, {"coupling", coupling}, {"e3", e3}};
    m.lower_labels = {1, 2};
    return m;
}

HamiltonianModel constant(const Matrix& h0) {
    if (hermiticity_defect(h0) > 1e-12) throw DomainError("constant: matrix is not hermitian");
    HamiltonianModel m;
    m.name = "constant";
    m.dimension = static_cast<int>(h0.rows());
    m.generator = [h0](cplx) { return h0; };
    m.strip_halfwidth = 10.0;
    m.limits = std::make_pair(h0, h0);
    m.scattering_safe = true;
    return m;
}

std::vector<std::string> catalog() {
    return {"landau_zener", "tanh_sweep", "complex_hermitian", "three_level_cascade",
            "cascade_pair_surrogate", "spectator_three_level"};
}

std::map<std::string, double> parameter_defaults(const std::string& name) {
    if (name == "landau_zener") return {{"a", 1.0}, {"delta", 0.5}};
    if (name == "tanh_sweep") return {{"delta", 0.3}};
    if (name == "complex_hermitian") return {{"a", 1.0}, {"delta", 0.3}, {"b", 0.2}};
    if (name == "three_level_cascade") return {{"delta", 0.1}, {"t0", -1.0}, {"t1", 1.0}};
    if (name == "cascade_pair_surrogate") return {{"delta", 0.1}, {"tc", -1.0}};
    if (name == "spectator_three_level") return {{"delta", 0.3}, {"coupling", 0.2}, {"e3", 3.0}};
    std::ostringstream msg;
    msg << "unknown model '" << name << "'; catalog:";
    for (const auto& n : catalog()) msg << ' ' << n;
    throw DomainError(msg.str());
}

HamiltonianModel by_name(const std::string& name, const std::map<std::string, double>& params) {
    auto p = parameter_defaults(name);
    for (const auto& [key, value] : params) {
        if (!p.count(key)) throw DomainError(name + ": unknown parameter '" + key + "'");
        p[key] = value;
    }
    if (name == "landau_zener") return landau_zener(p["a"], p["delta"]);
    if (name == "tanh_sweep") return tanh_sweep(p["delta"]);
    if (name == "complex_hermitian") return complex_hermitian(p["a"], p["delta"], p["b"]);
    if (name == "three_level_cascade") return three_level_cascade(p["delta"], p["t0"], p["t1"]);
    if (name == "cascade_pair_surrogate") return cascade_pair_surrogate(p["delta"], p["tc"]);
    return spectator_three_level(p["delta"], p["coupling"], p["e3"]);
}

}  // namespace models

double truncation_time(const HamiltonianModel& model, double tol, double t_max) {
    if (!model.scattering_safe || !model.limits) {
        throw DomainError(model.name +
                          ": no limits H(+-inf); use convergence-in-T mode for scattering");
    }
    const auto& [lo, hi] = *model.limits;
    for (double t = 0.0; t <= t_max; t += 1.0) {
        if (operator_norm(model.at(-t) - lo) <= tol && operator_norm(model.at(t) - hi) <= tol)
            return t;
    }
    throw NumericalError(model.name + ": truncation time exceeds t_max");
}

ModelReport validate_model(const HamiltonianModel& model, double t_range, int real_samples,
                           int strip_points) {
    ModelReport report;
    report.min_gap = std::numeric_limits<double>::infinity();
    const int n_low = static_cast<int>(model.lower_labels.size());
    for (int k = 0; k < real_samples; ++k) {
        const double t = -t_range + 2.0 * t_range * k / (real_samples - 1);
        const Matrix h = model.at(t);
        report.hermiticity_defect = std::max(report.hermiticity_defect, hermiticity_defect(h));
        const SpectralFrame f = eigen_frame(h, cplx(t, 0.0));
        // sigma_1 is the lowest n_low levels on the real axis.
        const double gap = f.eigenvalues(n_low).real() - f.eigenvalues(n_low - 1).real();
        report.min_gap = std::min(report.min_gap, gap);
        if (model.limits) {
            const Matrix& lim = t < 0 ? model.limits->first : model.limits->second;
            report.decay_constant =
                std::max(report.decay_constant, operator_norm(h - lim) *
                                                    std::pow(1.0 + std::abs(t), 1.0 + model.decay_exponent));
        }
    }
    std::mt19937_64 rng(20260415);
    std::uniform_real_distribution<double> re(-t_range, t_range);
    std::uniform_real_distribution<double> im(-0.95 * model.strip_halfwidth, 0.95 * model.strip_halfwidth);
    for (int k = 0; k < strip_points; ++k) {
        const cplx z(re(rng), im(rng));
        const double d = max_abs(model.evaluate(std::conj(z)) - model.evaluate(z).adjoint());
        report.schwarz_defect = std::max(report.schwarz_defect, d);
    }
    return report;
}

}  // namespace adiabatic
