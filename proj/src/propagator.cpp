#include "adiabatic/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adiabatic/spectral.hpp"

namespace adiabatic {
namespace {

// Gauss-Legendre nodes on [0, 1] and the commutator-free weights.
const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0;
const double kNode2 = 0.5 + kSqrt3 / 6.0;
const double kAlpha1 = 0.25 - kSqrt3 / 6.0;
const double kAlpha2 = 0.25 + kSqrt3 / 6.0;

Matrix cf4_step(const Generator& g, double epsilon, double t, double h) {
    const Matrix g1 = g(t + kNode1 * h);
    const Matrix g2 = g(t + kNode2 * h);
    const Matrix first = unitary_exponential(kAlpha2 * g1 + kAlpha1 * g2, h / epsilon);
    const Matrix second = unitary_exponential(kAlpha1 * g1 + kAlpha2 * g2, h / epsilon);
    return second * first;
}

}  // namespace

PropagationResult propagate_generator(const Generator& generator, int dimension, double epsilon,
                                      double t0, double t1, const PropagateOptions& options,
                                      const StepObserver& observer) {
    if (!(epsilon > 0.0)) throw DomainError("propagate: epsilon must be positive");
    if (options.tolerance < 1e-14) throw DomainError("propagate: tolerance below 1e-14");
    PropagationResult res;
    res.t0 = t0;
    res.t1 = t1;
    res.epsilon = epsilon;
    res.U = Matrix::Identity(dimension, dimension);
    if (t1 == t0) return res;

    const double direction = t1 > t0 ? 1.0 : -1.0;
    const double h_max = options.step_bound_factor * epsilon;
    double h = std::min(h_max, 0.1 * epsilon);
    double t = t0;
    long attempts = 0;
    while (direction * (t1 - t) > 0.0) {
        if (++attempts > options.max_steps) {
            std::ostringstream msg;
            msg << "propagate: step cap " << options.max_steps << " exceeded (epsilon = " << epsilon
                << ", tol = " << options.tolerance << "); integrate in a superadiabatic frame instead";
            throw NumericalError(msg.str());
        }
        const double remaining = std::abs(t1 - t);
        const bool last = h >= remaining;
        const double step = last ? remaining : h;
        const double signed_step = direction * step;
        const Matrix full = cf4_step(generator, epsilon, t, signed_step);
        const Matrix left = cf4_step(generator, epsilon, t, 0.5 * signed_step);
        const Matrix right = cf4_step(generator, epsilon, t + 0.5 * signed_step, 0.5 * signed_step);
        const Matrix two = right * left;
        const double err = max_abs(two - full) / 15.0;
        if (err <= options.tolerance || step < 1e-14 * std::max(1.0, std::abs(t))) {
            if (observer) {
                observer(t, 0.5 * signed_step);
                observer(t + 0.5 * signed_step, 0.5 * signed_step);
            }
            res.U = two * res.U;
            res.error_estimate += err;
            ++res.step_count;
            t = last ? t1 : t + signed_step;
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(options.tolerance / err, 0.2) : 2.0;
        h = std::min(h_max, step * std::clamp(factor, 0.2, 2.0));
    }
    res.unitarity_defect = unitarity_defect(res.U);
    return res;
}

PropagationResult propagate(const HamiltonianModel& model, double epsilon, double t0, double t1,
                            const PropagateOptions& options) {
    return propagate_generator([&model](double t) { return model.at(t); }, model.dimension, epsilon, t0,
                               t1, options);
}

CoefficientTrace coefficients(const HamiltonianModel& model, double epsilon, const Vector& psi0,
                              const std::vector<double>& grid, const PropagateOptions& options) {
    if (grid.empty()) throw DomainError("coefficients: empty grid");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("coefficients: psi0 not normalized");
    const int n = model.dimension;
    std::vector<cplx> samples(grid.begin(), grid.end());
    const std::vector<SpectralFrame> frames = track_frames(model, samples);

    CoefficientTrace trace;
    trace.times = grid;
    Eigen::VectorXd phase = Eigen::VectorXd::Zero(n);
    auto accumulate = [&](double t, double h) {
        const Eigen::VectorXd e1 = jacobi_eigen(model.at(t + kNode1 * h)).values;
        const Eigen::VectorXd e2 = jacobi_eigen(model.at(t + kNode2 * h)).values;
        phase += 0.5 * h * (e1 + e2);
    };
    const cplx I{0.0, 1.0};
    Vector psi = psi0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (g > 0) {
            const auto step = propagate_generator([&model](double t) { return model.at(t); }, n, epsilon,
                                                  grid[g - 1], grid[g], options, accumulate);
            psi = step.U * psi;
        }
        Vector c(n);
        for (int j = 1; j <= n; ++j) {
            const cplx overlap = frames[g].vector(j).dot(psi);
            c(j - 1) = std::exp(I * phase(j - 1) / epsilon) * overlap;
        }
        trace.norm_defect = std::max(trace.norm_defect, std::abs(c.squaredNorm() - 1.0));
        trace.coefficients.push_back(c);
        trace.dynamical_phases.push_back(phase);
    }
    return trace;
}

namespace {

double overlap_probability(const HamiltonianModel& model, double t_from, double t_to, const Matrix& u,
                           int from_label, int to_label) {
    const SpectralFrame start = eigen_frame(model.at(t_from), cplx(t_from, 0.0));
    const SpectralFrame end = eigen_frame(model.at(t_to), cplx(t_to, 0.0));
    const Vector psi = u * start.vector(from_label);
    return std::norm(end.vector(to_label).dot(psi));
}

}  // namespace

TransitionResult transition_probability(const HamiltonianModel& model, double epsilon, int from_label,
                                        int to_label, const ScatteringOptions& options) {
    if (!(epsilon > 0.0)) throw DomainError("transition_probability: epsilon must be positive");
    const int n = model.dimension;
    if (from_label < 1 || from_label > n || to_label < 1 || to_label > n)
        throw DomainError("transition_probability: label out of range");
    TransitionResult out;
    if (model.scattering_safe && model.limits) {
        const double T = truncation_time(model, options.truncation_tolerance);
        const auto res = propagate(model, epsilon, -T, T, options.propagate);
        out.probability = overlap_probability(model, -T, T, res.U, from_label, to_label);
        out.t_used = T;
        out.unitarity_defect = res.unitarity_defect;
        out.error_estimate = res.error_estimate;
        return out;
    }
    // Convergence in T: couplings decay algebraically, so extend [-T, T] until P settles.
    double T = options.initial_t;
    PropagationResult core = propagate(model, epsilon, -T, T, options.propagate);
    double p_prev = overlap_probability(model, -T, T, core.U, from_label, to_label);
    double err = core.error_estimate;
    for (int k = 1; k <= options.max_doublings; ++k) {
        const double T2 = 2.0 * T;
        const auto lower = propagate(model, epsilon, -T2, -T, options.propagate);
        const auto upper = propagate(model, epsilon, T, T2, options.propagate);
        core.U = upper.U * core.U * lower.U;
        err += lower.error_estimate + upper.error_estimate;
        const double p = overlap_probability(model, -T2, T2, core.U, from_label, to_label);
        const double change = std::abs(p - p_prev) / std::max(p, 1e-300);
        T = T2;
        p_prev = p;
        if (change < options.relative_change) {
            out.probability = p;
            out.t_used = T;
            out.unitarity_defect = unitarity_defect(core.U);
            out.error_estimate = err;
            out.doublings = k;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "transition_probability: no convergence in T after " << options.max_doublings
        << " doublings (epsilon = " << epsilon << ")";
    throw NumericalError(msg.str());
}

double finite_time_transition(const HamiltonianModel& model, double epsilon, double t0, double t1,
                              const LabelSet& from_labels, const LabelSet& to_labels,
                              const PropagateOptions& options) {
    const auto res = propagate(model, epsilon, t0, t1, options);
    const Matrix p_from = spectral_projector(eigen_frame(model.at(t0), cplx(t0, 0.0)), from_labels).matrix;
    const Matrix p_to = spectral_projector(eigen_frame(model.at(t1), cplx(t1, 0.0)), to_labels).matrix;
    const double norm = operator_norm(p_to * res.U * p_from);
    return norm * norm;
}

Generator adiabatic_generator(const HamiltonianModel& model, double epsilon, const LabelSet& labels) {
    const cplx I{0.0, 1.0};
    return [&model, epsilon, labels, I](double t) {
        const Matrix h = model.at(t);
        const Matrix p = spectral_projector(eigen_frame(h, cplx(t, 0.0)), labels).matrix;
        const Matrix dp = projector_derivative(model, t, labels).value;
        Matrix g = h + I * epsilon * commutator(dp, p);
        return Matrix(0.5 * (g + g.adjoint()));
    };
}

PropagationResult adiabatic_propagate(const HamiltonianModel& model, double epsilon, double t0, double t1,
                                      const LabelSet& labels, const PropagateOptions& options) {
    PropagationResult res =
        propagate_generator(adiabatic_generator(model, epsilon, labels), model.dimension, epsilon, t0, t1, options);
    const Matrix p0 = spectral_projector(eigen_frame(model.at(t0), cplx(t0, 0.0)), labels).matrix;
    const Matrix p1 = spectral_projector(eigen_frame(model.at(t1), cplx(t1, 0.0)), labels).matrix;
    res.intertwining_defect = operator_norm(res.U * p0 - p1 * res.U);
    return res;
}

}  // namespace adiabatic
