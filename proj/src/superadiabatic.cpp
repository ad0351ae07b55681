#include "adiabatic/superadiabatic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "adiabatic/spectral.hpp"

namespace adiabatic {
namespace {

LabelSet resolve_labels(const HamiltonianModel& model, const LabelSet& labels) {
    const LabelSet out = labels.empty() ? model.lower_labels : labels;
    for (int l : out) {
        if (l < 1 || l > model.dimension) throw DomainError("superadiabatic: label out of range");
    }
    if (static_cast<int>(out.size()) >= model.dimension)
        throw DomainError("superadiabatic: spectral part must be a proper subset");
    return out;
}

bool contains(const LabelSet& labels, int l) {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
}

// Projector onto the ascending ranks in `labels`, and the gap to the rest.
std::pair<Matrix, double> rank_projector(const Matrix& h, const LabelSet& labels) {
    const HermitianEigen eig = jacobi_eigen(h);
    const int n = static_cast<int>(eig.values.size());
    Matrix p = Matrix::Zero(n, n);
    double gap = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= n; ++j) {
        if (!contains(labels, j)) continue;
        const Vector v = eig.vectors.col(j - 1);
        p += v * v.adjoint();
        for (int k = 1; k <= n; ++k) {
            if (!contains(labels, k)) gap = std::min(gap, std::abs(eig.values(j - 1) - eig.values(k - 1)));
        }
    }
    return {p, gap};
}

void fill_projectors(SuperadiabaticLevel& level) {
    level.P.resize(level.H.size());
    level.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < level.H.size(); ++i) {
        auto [p, gap] = rank_projector(level.H[i], level.labels);
        const double scale = std::max(1.0, operator_norm(level.H[i]));
        if (!(gap > 1e-6 * scale)) {
            std::ostringstream msg;
            msg << "build_level: gap of H_" << level.q << " closes at t = " << level.grid[i]
                << " (epsilon = " << level.epsilon
                << " is above the threshold of the renormalization scheme)";
            throw NumericalError(msg.str());
        }
        level.min_gap = std::min(level.min_gap, gap);
        level.P[i] = std::move(p);
    }
}

// Level q+1 from level q: five-point derivative of P_q, two points lost per side.
SuperadiabaticLevel next_level(const HamiltonianModel& model, SuperadiabaticLevel& prev) {
    const std::size_t n = prev.grid.size();
    if (n < 5) throw DomainError("build_level: grid too short for the requested order");
    const double s = prev.spacing();
    const cplx ie{0.0, prev.epsilon};
    SuperadiabaticLevel next;
    next.q = prev.q + 1;
    next.epsilon = prev.epsilon;
    next.labels = prev.labels;
    next.grid.assign(prev.grid.begin() + 2, prev.grid.end() - 2);
    next.H.reserve(n - 4);
    double defect = 0.0;
    double deriv_err = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const Matrix d1 = (prev.P[i + 1] - prev.P[i - 1]) / (2.0 * s);
        const Matrix d2 = (prev.P[i + 2] - prev.P[i - 2]) / (4.0 * s);
        const Matrix dp = (4.0 * d1 - d2) / 3.0;
        deriv_err = std::max(deriv_err, max_abs(d1 - d2) / 3.0);
        Matrix h = model.at(next.grid[i - 2]) - ie * commutator(dp, prev.P[i]);
        defect = std::max(defect, operator_norm(h - prev.H[i]));
        next.H.push_back(std::move(h));
    }
    prev.defect_norm = defect;
    prev.derivative_error = deriv_err;
    fill_projectors(next);
    return next;
}

// Eighth-order Lagrange interpolation of matrix samples on a uniform grid.
class GridInterpolant {
public:
    GridInterpolant(const std::vector<double>& grid, const std::vector<Matrix>& values)
        : grid_(grid), values_(values) {
        if (grid_.size() < 8) throw DomainError("interpolation: grid needs at least 8 points");
    }

    Matrix operator()(double t) const {
        const double s = grid_[1] - grid_[0];
        const double x = (t - grid_.front()) / s;
        if (x < -1e-9 || x > static_cast<double>(grid_.size() - 1) + 1e-9) {
            std::ostringstream msg;
            msg << "interpolation: t = " << t << " outside [" << grid_.front() << ", " << grid_.back() << "]";
            throw DomainError(msg.str());
        }
        long k = static_cast<long>(std::floor(x)) - 3;
        k = std::clamp(k, 0L, static_cast<long>(grid_.size()) - 8);
        Matrix out = Matrix::Zero(values_[0].rows(), values_[0].cols());
        for (int a = 0; a < 8; ++a) {
            double w = 1.0;
            for (int b = 0; b < 8; ++b) {
                if (b != a) w *= (x - static_cast<double>(k + b)) / static_cast<double>(a - b);
            }
            out += w * values_[k + a];
        }
        return out;
    }

private:
    const std::vector<double>& grid_;
    const std::vector<Matrix>& values_;
};

// Inverse square root of a hermitian positive definite matrix.
Matrix inverse_sqrt(const Matrix& m) {
    const HermitianEigen eig = jacobi_eigen(m);
    Eigen::VectorXd d = eig.values;
    for (int i = 0; i < d.size(); ++i) d(i) = 1.0 / std::sqrt(d(i));
    return eig.vectors * d.asDiagonal() * eig.vectors.adjoint();
}

void check_window(double t0, double t1) {
    if (!(t1 > t0)) throw DomainError("superadiabatic: window needs t0 < t1");
}

}  // namespace

std::size_t SuperadiabaticLevel::index_of(double t) const {
    const double s = spacing();
    if (grid.empty() || s <= 0.0) throw DomainError("superadiabatic level: empty grid");
    const double x = (t - grid.front()) / s;
    const long k = std::lround(x);
    if (k < 0 || k >= static_cast<long>(grid.size()) || std::abs(grid[k] - t) > 1e-9 * std::max(1.0, s)) {
        std::ostringstream msg;
        msg << "superadiabatic level " << q << ": t = " << t << " is not a grid node";
        throw DomainError(msg.str());
    }
    return static_cast<std::size_t>(k);
}

std::vector<double> uniform_grid(double t0, double t1, double spacing, int margin) {
    check_window(t0, t1);
    if (!(spacing > 0.0) || margin < 0) throw DomainError("uniform_grid: bad spacing or margin");
    const long cells = std::max(1L, std::lround(std::ceil((t1 - t0) / spacing - 1e-9)));
    const double s = (t1 - t0) / static_cast<double>(cells);
    std::vector<double> grid;
    grid.reserve(cells + 1 + 2 * margin);
    for (long i = -margin; i <= cells + margin; ++i) grid.push_back(t0 + static_cast<double>(i) * s);
    grid[margin] = t0;
    grid[margin + cells] = t1;
    return grid;
}

int ladder_margin(int q_max) { return 2 * (q_max + 1) + 6; }

std::vector<SuperadiabaticLevel> build_ladder(const HamiltonianModel& model, double epsilon, int q_max,
                                              const std::vector<double>& grid, const LabelSet& labels) {
    if (!(epsilon > 0.0)) throw DomainError("build_level: epsilon must be positive");
    if (q_max < 0) throw DomainError("build_level: negative order");
    if (grid.size() < static_cast<std::size_t>(4 * (q_max + 1) + 1))
        throw DomainError("build_level: grid too short for the requested order");
    SuperadiabaticLevel base;
    base.q = 0;
    base.epsilon = epsilon;
    base.labels = resolve_labels(model, labels);
    base.grid = grid;
    base.H.reserve(grid.size());
    for (double t : grid) base.H.push_back(model.at(t));
    fill_projectors(base);
    std::vector<SuperadiabaticLevel> levels;
    levels.push_back(std::move(base));
    for (int q = 0; q <= q_max; ++q) levels.push_back(next_level(model, levels.back()));
    return levels;
}

SuperadiabaticLevel build_level(const HamiltonianModel& model, double epsilon, int q,
                                const std::vector<double>& grid, const LabelSet& labels) {
    auto levels = build_ladder(model, epsilon, q, grid, labels);
    return std::move(levels[q]);
}

double basis_transition(const SuperadiabaticLevel& level, const Matrix& u, double t0, double t1) {
    const Matrix& p0 = level.P[level.index_of(t0)];
    const Matrix& p1 = level.P[level.index_of(t1)];
    const Matrix q1 = Matrix::Identity(p1.rows(), p1.cols()) - p1;
    const double norm = operator_norm(q1 * u * p0);
    return norm * norm;
}

double superadiabatic_transition(const HamiltonianModel& model, double epsilon, int q, double t0,
                                 double t1, const SuperadiabaticOptions& options) {
    const auto grid = uniform_grid(t0, t1, options.spacing, ladder_margin(q));
    const SuperadiabaticLevel level = build_level(model, epsilon, q, grid, options.labels);
    const auto u = propagate(model, epsilon, t0, t1, options.propagate);
    return basis_transition(level, u.U, t0, t1);
}

TruncationResult optimal_truncation(const HamiltonianModel& model, double epsilon, int q_max, double t0,
                                    double t1, const SuperadiabaticOptions& options,
                                    TruncationCriterion criterion) {
    if (q_max < 1) throw DomainError("optimal_truncation: q_max must be at least 1");
    if (!(epsilon > 0.0)) throw DomainError("optimal_truncation: epsilon must be positive");
    const auto grid = uniform_grid(t0, t1, options.spacing, ladder_margin(q_max));

    // Built level by level so a gap closure at high order only truncates the ladder.
    std::vector<SuperadiabaticLevel> levels;
    {
        SuperadiabaticLevel base;
        base.epsilon = epsilon;
        base.labels = resolve_labels(model, options.labels);
        base.grid = grid;
        for (double t : grid) base.H.push_back(model.at(t));
        fill_projectors(base);
        levels.push_back(std::move(base));
    }
    TruncationResult out;
    out.criterion = criterion;
    out.defects.assign(q_max, std::numeric_limits<double>::infinity());
    for (int q = 0; q < q_max; ++q) {
        try {
            levels.push_back(next_level(model, levels.back()));
        } catch (const NumericalError&) {
            levels.back().defect_norm = std::numeric_limits<double>::infinity();
            break;
        }
        out.defects[q] = levels[q].defect_norm;
    }
    const int available = std::min<int>(q_max, static_cast<int>(levels.size()) - 1);

    std::vector<double> score = out.defects;
    if (criterion == TruncationCriterion::Transition) {
        const auto u = propagate(model, epsilon, t0, t1, options.propagate);
        out.transitions.assign(q_max, std::numeric_limits<double>::infinity());
        for (int q = 0; q < available; ++q) out.transitions[q] = basis_transition(levels[q], u.U, t0, t1);
        score = out.transitions;
    }
    out.q_star = static_cast<int>(std::min_element(score.begin(), score.end()) - score.begin());
    if (available < 2 || !(out.defects[1] < out.defects[0])) {
        out.warning = true;
        if (criterion == TruncationCriterion::Defect) out.q_star = 0;
    }
    out.level = std::move(levels[out.q_star]);
    return out;
}

IntertwiningReport verify_intertwining(const HamiltonianModel& model, double epsilon, int q, double t0,
                                       double t1, const SuperadiabaticOptions& options) {
    const auto grid = uniform_grid(t0, t1, options.spacing, ladder_margin(q));
    const auto levels = build_ladder(model, epsilon, q, grid, options.labels);
    const SuperadiabaticLevel& level = levels[q];
    const SuperadiabaticLevel& upper = levels[q + 1];

    // Generator H_q + i eps [P_q', P_q] = H + (H_q - H_{q+1}); only the correction is interpolated.
    std::vector<Matrix> correction;
    correction.reserve(upper.grid.size());
    const std::size_t shift = level.index_of(upper.grid.front());
    for (std::size_t i = 0; i < upper.grid.size(); ++i) correction.push_back(level.H[i + shift] - upper.H[i]);
    const GridInterpolant interp(upper.grid, correction);
    const Generator gen = [&model, &interp](double t) { return Matrix(model.at(t) + interp(t)); };

    const std::size_t i0 = level.index_of(t0);
    const std::size_t i1 = level.index_of(t1);
    const std::size_t stride = std::max<std::size_t>(1, (i1 - i0) / 100);
    IntertwiningReport report;
    report.V.U = Matrix::Identity(model.dimension, model.dimension);
    report.V.t0 = t0;
    report.V.t1 = t1;
    report.V.epsilon = epsilon;
    const Matrix& p0 = level.P[i0];
    std::size_t i = i0;
    while (i < i1) {
        const std::size_t j = std::min(i1, i + stride);
        const auto step = propagate_generator(gen, model.dimension, epsilon, level.grid[i], level.grid[j],
                                              options.propagate);
        report.V.U = step.U * report.V.U;
        report.V.step_count += step.step_count;
        report.V.error_estimate += step.error_estimate;
        report.defect = std::max(report.defect, operator_norm(report.V.U * p0 - level.P[j] * report.V.U));
        i = j;
    }
    report.V.unitarity_defect = unitarity_defect(report.V.U);
    report.V.intertwining_defect = report.defect;
    const auto u = propagate(model, epsilon, t0, t1, options.propagate);
    report.distance_to_true = operator_norm(report.V.U - u.U);
    return report;
}

EffectiveHamiltonian reduce_to_effective(const HamiltonianModel& model, double epsilon, int q, double t0,
                                         double t1, const SuperadiabaticOptions& options) {
    const auto grid = uniform_grid(t0, t1, options.spacing, ladder_margin(q));
    const auto levels = build_ladder(model, epsilon, q, grid, options.labels);
    const SuperadiabaticLevel& level = levels[q];
    const std::size_t i0 = level.index_of(t0);
    const std::size_t i1 = level.index_of(t1);

    EffectiveHamiltonian eff;
    eff.q = q;
    eff.epsilon = epsilon;
    Matrix frame;
    for (std::size_t i = i0; i <= i1; ++i) {
        const Matrix& p = level.P[i];
        const double trace = p.trace().real();
        const int rank = static_cast<int>(std::lround(trace));
        if (rank != 2 || std::abs(trace - 2.0) > 1e-8) {
            std::ostringstream msg;
            msg << "reduce_to_effective: rank of P_" << q << " is " << trace << " at t = " << level.grid[i]
                << ", need 2";
            throw DomainError(msg.str());
        }
        if (i == i0) {
            const HermitianEigen eig = jacobi_eigen(p);
            frame = eig.vectors.rightCols(2);
        } else {
            // Discrete parallel transport of the subspace: project, then polar-orthonormalize.
            const Matrix moved = p * frame;
            frame = moved * inverse_sqrt(moved.adjoint() * moved);
        }
        eff.grid.push_back(level.grid[i]);
        eff.frames.push_back(frame);
        eff.H_eff.push_back(frame.adjoint() * model.at(level.grid[i]) * frame);
    }
    return eff;
}

double effective_transition(const EffectiveHamiltonian& eff, int from, int to, const PropagateOptions& options) {
    if (eff.grid.size() < 8) throw DomainError("effective_transition: grid too short");
    const int r = static_cast<int>(eff.H_eff.front().rows());
    if (from < 1 || from > r || to < 1 || to > r) throw DomainError("effective_transition: label out of range");
    const GridInterpolant interp(eff.grid, eff.H_eff);
    const Generator gen = [&interp](double t) {
        const Matrix h = interp(t);
        return Matrix(0.5 * (h + h.adjoint()));
    };
    const auto w = propagate_generator(gen, r, eff.epsilon, eff.grid.front(), eff.grid.back(), options);
    const HermitianEigen start = jacobi_eigen(eff.H_eff.front());
    const HermitianEigen end = jacobi_eigen(eff.H_eff.back());
    return std::norm(end.vectors.col(to - 1).dot(w.U * start.vectors.col(from - 1)));
}

}  // namespace adiabatic
