#include "adiabatic/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace adiabatic {

int SpectralFrame::column_of(int label) const {
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (labels[c] == label) return static_cast<int>(c);
    throw DomainError("frame has no label " + std::to_string(label));
}

HermitianEigen jacobi_eigen(const Matrix& h) {
    const int n = static_cast<int>(h.rows());
    Matrix a = 0.5 * (h + h.adjoint());
    Matrix v = Matrix::Identity(n, n);
    const double scale = std::max(a.norm(), 1e-300);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= 1e-17 * scale) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r <= 1e-300) continue;
                const cplx phase = a(p, q) / r;  // a_pq = r e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // G = diag(1, e^{-i phi}) * [[c, s], [-s, c]] acting on (p, q).
                const cplx g_pp = c, g_pq = s;
                const cplx g_qp = -s * std::conj(phase), g_qq = c * std::conj(phase);
                for (int k = 0; k < n; ++k) {  // a <- a G, v <- v G
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * g_pp + akq * g_qp;
                    a(k, q) = akp * g_pq + akq * g_qq;
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * g_pp + vkq * g_qp;
                    v(k, q) = vkp * g_pq + vkq * g_qq;
                }
                for (int k = 0; k < n; ++k) {  // a <- G^dagger a
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
                    a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    HermitianEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int c = 0; c < n; ++c) {
        out.values(c) = a(order[c], order[c]).real();
        out.vectors.col(c) = v.col(order[c]);
    }
    return out;
}

Matrix unitary_exponential(const Matrix& h, double tau) {
    const cplx I{0.0, 1.0};
    if (h.rows() == 2) {
        const double a0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
        const double az = 0.5 * (h(0, 0).real() - h(1, 1).real());
        const cplx off = 0.5 * (h(1, 0) + std::conj(h(0, 1)));
        const double norm = std::sqrt(az * az + std::norm(off));
        const double phi = tau * norm;
        const double sinc = norm * tau > 1e-8 ? std::sin(phi) / norm : tau * (1.0 - phi * phi / 6.0);
        const cplx g = std::exp(-I * (tau * a0));
        const double c = std::cos(phi);
        Matrix u(2, 2);
        u(0, 0) = g * (c - I * sinc * az);
        u(1, 1) = g * (c + I * sinc * az);
        u(1, 0) = g * (-I * sinc * off);
        u(0, 1) = g * (-I * sinc * std::conj(off));
        return u;
    }
    const HermitianEigen eig = jacobi_eigen(h);
    Vector phases(eig.values.size());
    for (int k = 0; k < eig.values.size(); ++k) phases(k) = std::exp(-I * (tau * eig.values(k)));
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

namespace {

void apply_phase_convention(Matrix& vectors) {
    for (int c = 0; c < vectors.cols(); ++c) {
        double best = 0.0;
        for (int r = 0; r < vectors.rows(); ++r) best = std::max(best, std::abs(vectors(r, c)));
        int pick = 0;
        for (int r = 0; r < vectors.rows(); ++r) {
            if (std::abs(vectors(r, c)) >= best * (1.0 - 1e-10)) {
                pick = r;
                break;
            }
        }
        const cplx entry = vectors(pick, c);
        vectors.col(c) *= std::conj(entry) / std::abs(entry);
        vectors(pick, c) = std::abs(vectors(pick, c));
    }
}

bool is_hermitian_step(const SpectralFrame& prev, const Matrix& h, cplx point) {
    return prev.point.imag() == 0.0 && point.imag() == 0.0 &&
           hermiticity_defect(h) <= 1e-12 * std::max(1.0, max_abs(h));
}

/// Rescales column c of `next` (and its left vector) so that the pair
/// (prev, next) satisfies the symmetric discrete transport condition
/// l_prev^T r_next == l_next^T r_prev, with the factor closest to continuity.
void transport_column(const SpectralFrame& prev, SpectralFrame& next, int c) {
    const cplx a = next.left.col(c).transpose() * prev.vectors.col(c);
    const cplx b = prev.left.col(c).transpose() * next.vectors.col(c);
    cplx s = std::sqrt(a / b);
    if (std::abs(s * b - 1.0) > std::abs(-s * b - 1.0)) s = -s;
    next.vectors.col(c) *= s;
    next.left.col(c) /= s;
}

SpectralFrame continue_hermitian(const SpectralFrame& prev, const Matrix& h, cplx point) {
    SpectralFrame fresh = eigen_frame(h, point);
    const int n = fresh.dimension();
    const Matrix overlaps = prev.vectors.adjoint() * fresh.vectors;
    SpectralFrame out;
    out.point = point;
    out.eigenvalues.resize(n);
    out.vectors.resize(n, n);
    out.labels = prev.labels;
    std::vector<bool> used(n, false);
    double quality = 1.0;
    for (int i = 0; i < n; ++i) {
        int best = -1;
        double best_ov = -1.0, second = -1.0;
        for (int j = 0; j < n; ++j) {
            const double ov = std::abs(overlaps(i, j));
            if (ov > best_ov) {
                second = best_ov;
                best_ov = ov;
                best = j;
            } else if (ov > second) {
                second = ov;
            }
        }
        if (best_ov - second < 1e-6 || used[best]) {
            std::ostringstream msg;
            msg << "continue_frame: ambiguous matching for label " << prev.labels[i]
                << " at t = " << point.real() << " (overlaps " << best_ov << ", " << second
                << "); step too large near a crossing";
            throw NumericalError(msg.str());
        }
        used[best] = true;
        quality = std::min(quality, best_ov);
        out.eigenvalues(i) = fresh.eigenvalues(best);
        out.vectors.col(i) = fresh.vectors.col(best);
    }
    // Transport rather than plain rephasing: a vector continued around a loop may
    // return to the real axis with a non-unit scale, which must be carried along.
    out.left = out.vectors.conjugate();
    for (int c = 0; c < n; ++c) transport_column(prev, out, c);
    out.match_quality = quality;
    return out;
}

SpectralFrame continue_newton(const SpectralFrame& prev, const Matrix& h, cplx point) {
    const int n = prev.dimension();
    const double scale = std::max(1.0, max_abs(h));
    SpectralFrame out;
    out.point = point;
    out.labels = prev.labels;
    out.eigenvalues.resize(n);
    out.vectors.resize(n, n);
    double quality = 1.0;
    for (int c = 0; c < n; ++c) {
        const Vector r0 = prev.vectors.col(c);
        const Vector norm_row = r0.conjugate() / r0.squaredNorm();
        Vector r = r0;
        cplx e = prev.eigenvalues(c);
        bool converged = false;
        for (int it = 0; it < 40; ++it) {
            Matrix jac(n + 1, n + 1);
            jac.topLeftCorner(n, n) = h - e * Matrix::Identity(n, n);
            jac.topRightCorner(n, 1) = -r;
            jac.bottomLeftCorner(1, n) = norm_row.transpose();
            jac(n, n) = 0.0;
            Vector rhs(n + 1);
            rhs.head(n) = -(h * r - e * r);
            rhs(n) = 1.0 - cplx(norm_row.transpose() * r);
            const Vector step = jac.fullPivLu().solve(rhs);
            if (!step.allFinite()) break;
            r += step.head(n);
            e += step(n);
            if (step.norm() <= 1e-15 * (1.0 + r.norm()) ||
                (h * r - e * r).norm() <= 1e-15 * scale * r.norm()) {
                converged = true;
                break;
            }
            if (it > 12 && step.norm() > 1e-2 * r.norm()) break;
        }
        if (!converged && (h * r - e * r).norm() > 1e-12 * scale * r.norm()) {
            std::ostringstream msg;
            msg << "continue_frame: Newton failed for label " << prev.labels[c] << " at z = "
                << point;
            throw NumericalError(msg.str());
        }
        out.eigenvalues(c) = e;
        out.vectors.col(c) = r;
        quality = std::min(quality, std::abs(cplx(r0.adjoint() * r)) / (r0.norm() * r.norm()));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double cosang = std::abs(cplx(out.vectors.col(i).adjoint() * out.vectors.col(j))) /
                                  (out.vectors.col(i).norm() * out.vectors.col(j).norm());
            if (std::abs(out.eigenvalues(i) - out.eigenvalues(j)) < 1e-9 * scale ||
                cosang > 1.0 - 1e-9) {
                std::ostringstream msg;
                msg << "continue_frame: labels " << prev.labels[i] << " and " << prev.labels[j]
                    << " collided at z = " << point << "; step too large near a crossing";
                throw NumericalError(msg.str());
            }
        }
    }
    out.left = out.vectors.inverse().transpose();
    for (int c = 0; c < n; ++c) transport_column(prev, out, c);
    out.match_quality = quality;
    return out;
}

}  // namespace

SpectralFrame eigen_frame(const Matrix& h, cplx point) {
    const double defect = hermiticity_defect(h);
    if (defect > 1e-12 * std::max(1.0, max_abs(h))) {
        std::ostringstream msg;
        msg << "eigen_frame: matrix not hermitian (defect " << defect << ")";
        throw DomainError(msg.str());
    }
    HermitianEigen eig = jacobi_eigen(h);
    apply_phase_convention(eig.vectors);
    SpectralFrame f;
    f.point = point;
    f.eigenvalues = eig.values.cast<cplx>();
    f.vectors = std::move(eig.vectors);
    f.left = f.vectors.conjugate();
    f.labels.resize(h.rows());
    std::iota(f.labels.begin(), f.labels.end(), 1);
    return f;
}

SpectralFrame continue_frame(const SpectralFrame& prev, const Matrix& h_next, cplx point) {
    if (is_hermitian_step(prev, h_next, point)) return continue_hermitian(prev, h_next, point);
    return continue_newton(prev, h_next, point);
}

std::vector<SpectralFrame> gauge_transport(std::vector<SpectralFrame> frames) {
    for (std::size_t k = 1; k < frames.size(); ++k)
        for (int c = 0; c < frames[k].dimension(); ++c) transport_column(frames[k - 1], frames[k], c);
    return frames;
}

namespace {

SpectralFrame continue_adaptive(const HamiltonianModel& model, const SpectralFrame& prev, cplx target,
                                int depth) {
    try {
        SpectralFrame next = continue_frame(prev, model.evaluate(target), target);
        if (next.match_quality >= 0.75) return next;
        if (depth >= 40) return next;
    } catch (const NumericalError&) {
        if (depth >= 40) throw;
    }
    const cplx mid = 0.5 * (prev.point + target);
    const SpectralFrame half = continue_adaptive(model, prev, mid, depth + 1);
    return continue_adaptive(model, half, target, depth + 1);
}

}  // namespace

std::vector<SpectralFrame> track_frames(const HamiltonianModel& model, const std::vector<cplx>& samples,
                                        const SpectralFrame* start) {
    std::vector<SpectralFrame> out;
    if (samples.empty()) return out;
    out.reserve(samples.size());
    if (start) {
        out.push_back(*start);
    } else {
        const double t = samples.front().real();
        SpectralFrame f = eigen_frame(model.at(t), cplx(t, 0.0));
        const int steps = 64;
        for (int k = 1; k <= steps && samples.front().imag() != 0.0; ++k) {
            const cplx z(t, samples.front().imag() * k / steps);
            f = continue_adaptive(model, f, z, 0);
        }
        out.push_back(std::move(f));
    }
    for (std::size_t k = 1; k < samples.size(); ++k)
        out.push_back(continue_adaptive(model, out.back(), samples[k], 0));
    return out;
}

Projector spectral_projector(const SpectralFrame& frame, const LabelSet& labels) {
    if (labels.empty()) throw DomainError("spectral_projector: empty label set");
    const int n = frame.dimension();
    Projector p;
    p.matrix = Matrix::Zero(n, n);
    for (int label : labels) {
        if (label < 1 || label > n) throw DomainError("spectral_projector: label out of range");
        const int c = frame.column_of(label);
        p.matrix += frame.vectors.col(c) * frame.left.col(c).transpose();
    }
    p.rank = static_cast<int>(labels.size());
    return p;
}

ProjectorDerivative projector_derivative(const HamiltonianModel& model, double t,
                                         const LabelSet& labels, double h) {
    const SpectralFrame centre = eigen_frame(model.at(t), cplx(t, 0.0));
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= centre.dimension(); ++i) {
        const bool in_i = std::find(labels.begin(), labels.end(), i) != labels.end();
        for (int j = 1; j <= centre.dimension(); ++j) {
            const bool in_j = std::find(labels.begin(), labels.end(), j) != labels.end();
            if (in_i && !in_j)
                gap = std::min(gap, std::abs(centre.eigenvalue(i) - centre.eigenvalue(j)));
        }
    }
    if (h <= 0.0) h = 1e-3 * std::min(1.0, gap);
    auto proj = [&](double s) {
        return spectral_projector(eigen_frame(model.at(s), cplx(s, 0.0)), labels).matrix;
    };
    const Matrix d_full = (proj(t + h) - proj(t - h)) / (2.0 * h);
    const Matrix d_half = (proj(t + 0.5 * h) - proj(t - 0.5 * h)) / h;
    ProjectorDerivative out;
    out.value = (4.0 * d_half - d_full) / 3.0;
    out.step = h;
    const double spread = max_abs(d_half - d_full);
    out.error_estimate = spread / 3.0;
    if (spread > 1e-6 * std::max(1.0, max_abs(out.value))) {
        std::ostringstream msg;
        msg << "projector_derivative: Richardson estimates disagree by " << spread << " at t = " << t
            << "; near-degenerate spectrum";
        throw NumericalError(msg.str());
    }
    return out;
}

std::vector<int> label_permutation(const SpectralFrame& frame, const Matrix& h_end) {
    const HermitianEigen fresh = jacobi_eigen(h_end);
    const int n = frame.dimension();
    std::vector<int> perm(n, 0);
    for (int c = 0; c < n; ++c) {
        int best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            const double d = std::abs(frame.eigenvalues(c) - fresh.values(k));
            if (d < dist) {
                dist = d;
                best = k;
            }
        }
        perm[frame.labels[c] - 1] = best + 1;
    }
    return perm;
}

}  // namespace adiabatic
