#include "adiabatic/complexplane.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace adiabatic {

std::vector<cplx> ContourPath::sample(double per_unit, int level) const {
    std::vector<cplx> out;
    if (vertices.empty()) return out;
    out.push_back(vertices.front());
    const double factor = std::ldexp(1.0, level);
    for (std::size_t e = 0; e + 1 < vertices.size(); ++e) {
        const cplx a = vertices[e];
        const cplx b = vertices[e + 1];
        const double len = std::abs(b - a);
        if (len == 0.0) continue;
        const long pieces =
            std::max(1L, static_cast<long>(std::ceil(len * per_unit - 1e-9))) * static_cast<long>(factor);
        for (long k = 1; k <= pieces; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
        out.back() = b;
    }
    return out;
}

double ContourPath::length() const {
    double len = 0.0;
    for (std::size_t e = 0; e + 1 < vertices.size(); ++e) len += std::abs(vertices[e + 1] - vertices[e]);
    return len;
}

ContourPath ContourPath::conjugated() const {
    ContourPath out = *this;
    for (cplx& v : out.vertices) v = std::conj(v);
    out.base = std::conj(base);
    out.orientation = -orientation;
    return out;
}

ContourPath ContourPath::repeated(int turns) const {
    if (!closed) throw DomainError("repeated: path is not closed");
    if (turns < 1) throw DomainError("repeated: turns must be positive");
    ContourPath out = *this;
    for (int k = 1; k < turns; ++k) out.vertices.insert(out.vertices.end(), vertices.begin() + 1, vertices.end());
    return out;
}

ContourPath rectangle_loop(double base, double half_width, double height) {
    if (!(half_width > 0.0) || !(height > 0.0)) throw DomainError("rectangle_loop: need positive sizes");
    ContourPath p;
    const cplx b(base, 0.0);
    const cplx up(0.0, height);
    p.vertices = {b, b - half_width, b - half_width + up, b + half_width + up, b + half_width, b};
    p.closed = true;
    p.orientation = -1;
    p.base = b;
    return p;
}

ContourPath polyline(const std::vector<cplx>& points) {
    if (points.size() < 2) throw DomainError("polyline: need at least two points");
    ContourPath p;
    p.vertices = points;
    p.base = points.front();
    return p;
}

void check_in_strip(const HamiltonianModel& model, const ContourPath& path) {
    for (const cplx& v : path.vertices) {
        if (!model.in_strip(v)) {
            std::ostringstream msg;
            msg << model.name << ": path point " << v << " outside the strip |Im z| < " << model.strip_halfwidth;
            throw DomainError(msg.str());
        }
    }
}

PairDiscriminant::PairDiscriminant(const HamiltonianModel& model, std::pair<int, int> pair, cplx start)
    : model_(model), pair_(pair) {
    const int n = model.dimension;
    if (pair.first < 1 || pair.first > n || pair.second < 1 || pair.second > n || pair.first == pair.second)
        throw DomainError("pair discriminant: bad label pair");
    const auto frames = track_frames(model, {start});
    const SpectralFrame& f = frames.front();
    for (int l = 1; l <= n; ++l) {
        if (l != pair.first && l != pair.second) others_.push_back(f.eigenvalue(l));
    }
    last_difference_ = f.eigenvalue(pair.first) - f.eigenvalue(pair.second);
}

cplx PairDiscriminant::operator()(cplx z) {
    const Matrix h = model_.evaluate(z);
    if (h.rows() == 2) {
        const cplx tr = h(0, 0) + h(1, 1);
        const cplx det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
        return tr * tr - 4.0 * det;
    }
    Eigen::ComplexEigenSolver<Matrix> solver(h, false);
    std::vector<cplx> values(solver.eigenvalues().data(), solver.eigenvalues().data() + h.rows());
    std::vector<bool> used(values.size(), false);
    for (cplx& o : others_) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!used[i] && std::abs(values[i] - o) < dist) {
                dist = std::abs(values[i] - o);
                best = i;
            }
        }
        used[best] = true;
        o = values[best];
    }
    cplx rest[2];
    int k = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!used[i]) rest[k++] = values[i];
    }
    const cplx d = rest[0] - rest[1];
    return d * d;
}

cplx PairDiscriminant::derivative(cplx z, double h) {
    return ((*this)(z + h) - (*this)(z - h)) / (2.0 * h);
}

cplx PairDiscriminant::difference(cplx z) {
    const cplx f = std::sqrt((*this)(z));
    last_difference_ = std::abs(f - last_difference_) <= std::abs(f + last_difference_) ? f : -f;
    return last_difference_;
}

CrossingPoint find_crossing(const HamiltonianModel& model, std::pair<int, int> pair, cplx seed) {
    if (!model.in_strip(seed) || !(seed.imag() > 0.0)) {
        std::ostringstream msg;
        msg << "find_crossing: seed " << seed << " not in the upper strip";
        throw DomainError(msg.str());
    }
    PairDiscriminant disc(model, pair, seed);
    CrossingPoint cp;
    cp.pair = pair;
    cplx z = seed;
    bool converged = false;
    for (int it = 1; it <= 50; ++it) {
        const cplx g = disc(z);
        const cplx dg = disc.derivative(z, 1e-5 * std::max(1.0, std::abs(z)));
        const cplx step = g / dg;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        z -= step;
        cp.iterations = it;
        cp.step_history.push_back(std::abs(step));
        if (!model.in_strip(z)) {
            std::ostringstream msg;
            msg << "find_crossing: iterate " << z << " left the strip |Im z| < " << model.strip_halfwidth;
            throw DomainError(msg.str());
        }
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) {
            converged = true;
            break;
        }
    }
    cp.location = z;
    cp.residual = std::abs(disc(z));
    if (!converged || cp.residual > 1e-12) {
        std::ostringstream msg;
        msg << "find_crossing: no convergence from seed " << seed << "; last iterate " << z << " with |gap^2| "
            << cp.residual;
        throw NumericalError(msg.str());
    }
    // Leading exponent of |gap^2| from circles of radius 1e-3 .. 8e-3.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int radii = 4, points = 16;
    for (int m = 0; m < radii; ++m) {
        const double r = 1e-3 * std::ldexp(1.0, m);
        double mean = 0.0;
        for (int k = 0; k < points; ++k) {
            const double phi = 2.0 * std::numbers::pi * (k + 0.5) / points;
            mean += std::abs(disc(z + std::polar(r, phi)));
        }
        const double x = std::log(r), y = std::log(mean / points);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    cp.order_check = (radii * sxy - sx * sy) / (radii * sxx - sx * sx);
    return cp;
}

std::vector<CrossingPoint> find_crossings(const HamiltonianModel& model, std::pair<int, int> pair, double reach) {
    std::vector<CrossingPoint> found;
    const double heights[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    for (double x = -reach; x <= reach + 1e-12; x += 0.5) {
        for (double hfrac : heights) {
            const cplx seed(x, hfrac * model.strip_halfwidth);
            try {
                CrossingPoint cp = find_crossing(model, pair, seed);
                if (!(cp.location.imag() > 0.0)) continue;
                const bool dup = std::any_of(found.begin(), found.end(), [&](const CrossingPoint& c) {
                    return std::abs(c.location - cp.location) < 1e-6;
                });
                if (!dup) found.push_back(std::move(cp));
            } catch (const Error&) {
            }
        }
    }
    std::sort(found.begin(), found.end(),
              [](const CrossingPoint& a, const CrossingPoint& b) { return a.location.real() < b.location.real(); });
    return found;
}

ContourPath loop_around(const HamiltonianModel& model, const CrossingPoint& crossing, double half_width,
                        double margin) {
    const double height = crossing.location.imag() + margin;
    ContourPath loop = rectangle_loop(crossing.location.real(), half_width, height);
    check_in_strip(model, loop);
    return loop;
}

namespace {

// Romberg extrapolation of a sequence with an error expansion in even powers of h.
struct Romberg {
    std::vector<std::vector<cplx>> table;

    cplx add(cplx value) {
        std::vector<cplx> row{value};
        if (!table.empty()) {
            const auto& prev = table.back();
            double factor = 4.0;
            for (std::size_t m = 0; m < prev.size(); ++m) {
                row.push_back(row[m] + (row[m] - prev[m]) / (factor - 1.0));
                factor *= 4.0;
            }
        }
        table.push_back(std::move(row));
        return table.back().back();
    }

    double change() const {
        if (table.size() < 2) return std::numeric_limits<double>::infinity();
        return std::abs(table.back().back() - table[table.size() - 2].back());
    }
};

void require_loop(const HamiltonianModel& model, const ContourPath& loop) {
    if (!loop.closed || loop.vertices.size() < 3 || std::abs(loop.vertices.front() - loop.vertices.back()) > 1e-14)
        throw DomainError("loop: path is not closed");
    if (loop.vertices.front().imag() != 0.0) throw DomainError("loop: base must lie on the real axis");
    check_in_strip(model, loop);
}

int partner_label(const SpectralFrame& start, const SpectralFrame& end, int label) {
    const cplx e = end.eigenvalue(label);
    int partner = label;
    double best = std::numeric_limits<double>::infinity();
    for (int l : start.labels) {
        const double d = std::abs(start.eigenvalue(l) - e);
        if (d < best) {
            best = d;
            partner = l;
        }
    }
    return partner;
}

}  // namespace

LoopIntegral loop_integral(const HamiltonianModel& model, const ContourPath& loop, int label,
                           const QuadratureOptions& options) {
    require_loop(model, loop);
    if (label < 1 || label > model.dimension) throw DomainError("loop_integral: label out of range");
    LoopIntegral out;
    Romberg romberg;
    for (int level = 0; level <= options.max_levels; ++level) {
        const std::vector<cplx> pts = loop.sample(options.per_unit, level);
        const auto frames = track_frames(model, pts);
        cplx sum = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            sum += 0.5 * (frames[k].eigenvalue(label) + frames[k + 1].eigenvalue(label)) * (pts[k + 1] - pts[k]);
        out.value = romberg.add(sum);
        out.levels = level;
        out.samples = pts.size();
        out.partner = partner_label(frames.front(), frames.back(), label);
        out.exchanged = out.partner != label;
        out.error_estimate = romberg.change();
        if (level >= 2 && out.error_estimate <= options.relative_tolerance * std::abs(out.value) + 1e-13) return out;
    }
    std::ostringstream msg;
    msg << "loop_integral: no convergence after " << options.max_levels << " doublings (change "
        << out.error_estimate << ")";
    throw NumericalError(msg.str());
}

GeometricPrefactor geometric_prefactor(const HamiltonianModel& model, const ContourPath& loop, int label,
                                       const QuadratureOptions& options) {
    require_loop(model, loop);
    if (label < 1 || label > model.dimension) throw DomainError("geometric_prefactor: label out of range");
    GeometricPrefactor out;
    Romberg romberg;
    double prev_arg = 0.0;
    for (int level = 0; level <= options.max_levels; ++level) {
        const std::vector<cplx> pts = loop.sample(options.per_unit, level);
        const auto frames = track_frames(model, pts);
        const SpectralFrame& start = frames.front();
        const SpectralFrame& end = frames.back();
        const int partner = partner_label(start, end, label);
        if (partner == label) {
            throw DomainError("geometric_prefactor: no branch exchange around the loop for label " +
                              std::to_string(label));
        }
        const Vector r = end.vector(label);
        const Vector phi = start.vector(partner);
        const cplx ov = phi.dot(r);
        out.complement_defect = (r - phi * ov).norm() / r.norm();
        if (out.complement_defect > 1e-6) {
            std::ostringstream msg;
            msg << "geometric_prefactor: continued vector not proportional to phi_" << partner
                << " (orthogonal part " << out.complement_defect << ")";
            throw NumericalError(msg.str());
        }
        // ln(overlap) with the argument unwrapped across refinements.
        double arg = std::arg(ov);
        if (level > 0) arg += 2.0 * std::numbers::pi * std::round((prev_arg - arg) / (2.0 * std::numbers::pi));
        prev_arg = arg;
        const cplx log_ov = romberg.add(cplx(std::log(std::abs(ov)), arg));
        out.partner = partner;
        out.levels = level;
        out.error_estimate = romberg.change();
        out.overlap = std::exp(log_ov);
        const double re = std::remainder(-log_ov.imag(), 2.0 * std::numbers::pi);
        out.theta = cplx(re <= -std::numbers::pi ? re + 2.0 * std::numbers::pi : re, log_ov.real());
        if (level >= 2 && out.error_estimate <= 1e-10) return out;
    }
    std::ostringstream msg;
    msg << "geometric_prefactor: no convergence after " << options.max_levels << " doublings (change "
        << out.error_estimate << ")";
    throw NumericalError(msg.str());
}

namespace {

// int_{zc}^{z} f for a piece starting on a branch point of f = sqrt(D): the substitution
// z = zc + s^2 (z - zc) makes the integrand smooth, so 8-point Gauss-Legendre suffices.
cplx branch_piece(PairDiscriminant& disc, cplx zc, cplx z, cplx fz) {
    static const double nodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                    0.9602898564975363};
    static const double weights[4] = {0.3626837833783620, 0.3137066813151582, 0.2223810344533745,
                                      0.1012285362903763};
    const cplx w = z - zc;
    cplx sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (double sign : {-1.0, 1.0}) {
            const double s = 0.5 * (1.0 + sign * nodes[i]);
            cplx f = std::sqrt(disc(zc + s * s * w));
            if (std::abs(f - s * fz) > std::abs(f + s * fz)) f = -f;
            sum += 0.5 * weights[i] * f * 2.0 * s * w;
        }
    }
    return sum;
}

}  // namespace

DissipativityReport dissipativity_check(const HamiltonianModel& model, const ContourPath& path,
                                        std::pair<int, int> pair, double per_unit) {
    check_in_strip(model, path);
    DissipativityReport rep;
    rep.samples = path.sample(per_unit);
    PairDiscriminant disc(model, pair, rep.samples.front());
    cplx fa = disc.difference(rep.samples.front());
    double cumulative = 0.0;
    rep.cumulative.push_back(0.0);
    for (std::size_t k = 0; k + 1 < rep.samples.size(); ++k) {
        const cplx a = rep.samples[k], b = rep.samples[k + 1];
        const cplx fm = disc.difference(0.5 * (a + b));
        const cplx fb = disc.difference(b);
        // A piece ending on the crossing itself is integrated with the local form f ~ sqrt(z - z_c).
        double inc;
        if (std::abs(fa) < 1e-3 * std::abs(fm))
            inc = branch_piece(disc, a, b, fb).imag();
        else if (std::abs(fb) < 1e-3 * std::abs(fm))
            inc = -branch_piece(disc, b, a, fa).imag();
        else
            inc = ((b - a) / 6.0 * (fa + 4.0 * fm + fb)).imag();
        cumulative += inc;
        rep.cumulative.push_back(cumulative);
        rep.max_violation = std::min(rep.max_violation, inc);
        fa = fb;
    }
    rep.dissipative = rep.max_violation >= -1e-10;
    return rep;
}

namespace {

// Follows one ray of the level line Im F = 0, F(z) = int_{z0}^z f, f = e_j - e_k.
std::vector<cplx> trace_ray(const HamiltonianModel& model, PairDiscriminant& disc, cplx z0, cplx slope2,
                            double theta, double reach) {
    cplx f_last = std::sqrt(slope2 * std::polar(1e-3, theta));
    auto f_at = [&](cplx z) {
        const cplx f = std::sqrt(disc(z));
        f_last = std::abs(f - f_last) <= std::abs(f + f_last) ? f : -f;
        return f_last;
    };
    cplx z = z0 + std::polar(1e-3, theta);
    cplx f = f_at(z);
    const double sigma = (std::conj(f) * std::polar(1.0, -theta)).real() >= 0.0 ? 1.0 : -1.0;
    // Move the first point onto Im F = 0; the local angle is exact only to leading order.
    cplx F = branch_piece(disc, z0, z, f);
    for (int corr = 0; corr < 3; ++corr) {
        z += -F.imag() / std::abs(f) * cplx(0.0, 1.0) * std::conj(f) / std::abs(f);
        f = f_at(z);
        F = branch_piece(disc, z0, z, f);
    }
    std::vector<cplx> ray{z};
    const double target = std::cos(theta) < 0.0 ? -1.0 : 1.0;
    for (int step = 0; step < 200000; ++step) {
        if (target * z.real() >= reach) break;
        const double ds = std::min(0.01, 0.25 * std::abs(z - z0));
        auto dir = [&](cplx w) {
            const cplx fw = f_at(w);
            return sigma * std::conj(fw) / std::abs(fw);
        };
        const cplx f_start = f_last;
        const cplx k1 = dir(z);
        const cplx k2 = dir(z + 0.5 * ds * k1);
        const cplx k3 = dir(z + 0.5 * ds * k2);
        const cplx k4 = dir(z + ds * k3);
        cplx next = z + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Project back onto Im F = 0 along the normal direction.
        cplx F_next = F;
        for (int corr = 0; corr < 3; ++corr) {
            f_last = f_start;
            const cplx fa = f_at(z);
            const cplx fm = f_at(0.5 * (z + next));
            const cplx fb = f_at(next);
            F_next = F + (next - z) / 6.0 * (fa + 4.0 * fm + fb);
            const double mu = -F_next.imag() / std::abs(fb);
            next += mu * cplx(0.0, 1.0) * std::conj(fb) / std::abs(fb);
        }
        f_last = f_start;
        {
            const cplx fa = f_at(z);
            const cplx fm = f_at(0.5 * (z + next));
            const cplx fb = f_at(next);
            F += (next - z) / 6.0 * (fa + 4.0 * fm + fb);
        }
        z = next;
        if (!model.in_strip(z)) {
            std::ostringstream msg;
            msg << "level_line_path: ray leaves the strip at " << z;
            throw NumericalError(msg.str());
        }
        ray.push_back(z);
    }
    if (target * z.real() < reach)
        throw NumericalError("level_line_path: ray did not reach the requested real part");
    return ray;
}

}  // namespace

ContourPath level_line_path(const HamiltonianModel& model, const CrossingPoint& crossing, double reach) {
    const cplx z0 = crossing.location;
    if (!(reach > std::abs(z0.real()))) throw DomainError("level_line_path: reach must exceed |Re z0|");
    PairDiscriminant disc(model, crossing.pair, cplx(z0.real(), 0.5 * z0.imag()));
    const cplx slope2 = disc.derivative(z0, 1e-4);
    const double a = std::arg(std::sqrt(slope2));
    double left = 0.0, right = 0.0, cmin = 2.0, cmax = -2.0;
    for (int m = 0; m < 3; ++m) {
        const double theta = (2.0 / 3.0) * (m * std::numbers::pi - a);
        if (std::cos(theta) < cmin) {
            cmin = std::cos(theta);
            left = theta;
        }
        if (std::cos(theta) > cmax) {
            cmax = std::cos(theta);
            right = theta;
        }
    }
    std::vector<cplx> lpts = trace_ray(model, disc, z0, slope2, left, reach);
    std::vector<cplx> rpts = trace_ray(model, disc, z0, slope2, right, reach);
    std::vector<cplx> pts(lpts.rbegin(), lpts.rend());
    pts.push_back(z0);
    pts.insert(pts.end(), rpts.begin(), rpts.end());
    return polyline(pts);
}

}  // namespace adiabatic
