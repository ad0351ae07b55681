#pragma once

#include <utility>
#include <vector>

#include "adiabatic/models.hpp"
#include "adiabatic/spectral.hpp"
#include "adiabatic/types.hpp"

namespace adiabatic {

/// Polygonal path in the complex time strip.
///
/// Paths are stored by their corners so they can be resampled at any density;
/// `sample(per_unit, level)` splits every edge into max(1, ceil(len * per_unit)) * 2^level
/// equal pieces. Closed paths repeat their first vertex at the end.
struct ContourPath {
    std::vector<cplx> vertices;
    bool closed = false;
    /// -1 clockwise, +1 counterclockwise, 0 for open paths.
    int orientation = 0;
    cplx base{0.0, 0.0};

    std::vector<cplx> sample(double per_unit, int level = 0) const;
    double length() const;
    /// Reflection through the real axis (orientation flips).
    ContourPath conjugated() const;
    /// The loop traversed `turns` times.
    ContourPath repeated(int turns) const;
};

/// Clockwise rectangle based at the real point `base`:
/// base -> base - half_width -> ... + i height -> base + half_width + i height -> base + half_width -> base.
ContourPath rectangle_loop(double base, double half_width, double height);

/// Open polyline through `points`.
ContourPath polyline(const std::vector<cplx>& points);

/// Throws DomainError if a sample of `path` leaves the strip of `model`.
void check_in_strip(const HamiltonianModel& model, const ContourPath& path);

/// Analytic discriminant (e_j - e_k)^2 of an eigenvalue pair.
///
/// For n = 2 this is tr^2 - 4 det. For n > 2 the other eigenvalues are followed by
/// continuity and divided out of the trace and determinant, which keeps the result
/// analytic across the pair's branch point.
class PairDiscriminant {
public:
    /// Labels the pair at `start` by continuation from the real axis.
    PairDiscriminant(const HamiltonianModel& model, std::pair<int, int> pair, cplx start);
    cplx operator()(cplx z);
    /// Central-difference derivative with step h.
    cplx derivative(cplx z, double h = 1e-5);
    /// Current value of e_j - e_k, continued by sign continuity from the previous call.
    cplx difference(cplx z);

private:
    const HamiltonianModel& model_;
    std::pair<int, int> pair_;
    std::vector<cplx> others_;
    cplx last_difference_{0.0, 0.0};
};

struct CrossingPoint {
    cplx location{0.0, 0.0};
    std::pair<int, int> pair{1, 2};
    /// Leading exponent of |gap^2| on small circles around the crossing (1 for a generic crossing).
    double order_check = 0.0;
    double residual = 0.0;
    int iterations = 0;
    /// |Newton step| per iteration.
    std::vector<double> step_history;
};

/// Newton iteration on the pair discriminant from `seed` (upper strip).
/// Throws NumericalError after 50 iterations and DomainError when an iterate leaves the strip.
CrossingPoint find_crossing(const HamiltonianModel& model, std::pair<int, int> pair, cplx seed);

/// Distinct crossings of `pair` in the upper strip over Re z in [-reach, reach],
/// found from a grid of seeds; sorted by real part.
std::vector<CrossingPoint> find_crossings(const HamiltonianModel& model, std::pair<int, int> pair,
                                          double reach = 4.0);

/// Rectangle around a crossing: base Re z0, top margin above z0, given half width.
ContourPath loop_around(const HamiltonianModel& model, const CrossingPoint& crossing, double half_width = 1.0,
                        double margin = 0.25);

struct QuadratureOptions {
    double per_unit = 16.0;
    int max_levels = 10;
    double relative_tolerance = 1e-8;
};

struct LoopIntegral {
    cplx value{0.0, 0.0};
    /// True when continuation around the loop moves `label` onto another eigenvalue.
    bool exchanged = false;
    /// Label whose starting eigenvalue the continued branch ends on.
    int partner = 0;
    int levels = 0;
    std::size_t samples = 0;
    double error_estimate = 0.0;
};

/// Integral of the continued eigenvalue e_label(z) along `loop`, by trapezoid rule
/// with Romberg extrapolation under sample doubling. A loop without branch exchange
/// is reported through `exchanged`, not rejected.
LoopIntegral loop_integral(const HamiltonianModel& model, const ContourPath& loop, int label,
                           const QuadratureOptions& options = {});

struct GeometricPrefactor {
    /// theta with Re theta in (-pi, pi].
    cplx theta{0.0, 0.0};
    /// <phi_partner(base) | phi_label(base | loop)> = exp(-i theta).
    cplx overlap{1.0, 0.0};
    int partner = 0;
    /// |component of the continued vector orthogonal to phi_partner| / |vector|.
    double complement_defect = 0.0;
    int levels = 0;
    double error_estimate = 0.0;
    double im_theta() const { return theta.imag(); }
};

/// Continues phi_label around `loop` with discrete analytic parallel transport and
/// compares it with the partner eigenvector at the base. The base eigenvectors use
/// the eigen_frame phase convention.
GeometricPrefactor geometric_prefactor(const HamiltonianModel& model, const ContourPath& loop, int label,
                                       const QuadratureOptions& options = {});

struct DissipativityReport {
    bool dissipative = true;
    /// Most negative increment of Im int (e_j - e_k) dz (0 when none is negative).
    double max_violation = 0.0;
    /// Cumulative Im int (e_j - e_k) dz at each sample.
    std::vector<double> cumulative;
    std::vector<cplx> samples;
};

/// Cumulative Im int (e_j - e_k) dz along an open path, by Simpson's rule per piece.
/// The path is dissipative iff every increment is >= -1e-10.
DissipativityReport dissipativity_check(const HamiltonianModel& model, const ContourPath& path,
                                        std::pair<int, int> pair, double per_unit = 64.0);

/// Path from Re z = -reach to Re z = +reach along the level line Im int_{z0}^z (e_j - e_k) dz = 0
/// through the crossing: the leftmost and rightmost of the three rays leaving z0.
/// Throws NumericalError if a ray leaves the strip before reaching |Re z| = reach.
ContourPath level_line_path(const HamiltonianModel& model, const CrossingPoint& crossing, double reach);

}  // namespace adiabatic
