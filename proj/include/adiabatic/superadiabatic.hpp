#pragma once

#include <limits>
#include <vector>

#include "adiabatic/models.hpp"
#include "adiabatic/propagator.hpp"
#include "adiabatic/types.hpp"

namespace adiabatic {

/// Order-q renormalized Hamiltonian H_q(t, eps) sampled on a uniform grid.
///
/// H_0 = H and H_{q+1} = H - i eps [dP_q/dt, P_q], where P_q is the spectral
/// projector of H_q onto the ranks in `labels`. The adiabatic generator of P_q,
/// H_q + i eps [P_q', P_q], then differs from H by H_q - H_{q+1}, which is the
/// coupling defect. Derivatives use a five-point stencil, so each level loses two
/// grid points per side.
struct SuperadiabaticLevel {
    int q = 0;
    double epsilon = 0.0;
    LabelSet labels;
    std::vector<double> grid;
    std::vector<Matrix> H;
    std::vector<Matrix> P;
    /// sup over the grid of level q+1 of ||H_{q+1} - H_q||; NaN until level q+1 exists.
    double defect_norm = std::numeric_limits<double>::quiet_NaN();
    /// Smallest distance between the spectrum of H_q in `labels` and the rest.
    double min_gap = 0.0;
    /// Richardson error estimate of dP_q/dt (max entry over the grid).
    double derivative_error = 0.0;

    double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
    /// Index of grid point t; throws DomainError if t is not a node.
    std::size_t index_of(double t) const;
};

struct SuperadiabaticOptions {
    /// Target grid spacing; the actual spacing divides the window exactly.
    double spacing = 0.005;
    PropagateOptions propagate;
    /// Spectral part sigma_1 as ascending ranks; empty means model.lower_labels.
    LabelSet labels;
};

/// Uniform grid containing t0 and t1 as nodes, extended by `margin` points per side.
std::vector<double> uniform_grid(double t0, double t1, double spacing, int margin);

/// Grid margin needed to evaluate levels up to q_max + 1 and interpolate them.
int ladder_margin(int q_max);

/// Levels 0..q_max+1 on `grid` (defect_norm set for 0..q_max). Throws NumericalError
/// when the gap of some H_k closes on the grid.
std::vector<SuperadiabaticLevel> build_ladder(const HamiltonianModel& model, double epsilon, int q_max,
                                              const std::vector<double>& grid, const LabelSet& labels = {});

/// Level q with its defect norm.
SuperadiabaticLevel build_level(const HamiltonianModel& model, double epsilon, int q,
                                const std::vector<double>& grid, const LabelSet& labels = {});

/// ||(I - P_q(t1)) u P_q(t0)||^2 for an evolution u from t0 to t1 (grid nodes).
double basis_transition(const SuperadiabaticLevel& level, const Matrix& u, double t0, double t1);

/// Transition probability out of the order-q superadiabatic subspace under the true
/// evolution U(t1, t0).
double superadiabatic_transition(const HamiltonianModel& model, double epsilon, int q, double t0,
                                 double t1, const SuperadiabaticOptions& options = {});

enum class TruncationCriterion { Defect, Transition };

struct TruncationResult {
    int q_star = 0;
    /// Set when the defect grows from q = 0 on (epsilon too large for the scheme).
    bool warning = false;
    TruncationCriterion criterion = TruncationCriterion::Defect;
    /// defects[q] = defect_norm of level q, q < q_max (+inf after a gap closure).
    std::vector<double> defects;
    /// Per-order transitions, filled for TruncationCriterion::Transition.
    std::vector<double> transitions;
    SuperadiabaticLevel level;
};

/// q* = argmin over 0 <= q < q_max of the chosen criterion on the window [t0, t1].
TruncationResult optimal_truncation(const HamiltonianModel& model, double epsilon, int q_max, double t0,
                                    double t1, const SuperadiabaticOptions& options = {},
                                    TruncationCriterion criterion = TruncationCriterion::Defect);

struct IntertwiningReport {
    /// sup over checkpoints t of ||V_q(t, t0) P_q(t0) - P_q(t) V_q(t, t0)||.
    double defect = 0.0;
    /// ||V_q(t1, t0) - U(t1, t0)|| in operator norm.
    double distance_to_true = 0.0;
    PropagationResult V;
};

/// Propagates V_q with generator H_q + i eps [P_q', P_q] (grid data interpolated to
/// eighth order) and measures the intertwining defect at about 100 checkpoints.
IntertwiningReport verify_intertwining(const HamiltonianModel& model, double epsilon, int q, double t0,
                                       double t1, const SuperadiabaticOptions& options = {});

/// Compression of H onto the range of P_q in a parallel-transported orthonormal frame.
struct EffectiveHamiltonian {
    int q = 0;
    double epsilon = 0.0;
    std::vector<double> grid;
    /// frames[i] is n x r with orthonormal columns spanning range P_q(grid[i]).
    std::vector<Matrix> frames;
    /// H_eff[i] = frames[i]^dagger H(grid[i]) frames[i].
    std::vector<Matrix> H_eff;
};

/// Effective Hamiltonian on [t0, t1] for a rank-2 spectral part. Throws DomainError
/// if the rank of P_q differs from 2.
EffectiveHamiltonian reduce_to_effective(const HamiltonianModel& model, double epsilon, int q, double t0,
                                         double t1, const SuperadiabaticOptions& options = {});

/// Transition probability between ascending eigenvectors `from` -> `to` of H_eff at
/// the grid ends, integrating i eps c' = H_eff c.
double effective_transition(const EffectiveHamiltonian& eff, int from, int to,
                            const PropagateOptions& options = {});

}  // namespace adiabatic
