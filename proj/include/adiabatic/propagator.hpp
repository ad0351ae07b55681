#pragma once

#include <functional>
#include <vector>

#include "adiabatic/models.hpp"
#include "adiabatic/types.hpp"

namespace adiabatic {

struct PropagateOptions {
    /// Local error target per accepted step (max-entry norm of the step propagator).
    double tolerance = 1e-10;
    long max_steps = 100'000'000;
    /// Steps are bounded by step_bound_factor * epsilon.
    double step_bound_factor = 5.0;
};

/// Evolution U(t1, t0) of i eps dU/dt = G(t) U.
struct PropagationResult {
    Matrix U;
    double t0 = 0.0;
    double t1 = 0.0;
    double epsilon = 0.0;
    long step_count = 0;
    /// Sum of the step-doubling local error estimates.
    double error_estimate = 0.0;
    double unitarity_defect = 0.0;
    /// ||V P(t0) - P(t1) V||, filled by adiabatic_propagate.
    double intertwining_defect = 0.0;
};

/// Hermitian generator t -> G(t).
using Generator = std::function<Matrix(double)>;
/// Called once per accepted substep [t, t + h] in propagation order.
using StepObserver = std::function<void(double t, double h)>;

/// Fourth-order commutator-free Magnus integrator with step-doubling error control.
/// Each step is a product of two exact unitary exponentials, so U stays unitary to
/// rounding. t1 < t0 integrates backwards.
PropagationResult propagate_generator(const Generator& generator, int dimension, double epsilon,
                                      double t0, double t1, const PropagateOptions& options = {},
                                      const StepObserver& observer = {});

PropagationResult propagate(const HamiltonianModel& model, double epsilon, double t0, double t1,
                            const PropagateOptions& options = {});

struct CoefficientTrace {
    std::vector<double> times;
    /// coefficients[g](j-1) = c_j(times[g]).
    std::vector<Vector> coefficients;
    /// dynamical_phases[g](j-1) = integral of e_j from times[0] to times[g].
    std::vector<Eigen::VectorXd> dynamical_phases;
    /// max over the grid of |sum_j |c_j|^2 - 1|.
    double norm_defect = 0.0;
};

/// Expansion coefficients c_j(t) = exp(+i/eps int e_j) <phi_j(t)|psi(t)> with
/// parallel-transported eigenvectors, psi(times[0]) = psi0. Phase integrals use the
/// Gauss nodes of the propagation substeps.
CoefficientTrace coefficients(const HamiltonianModel& model, double epsilon, const Vector& psi0,
                              const std::vector<double>& grid, const PropagateOptions& options = {});

struct TransitionResult {
    double probability = 0.0;
    /// Half-length of the integration interval [-T, T] actually used.
    double t_used = 0.0;
    double unitarity_defect = 0.0;
    double error_estimate = 0.0;
    int doublings = 0;
};

struct ScatteringOptions {
    PropagateOptions propagate;
    /// Tolerance on ||H(+-T) - H(+-inf)|| for scattering-safe models.
    double truncation_tolerance = 1e-10;
    /// Convergence-in-T mode (models without limits): start, relative target, doublings.
    double initial_t = 8.0;
    double relative_change = 1e-3;
    int max_doublings = 6;
};

/// |c_to(+T)|^2 starting from the exact eigenvector phi_from(-T).
TransitionResult transition_probability(const HamiltonianModel& model, double epsilon, int from_label,
                                        int to_label, const ScatteringOptions& options = {});

/// ||P_to(t1) U(t1, t0) P_from(t0)||^2 with spectral projectors of H.
double finite_time_transition(const HamiltonianModel& model, double epsilon, double t0, double t1,
                              const LabelSet& from_labels, const LabelSet& to_labels,
                              const PropagateOptions& options = {});

/// Generator H(t) + i eps [P'(t), P(t)] of the adiabatic evolution.
Generator adiabatic_generator(const HamiltonianModel& model, double epsilon, const LabelSet& labels);

/// Adiabatic evolution V(t1, t0); reports the intertwining defect.
PropagationResult adiabatic_propagate(const HamiltonianModel& model, double epsilon, double t0, double t1,
                                      const LabelSet& labels, const PropagateOptions& options = {});

}  // namespace adiabatic
