#pragma once

#include <vector>

#include "adiabatic/models.hpp"
#include "adiabatic/types.hpp"

namespace adiabatic {

/// Eigenvalues and eigenvectors of H at one (possibly complex) time.
///
/// Column c holds the eigenpair carrying label `labels[c]`. `left` holds the
/// biorthogonal left eigenvectors (left^T * vectors = I); on the real axis
/// left == conj(vectors) and the vectors are orthonormal.
struct SpectralFrame {
    cplx point{0.0, 0.0};
    Vector eigenvalues;
    Matrix vectors;
    Matrix left;
    std::vector<int> labels;
    /// Smallest |overlap| between matched columns in the step that produced this frame.
    double match_quality = 1.0;

    int dimension() const { return static_cast<int>(eigenvalues.size()); }
    int column_of(int label) const;
    cplx eigenvalue(int label) const { return eigenvalues(column_of(label)); }
    Vector vector(int label) const { return vectors.col(column_of(label)); }
};

struct Projector {
    Matrix matrix;
    int rank = 0;
};

struct HermitianEigen {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // orthonormal columns
};

/// Cyclic Jacobi with a fixed sweep order; bit-reproducible for identical input.
HermitianEigen jacobi_eigen(const Matrix& h);

/// exp(-i tau H) for hermitian H.
Matrix unitary_exponential(const Matrix& h, double tau);

/// Eigensystem of a hermitian matrix: ascending eigenvalues, labels 1..n, and each
/// vector's largest-modulus entry (lowest index on ties) made real positive.
/// Throws DomainError when the hermiticity defect exceeds 1e-12 (relative to ||H||).
SpectralFrame eigen_frame(const Matrix& h, cplx point = {0.0, 0.0});

/// Continues `prev` to the matrix `h_next` at `point`. Columns are matched to the
/// previous ones, labels carried over, and each vector rescaled by the discrete
/// parallel-transport rule. Hermitian steps on the real axis use a fresh Jacobi
/// solve and overlap matching; off-axis steps refine each eigenpair by Newton
/// iteration seeded from `prev`.
///
/// Throws NumericalError when the matching is ambiguous (two overlaps within 1e-6)
/// or Newton fails, which signals a step too large near a crossing.
SpectralFrame continue_frame(const SpectralFrame& prev, const Matrix& h_next, cplx point);

/// Re-phases (rescales, off the real axis) every frame after the first so that
/// consecutive frames satisfy the discrete transport condition. Idempotent.
std::vector<SpectralFrame> gauge_transport(std::vector<SpectralFrame> frames);

/// Frames of `model` at each sample, continued sample to sample. Steps whose
/// matching quality drops below 0.75 (or whose Newton solve fails) are bisected.
/// A non-real first sample is reached by a vertical continuation from its real part,
/// unless `start` supplies the frame at samples.front().
std::vector<SpectralFrame> track_frames(const HamiltonianModel& model,
                                        const std::vector<cplx>& samples,
                                        const SpectralFrame* start = nullptr);

/// P = sum over `labels` of r_j l_j^T.
Projector spectral_projector(const SpectralFrame& frame, const LabelSet& labels);

struct ProjectorDerivative {
    Matrix value;
    double error_estimate = 0.0;
    double step = 0.0;
};

/// dP/dt on the real axis by central differences at steps h and h/2 combined by
/// Richardson extrapolation. `h == 0` picks 1e-3 * min(1, local gap).
ProjectorDerivative projector_derivative(const HamiltonianModel& model, double t,
                                         const LabelSet& labels, double h = 0.0);

/// Permutation perm[label-1] = ascending rank (1-based) at the end point of the
/// eigenvalue that carries `label` in `frame`; compares against a fresh solve.
std::vector<int> label_permutation(const SpectralFrame& frame, const Matrix& h_end);

}  // namespace adiabatic
