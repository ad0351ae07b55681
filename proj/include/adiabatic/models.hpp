#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adiabatic/types.hpp"

namespace adiabatic {

/// An analytic Hamiltonian family z -> H(z) on the strip |Im z| < strip_halfwidth,
/// hermitian on the real axis.
///
/// Models are immutable values. `evaluate` rejects points outside the strip.
struct HamiltonianModel {
    std::string name;
    int dimension = 0;
    std::function<Matrix(cplx)> generator;
    double strip_halfwidth = 1.0;
    double decay_exponent = 1.0;
    /// H(-inf), H(+inf); present iff the family has scattering limits.
    std::optional<std::pair<Matrix, Matrix>> limits;
    bool scattering_safe = false;
    std::map<std::string, double> params;
    /// Labels of the bounded spectral part sigma_1 (default: the ground level).
    LabelSet lower_labels{1};

    Matrix evaluate(cplx z) const;
    Matrix at(double t) const { return evaluate(cplx(t, 0.0)); }
    bool in_strip(cplx z) const { return std::abs(z.imag()) < strip_halfwidth; }
    double param(const std::string& key) const;
};

namespace models {

/// H(z) = 1/2 [[a z, delta], [delta, -a z]]; crossings at z = +-i delta/a.
HamiltonianModel landau_zener(double a, double delta);

/// H(z) = 1/2 [[tanh z, delta], [delta, -tanh z]]; crossings at z = +-i atan(delta).
HamiltonianModel tanh_sweep(double delta);

/// H(z) = 1/2 (tanh(a z) sz + delta sx + b sech(a z) sy). Complex hermitian for b != 0.
HamiltonianModel complex_hermitian(double a, double delta, double b);

/// Three levels: diabatic energies (tanh z, tanh t0, tanh t1) with constant couplings
/// delta between level 1 and levels 2, 3. At delta = 0, level 1 crosses level 2 at t0
/// and level 3 at t1.
HamiltonianModel three_level_cascade(double delta, double t0, double t1);

/// Isolated 2x2 block [[tanh z, delta], [delta, tanh tc]] of the cascade around the
/// crossing at tc.
HamiltonianModel cascade_pair_surrogate(double delta, double tc);

/// tanh_sweep(delta) block for levels 1, 2 plus a third level at energy `e3`, coupled
/// to both through `coupling * sech z`. sigma_1 = {1, 2}.
HamiltonianModel spectator_three_level(double delta, double coupling, double e3);

/// H(z) == h0 for all z.
HamiltonianModel constant(const Matrix& h0);

/// Names accepted by `by_name`.
std::vector<std::string> catalog();

/// Accepted parameters of a catalog model with their default values.
/// Throws DomainError naming the catalog for an unknown model.
std::map<std::string, double> parameter_defaults(const std::string& name);

/// Builds a catalog model from named parameters (missing keys take defaults,
/// unknown keys throw DomainError).
HamiltonianModel by_name(const std::string& name, const std::map<std::string, double>& params);

}  // namespace models

/// Smallest integer T >= 0 with ||H(+-T) - H(+-inf)|| <= tol.
/// Throws DomainError for models without scattering limits.
double truncation_time(const HamiltonianModel& model, double tol, double t_max = 400.0);

struct ModelReport {
    double hermiticity_defect = 0.0;  // max over sampled real t
    double schwarz_defect = 0.0;      // max ||H(conj z) - H(z)^dagger|| over strip samples
    double min_gap = 0.0;             // min over sampled t of dist(sigma_1, sigma_2)
    double decay_constant = 0.0;      // sup ||H(t+is) - H(+-inf)|| (1+|t|)^(1+alpha), if limits
};

/// Samples the H1/H2 metadata of a model on [-t_range, t_range] and `strip_points`
/// deterministic pseudo-random points of the strip.
ModelReport validate_model(const HamiltonianModel& model, double t_range = 10.0,
                           int real_samples = 401, int strip_points = 100);

}  // namespace adiabatic
