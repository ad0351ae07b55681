#pragma once

#include <string>
#include <utility>
#include <vector>

#include "adiabatic/complexplane.hpp"
#include "adiabatic/models.hpp"

namespace adiabatic {

/// Least-squares fit ln P = ln C - 2 gamma / eps.
struct DecayFit {
    double gamma_fit = 0.0;
    double prefactor_fit = 0.0;
    double r_squared = 0.0;
    /// Epsilons used in the fit, and ln P - fitted line at each of them.
    std::vector<double> epsilons;
    std::vector<double> residuals;
    /// Epsilons dropped because P was below 100x the noise floor.
    std::vector<double> excluded;
};

/// Requires >= 4 samples (eps, P) with every P > 0 (DomainError otherwise). Points with
/// P < 100 * noise_floor are excluded; at least 4 must remain.
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& samples, double noise_floor = 0.0);

/// Power-law slope d ln P / d ln eps by least squares.
double loglog_slope(const std::vector<std::pair<double, double>>& samples);

/// -pi delta^2 / (2 a): the exponent 2 Im int e_1 of the linear avoided crossing.
double lz_exponent(double a, double delta);

/// One crossing's contribution to an asymptotic transition formula.
struct CrossingComponent {
    CrossingPoint crossing;
    ContourPath loop;
    /// Branch integrated around the loop and the label it exchanges with.
    int label = 1;
    int partner = 2;
    LoopIntegral integral;
    GeometricPrefactor prefactor;
    /// 2 Im of the loop integral and 2 Im theta.
    double exponent = 0.0;
    double log_prefactor = 0.0;
};

struct AsymptoticEstimate {
    double epsilon = 0.0;
    /// exp(log_prefactor + exponent_per_eps / epsilon).
    double value = 0.0;
    double exponent_per_eps = 0.0;
    double log_prefactor = 0.0;
    std::vector<CrossingComponent> components;
    /// Result of dissipativity_check on the level-line path through the crossing
    /// (two-level estimate only).
    bool dissipative_path_found = false;
    double dissipativity_violation = 0.0;
    /// "asymptotic formula" with a dissipative path, "exponential bound" without one.
    std::string regime;
    /// value within [0, 1].
    bool in_range = true;
};

struct EstimateOptions {
    QuadratureOptions quadrature;
    /// Real range searched for crossings.
    double reach = 4.0;
    double loop_half_width = 1.0;
    double loop_margin = 0.25;
    /// Half length of the level-line path used for the dissipativity report.
    double path_reach = 6.0;
};

/// Exponential-times-prefactor formula for a two-level model with a single generic
/// crossing in the upper strip. Throws DomainError if several crossings are found.
AsymptoticEstimate theorem1_estimate(const HamiltonianModel& model, double epsilon,
                                     const EstimateOptions& options = {});

/// Product formula for the three-level cascade: branch 1 around the (1,2) crossing and
/// branch 2 around the (2,3) crossing. Throws NumericalError when the third level does
/// not close trivially around a loop.
AsymptoticEstimate theorem1prime_estimate(const HamiltonianModel& model, double epsilon,
                                          const EstimateOptions& options = {});

}  // namespace adiabatic
