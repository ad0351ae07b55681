#include "adiabatic/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace adiabatic {
namespace {

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit: abscissae are all equal");
    Line l;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    l.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return l;
}

CrossingComponent component(const HamiltonianModel& model, const CrossingPoint& cp, int label,
                            const EstimateOptions& options) {
    CrossingComponent c;
    c.crossing = cp;
    c.label = label;
    const double room = model.strip_halfwidth - cp.location.imag();
    c.loop = loop_around(model, cp, options.loop_half_width, std::min(options.loop_margin, 0.5 * room));
    c.integral = loop_integral(model, c.loop, label, options.quadrature);
    if (!c.integral.exchanged) {
        std::ostringstream msg;
        msg << "estimate: branch " << label << " does not exchange around the crossing at " << cp.location;
        throw NumericalError(msg.str());
    }
    c.partner = c.integral.partner;
    c.prefactor = geometric_prefactor(model, c.loop, label, options.quadrature);
    c.exponent = 2.0 * c.integral.value.imag();
    c.log_prefactor = 2.0 * c.prefactor.im_theta();
    return c;
}

void finish(AsymptoticEstimate& est) {
    est.exponent_per_eps = 0.0;
    est.log_prefactor = 0.0;
    for (const auto& c : est.components) {
        est.exponent_per_eps += c.exponent;
        est.log_prefactor += c.log_prefactor;
    }
    est.value = std::exp(est.log_prefactor + est.exponent_per_eps / est.epsilon);
    est.in_range = est.value >= 0.0 && est.value <= 1.0;
}

// Crossing of `pair` closest to the real axis.
CrossingPoint lowest_crossing(const HamiltonianModel& model, std::pair<int, int> pair, double reach) {
    const auto all = find_crossings(model, pair, reach);
    if (all.empty()) {
        std::ostringstream msg;
        msg << model.name << ": no crossing of levels " << pair.first << ", " << pair.second
            << " in the upper strip";
        throw NumericalError(msg.str());
    }
    return *std::min_element(all.begin(), all.end(), [](const CrossingPoint& a, const CrossingPoint& b) {
        return a.location.imag() < b.location.imag();
    });
}

}  // namespace

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& samples, double noise_floor) {
    if (samples.size() < 4) throw DomainError("fit_decay_rate: need at least 4 samples");
    DecayFit fit;
    std::vector<double> x, y;
    for (const auto& [eps, p] : samples) {
        if (!(eps > 0.0)) throw DomainError("fit_decay_rate: epsilon must be positive");
        if (!(p > 0.0)) {
            std::ostringstream msg;
            msg << "fit_decay_rate: P = " << p << " at epsilon = " << eps
                << " is below the numerical floor; raise the integrator accuracy";
            throw DomainError(msg.str());
        }
        if (p < 100.0 * noise_floor) {
            fit.excluded.push_back(eps);
            continue;
        }
        fit.epsilons.push_back(eps);
        x.push_back(1.0 / eps);
        y.push_back(std::log(p));
    }
    if (x.size() < 4) throw DomainError("fit_decay_rate: fewer than 4 samples above the noise floor");
    const Line l = least_squares(x, y);
    fit.gamma_fit = -0.5 * l.slope;
    fit.prefactor_fit = std::exp(l.intercept);
    fit.r_squared = l.r_squared;
    for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - (l.intercept + l.slope * x[i]));
    return fit;
}

double loglog_slope(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 2) throw DomainError("loglog_slope: need at least 2 samples");
    std::vector<double> x, y;
    for (const auto& [eps, p] : samples) {
        if (!(eps > 0.0) || !(p > 0.0)) throw DomainError("loglog_slope: values must be positive");
        x.push_back(std::log(eps));
        y.push_back(std::log(p));
    }
    return least_squares(x, y).slope;
}

double lz_exponent(double a, double delta) {
    if (!(a > 0.0) || delta < 0.0) throw DomainError("lz_exponent: need a > 0 and delta >= 0");
    return -std::numbers::pi * delta * delta / (2.0 * a);
}

AsymptoticEstimate theorem1_estimate(const HamiltonianModel& model, double epsilon,
                                     const EstimateOptions& options) {
    if (model.dimension != 2) throw DomainError("theorem1_estimate: two-level model required");
    if (!(epsilon > 0.0)) throw DomainError("theorem1_estimate: epsilon must be positive");
    const auto crossings = find_crossings(model, {1, 2}, options.reach);
    if (crossings.empty()) throw NumericalError(model.name + ": no crossing point in the upper strip");
    if (crossings.size() > 1) {
        std::ostringstream msg;
        msg << "theorem1_estimate: " << crossings.size() << " crossings in the upper strip:";
        for (const auto& c : crossings) msg << ' ' << c.location;
        throw DomainError(msg.str());
    }
    AsymptoticEstimate est;
    est.epsilon = epsilon;
    est.components.push_back(component(model, crossings.front(), 1, options));
    finish(est);
    try {
        const ContourPath path = level_line_path(model, crossings.front(), options.path_reach);
        const DissipativityReport rep = dissipativity_check(model, path, {1, 2});
        est.dissipative_path_found = rep.dissipative;
        est.dissipativity_violation = rep.max_violation;
    } catch (const NumericalError&) {
        est.dissipative_path_found = false;
    }
    est.regime = est.dissipative_path_found ? "asymptotic formula" : "exponential bound";
    return est;
}

AsymptoticEstimate theorem1prime_estimate(const HamiltonianModel& model, double epsilon,
                                          const EstimateOptions& options) {
    if (model.dimension != 3) throw DomainError("theorem1prime_estimate: three-level model required");
    if (!(epsilon > 0.0)) throw DomainError("theorem1prime_estimate: epsilon must be positive");
    AsymptoticEstimate est;
    est.epsilon = epsilon;
    const CrossingPoint z0 = lowest_crossing(model, {1, 2}, options.reach);
    const CrossingPoint z1 = lowest_crossing(model, {2, 3}, options.reach);
    est.components.push_back(component(model, z0, 1, options));
    est.components.push_back(component(model, z1, 2, options));
    // The level outside each pair must close trivially, otherwise the two loops do not
    // compose into a loop around both crossings.
    const int spectators[2] = {3, 1};
    for (int k = 0; k < 2; ++k) {
        const auto& c = est.components[k];
        const LoopIntegral other = loop_integral(model, c.loop, spectators[k], options.quadrature);
        if (other.exchanged || c.partner != c.label + 1) {
            std::ostringstream msg;
            msg << "theorem1prime_estimate: monodromy mismatch around " << c.crossing.location << " (label "
                << c.label << " -> " << c.partner << ", label " << spectators[k] << " -> " << other.partner
                << ")";
            throw NumericalError(msg.str());
        }
    }
    finish(est);
    est.regime = "asymptotic formula";
    return est;
}

}  // namespace adiabatic
