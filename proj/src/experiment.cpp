#include "adiabatic/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "adiabatic/asymptotics.hpp"
#include "adiabatic/complexplane.hpp"
#include "adiabatic/models.hpp"
#include "adiabatic/propagator.hpp"
#include "adiabatic/spectral.hpp"
#include "adiabatic/superadiabatic.hpp"

namespace adiabatic::experiment {

using config::ExperimentConfig;
using config::Operation;

namespace {

using Row = std::vector<std::string>;

std::string fmt(double x) { return format_number(x); }
std::string fmt(long x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(bool x) { return x ? "1" : "0"; }

std::string fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << h;
    return o.str();
}

struct Context {
    const ExperimentConfig& cfg;
    HamiltonianModel model;
    int from = 1;
    int to = 2;
    ScatteringOptions scattering;
    QuadratureOptions quadrature;
    EstimateOptions estimate;
    SuperadiabaticOptions superadiabatic;
    int jobs = 1;

    Context(const ExperimentConfig& c, int j) : cfg(c), model(models::by_name(c.model, c.params)), jobs(j) {
        from = c.from_label;
        to = c.to_label == 0 ? model.dimension : c.to_label;
        scattering.propagate.tolerance = c.integrator_tolerance;
        scattering.propagate.max_steps = c.max_steps;
        scattering.truncation_tolerance = c.truncation_tolerance;
        quadrature.relative_tolerance = c.quadrature_tolerance;
        estimate.quadrature = quadrature;
        estimate.reach = c.reach;
        estimate.loop_half_width = c.loop_half_width;
        estimate.loop_margin = c.loop_margin;
        estimate.path_reach = c.path_reach;
        superadiabatic.spacing = c.spacing;
        superadiabatic.propagate = scattering.propagate;
    }

    std::string p_name() const { return "P" + std::to_string(to) + std::to_string(from); }

    std::pair<double, double> sa_window() const { return cfg.window.value_or(std::make_pair(-3.0, 3.0)); }

    // Epsilons in increasing order; rows are emitted in this order.
    std::vector<double> epsilons() const {
        std::vector<double> e = cfg.epsilons;
        std::sort(e.begin(), e.end());
        return e;
    }
};

// Appends the provenance columns every row carries.
void add_provenance(Table& t, const ExperimentConfig& cfg) {
    t.columns.push_back("model");
    t.columns.push_back("params");
    const std::string params = config::describe_params(cfg);
    for (auto& r : t.rows) {
        r.push_back(cfg.model);
        r.push_back(params);
    }
}

struct PointResult {
    double probability = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    double unitarity_defect = 0.0;
    double error_estimate = 0.0;
    long steps = 0;
};

// Scattering transition, or the finite-time transition when a window is configured.
PointResult transition_point(const Context& ctx, double eps) {
    PointResult r;
    if (ctx.cfg.window) {
        const auto [t0, t1] = *ctx.cfg.window;
        const PropagationResult u = propagate(ctx.model, eps, t0, t1, ctx.scattering.propagate);
        const SpectralFrame f0 = eigen_frame(ctx.model.at(t0), t0);
        const SpectralFrame f1 = eigen_frame(ctx.model.at(t1), t1);
        const cplx amp = f1.vector(ctx.to).dot(u.U * f0.vector(ctx.from));
        r.probability = std::norm(amp);
        r.t0 = t0;
        r.t1 = t1;
        r.unitarity_defect = u.unitarity_defect;
        r.error_estimate = u.error_estimate;
        r.steps = u.step_count;
        return r;
    }
    const TransitionResult tr = transition_probability(ctx.model, eps, ctx.from, ctx.to, ctx.scattering);
    r.probability = tr.probability;
    r.t0 = -tr.t_used;
    r.t1 = tr.t_used;
    r.unitarity_defect = tr.unitarity_defect;
    r.error_estimate = tr.error_estimate;
    return r;
}

void fit_summary(Table& t, const std::vector<std::pair<double, double>>& samples, double floor,
                 const std::string& label) {
    try {
        const DecayFit f = fit_decay_rate(samples, floor);
        std::ostringstream o;
        o << "fit " << label << ": gamma_fit=" << fmt(f.gamma_fit) << " two_gamma=" << fmt(2.0 * f.gamma_fit)
          << " prefactor_fit=" << fmt(f.prefactor_fit) << " r_squared=" << fmt(f.r_squared)
          << " points=" << f.epsilons.size() << " excluded=" << f.excluded.size();
        t.summary.push_back(o.str());
    } catch (const DomainError& e) {
        t.summary.push_back("fit " + label + ": skipped (" + e.what() + ")");
    }
}

void slope_summary(Table& t, const std::vector<std::pair<double, double>>& samples, const std::string& label) {
    try {
        t.summary.push_back("slope " + label + ": " + fmt(loglog_slope(samples)));
    } catch (const DomainError& e) {
        t.summary.push_back("slope " + label + ": skipped (" + e.what() + ")");
    }
}

Table run_sweep(const Context& ctx, bool with_trace) {
    const auto eps = ctx.epsilons();
    struct Out {
        PointResult point;
        double born_fock = 0.0;
        double norm_defect = 0.0;
    };
    const auto results = parallel_map<Out>(eps.size(), ctx.jobs, [&](std::size_t i) {
        Out o;
        o.point = transition_point(ctx, eps[i]);
        if (with_trace) {
            const SpectralFrame f0 = eigen_frame(ctx.model.at(o.point.t0), o.point.t0);
            std::vector<double> grid(ctx.cfg.samples);
            for (int g = 0; g < ctx.cfg.samples; ++g)
                grid[g] = o.point.t0 + (o.point.t1 - o.point.t0) * g / (ctx.cfg.samples - 1);
            const CoefficientTrace tr =
                coefficients(ctx.model, eps[i], f0.vector(ctx.from), grid, ctx.scattering.propagate);
            double sup = 0.0;
            for (const auto& c : tr.coefficients) sup = std::max(sup, std::abs(c(ctx.from - 1) - 1.0));
            o.born_fock = sup;
            o.norm_defect = tr.norm_defect;
        }
        return o;
    });
    Table t;
    t.columns = {"epsilon", ctx.p_name(), "T_used", "unitarity_defect", "error_estimate"};
    if (with_trace) {
        t.columns = {"epsilon", ctx.p_name(), "t0", "t1", "unitarity_defect", "error_estimate", "steps",
                     "born_fock_deviation", "norm_defect"};
    }
    std::vector<std::pair<double, double>> samples;
    double floor = ctx.cfg.noise_floor;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const auto& r = results[i];
        if (with_trace) {
            t.rows.push_back({fmt(eps[i]), fmt(r.point.probability), fmt(r.point.t0), fmt(r.point.t1),
                              fmt(r.point.unitarity_defect), fmt(r.point.error_estimate), fmt(r.point.steps),
                              fmt(r.born_fock), fmt(r.norm_defect)});
        } else {
            t.rows.push_back({fmt(eps[i]), fmt(r.point.probability), fmt(std::max(-r.point.t0, r.point.t1)),
                              fmt(r.point.unitarity_defect), fmt(r.point.error_estimate)});
        }
        samples.emplace_back(eps[i], r.point.probability);
        // P = |amplitude|^2, so an amplitude error e leaves P indistinguishable from 0 below e^2.
        floor = std::max(floor, r.point.error_estimate * r.point.error_estimate);
    }
    t.metadata.emplace_back("labels", std::to_string(ctx.from) + " -> " + std::to_string(ctx.to));
    t.metadata.emplace_back("mode", ctx.cfg.window ? "finite window" : "scattering");
    if (!with_trace && eps.size() >= 4) fit_summary(t, samples, floor, ctx.p_name());
    return t;
}

CrossingPoint pick_crossing(const Context& ctx, std::pair<int, int> pair) {
    if (ctx.cfg.seed) return find_crossing(ctx.model, pair, *ctx.cfg.seed);
    const auto all = find_crossings(ctx.model, pair, ctx.cfg.reach);
    if (all.empty()) {
        std::ostringstream msg;
        msg << ctx.model.name << ": no crossing of levels " << pair.first << ", " << pair.second
            << " found in the upper strip";
        throw NumericalError(msg.str());
    }
    return *std::min_element(all.begin(), all.end(), [](const CrossingPoint& a, const CrossingPoint& b) {
        return a.location.imag() < b.location.imag();
    });
}

ContourPath configured_loop(const Context& ctx, const CrossingPoint& cp) {
    const double room = ctx.model.strip_halfwidth - cp.location.imag();
    return loop_around(ctx.model, cp, ctx.cfg.loop_half_width, std::min(ctx.cfg.loop_margin, 0.5 * room));
}

std::string describe_loop(const ContourPath& loop) {
    std::ostringstream o;
    for (std::size_t i = 0; i < loop.vertices.size(); ++i)
        o << (i ? " " : "") << "(" << fmt(loop.vertices[i].real()) << "," << fmt(loop.vertices[i].imag()) << ")";
    return o.str();
}

Table run_crossing(const Context& ctx) {
    std::vector<CrossingPoint> found;
    if (ctx.cfg.seed)
        found.push_back(find_crossing(ctx.model, ctx.cfg.pair, *ctx.cfg.seed));
    else
        found = find_crossings(ctx.model, ctx.cfg.pair, ctx.cfg.reach);
    Table t;
    t.columns = {"index", "pair", "re_z", "im_z", "residual", "order_check", "iterations"};
    int k = 0;
    for (const auto& c : found) {
        t.rows.push_back({fmt(k++), std::to_string(c.pair.first) + "-" + std::to_string(c.pair.second),
                          fmt(c.location.real()), fmt(c.location.imag()), fmt(c.residual), fmt(c.order_check),
                          fmt(c.iterations)});
    }
    t.metadata.emplace_back("crossings_found", std::to_string(found.size()));
    return t;
}

Table run_loop_integral(const Context& ctx) {
    const CrossingPoint cp = pick_crossing(ctx, ctx.cfg.pair);
    const ContourPath loop = configured_loop(ctx, cp);
    const LoopIntegral li = loop_integral(ctx.model, loop, ctx.cfg.loop_label, ctx.quadrature);
    const double exponent = 2.0 * li.value.imag();
    Table t;
    t.metadata.emplace_back("crossing", fmt(cp.location.real()) + " " + fmt(cp.location.imag()));
    t.metadata.emplace_back("loop", describe_loop(loop));
    t.metadata.emplace_back("branch_exchange", li.exchanged ? "yes" : "no branch exchange");
    t.columns = {"epsilon", "integral_re", "integral_im", "exponent", "P_exponential", "label", "partner",
                 "levels", "error_estimate"};
    for (double e : ctx.epsilons()) {
        t.rows.push_back({fmt(e), fmt(li.value.real()), fmt(li.value.imag()), fmt(exponent),
                          fmt(std::exp(exponent / e)), fmt(ctx.cfg.loop_label), fmt(li.partner), fmt(li.levels),
                          fmt(li.error_estimate)});
    }
    return t;
}

Table run_prefactor(const Context& ctx) {
    const CrossingPoint cp = pick_crossing(ctx, ctx.cfg.pair);
    const ContourPath loop = configured_loop(ctx, cp);
    const LoopIntegral li = loop_integral(ctx.model, loop, ctx.cfg.loop_label, ctx.quadrature);
    const GeometricPrefactor gp = geometric_prefactor(ctx.model, loop, ctx.cfg.loop_label, ctx.quadrature);
    const double exponent = 2.0 * li.value.imag();
    const double prefactor = std::exp(2.0 * gp.im_theta());
    Table t;
    t.metadata.emplace_back("crossing", fmt(cp.location.real()) + " " + fmt(cp.location.imag()));
    t.metadata.emplace_back("loop", describe_loop(loop));
    t.metadata.emplace_back("gauge", "largest-modulus entry real positive on the real axis, then parallel transport");
    t.columns = {"epsilon",   "theta_re",   "theta_im",          "prefactor",     "exponent",
                 "P_estimate", "partner",   "complement_defect", "error_estimate"};
    for (double e : ctx.epsilons()) {
        t.rows.push_back({fmt(e), fmt(gp.theta.real()), fmt(gp.theta.imag()), fmt(prefactor), fmt(exponent),
                          fmt(prefactor * std::exp(exponent / e)), fmt(gp.partner), fmt(gp.complement_defect),
                          fmt(gp.error_estimate)});
    }
    return t;
}

Table run_dissipativity(const Context& ctx) {
    ContourPath path;
    const std::pair<int, int> pair = ctx.cfg.pair;
    if (ctx.cfg.path == "straight") {
        const double r = ctx.cfg.path_reach, h = ctx.cfg.path_height;
        path = polyline({cplx(-r, h), cplx(r, h)});
    } else {
        path = level_line_path(ctx.model, pick_crossing(ctx, pair), ctx.cfg.path_reach);
    }
    const DissipativityReport rep = dissipativity_check(ctx.model, path, pair);
    Table t;
    t.metadata.emplace_back("path", ctx.cfg.path);
    t.metadata.emplace_back("dissipative", rep.dissipative ? "yes" : "no");
    t.metadata.emplace_back("max_violation", fmt(rep.max_violation));
    t.columns = {"index", "re_z", "im_z", "cumulative_im"};
    for (std::size_t k = 0; k < rep.samples.size(); ++k) {
        t.rows.push_back({fmt(static_cast<long>(k)), fmt(rep.samples[k].real()), fmt(rep.samples[k].imag()),
                          fmt(rep.cumulative[k])});
    }
    return t;
}

Table run_superadiabatic(const Context& ctx) {
    const auto eps = ctx.epsilons();
    const auto [t0, t1] = ctx.sa_window();
    const std::string& mode = ctx.cfg.sa_mode;
    Table t;
    t.metadata.emplace_back("window", fmt(t0) + " " + fmt(t1));
    t.metadata.emplace_back("superadiabatic_mode", mode);
    if (mode == "transition") {
        const int q_top = *std::max_element(ctx.cfg.orders.begin(), ctx.cfg.orders.end());
        const auto results = parallel_map<std::vector<double>>(eps.size(), ctx.jobs, [&](std::size_t i) {
            const auto grid = uniform_grid(t0, t1, ctx.superadiabatic.spacing, ladder_margin(q_top));
            const auto ladder = build_ladder(ctx.model, eps[i], q_top, grid, ctx.superadiabatic.labels);
            const Matrix u = propagate(ctx.model, eps[i], t0, t1, ctx.superadiabatic.propagate).U;
            std::vector<double> p;
            for (int q : ctx.cfg.orders) p.push_back(basis_transition(ladder[q], u, t0, t1));
            return p;
        });
        t.columns = {"epsilon"};
        for (int q : ctx.cfg.orders) t.columns.push_back("P_q" + std::to_string(q));
        for (std::size_t i = 0; i < eps.size(); ++i) {
            Row r{fmt(eps[i])};
            for (double p : results[i]) r.push_back(fmt(p));
            t.rows.push_back(r);
        }
        if (eps.size() >= 2) {
            for (std::size_t k = 0; k < ctx.cfg.orders.size(); ++k) {
                std::vector<std::pair<double, double>> s;
                for (std::size_t i = 0; i < eps.size(); ++i) s.emplace_back(eps[i], results[i][k]);
                slope_summary(t, s, "q=" + std::to_string(ctx.cfg.orders[k]));
            }
        }
        return t;
    }
    if (mode == "truncation") {
        const auto criterion =
            ctx.cfg.criterion == "transition" ? TruncationCriterion::Transition : TruncationCriterion::Defect;
        struct Out {
            TruncationResult tr;
            double p = 0.0;
            double distance = 0.0;
        };
        const auto results = parallel_map<Out>(eps.size(), ctx.jobs, [&](std::size_t i) {
            Out o;
            o.tr = optimal_truncation(ctx.model, eps[i], ctx.cfg.q_max, t0, t1, ctx.superadiabatic, criterion);
            o.p = superadiabatic_transition(ctx.model, eps[i], o.tr.q_star, t0, t1, ctx.superadiabatic);
            o.distance = verify_intertwining(ctx.model, eps[i], o.tr.q_star, t0, t1, ctx.superadiabatic)
                             .distance_to_true;
            return o;
        });
        t.metadata.emplace_back("criterion", ctx.cfg.criterion);
        t.columns = {"epsilon", "q_star", "warning", "defect_at_q_star", "P_q_star", "distance_V_U"};
        std::vector<std::pair<double, double>> sp, sd;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const auto& o = results[i];
            t.rows.push_back({fmt(eps[i]), fmt(o.tr.q_star), fmt(o.tr.warning), fmt(o.tr.defects[o.tr.q_star]),
                              fmt(o.p), fmt(o.distance)});
            sp.emplace_back(eps[i], o.p);
            sd.emplace_back(eps[i], o.distance);
        }
        if (eps.size() >= 4) {
            fit_summary(t, sp, ctx.cfg.noise_floor, "P_q_star");
            fit_summary(t, sd, ctx.cfg.noise_floor, "distance_V_U");
        }
        return t;
    }
    if (mode == "intertwining") {
        const auto results = parallel_map<std::vector<IntertwiningReport>>(eps.size(), ctx.jobs, [&](std::size_t i) {
            std::vector<IntertwiningReport> reps;
            for (int q : ctx.cfg.orders)
                reps.push_back(verify_intertwining(ctx.model, eps[i], q, t0, t1, ctx.superadiabatic));
            return reps;
        });
        t.columns = {"epsilon"};
        for (int q : ctx.cfg.orders) {
            t.columns.push_back("defect_q" + std::to_string(q));
            t.columns.push_back("distance_q" + std::to_string(q));
        }
        for (std::size_t i = 0; i < eps.size(); ++i) {
            Row r{fmt(eps[i])};
            for (const auto& rep : results[i]) {
                r.push_back(fmt(rep.defect));
                r.push_back(fmt(rep.distance_to_true));
            }
            t.rows.push_back(r);
        }
        return t;
    }
    // effective
    const int q = ctx.cfg.orders.front();
    struct Out {
        double p_eff = 0.0;
        double p_full = 0.0;
    };
    const auto results = parallel_map<Out>(eps.size(), ctx.jobs, [&](std::size_t i) {
        Out o;
        const EffectiveHamiltonian eff = reduce_to_effective(ctx.model, eps[i], q, t0, t1, ctx.superadiabatic);
        o.p_eff = effective_transition(eff, 1, 2, ctx.superadiabatic.propagate);
        o.p_full = finite_time_transition(ctx.model, eps[i], t0, t1, {1}, {2}, ctx.superadiabatic.propagate);
        return o;
    });
    t.metadata.emplace_back("order", std::to_string(q));
    t.columns = {"epsilon", "P_effective", "P_full", "difference"};
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const auto& o = results[i];
        t.rows.push_back({fmt(eps[i]), fmt(o.p_eff), fmt(o.p_full), fmt(o.p_eff - o.p_full)});
    }
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("fit.input: cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double parse_cell(const std::string& cell, const std::string& what) {
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw ConfigError("fit.input: cannot parse " + what + " value '" + cell + "'");
    return v;
}

Table run_fit(const Context& ctx) {
    if (ctx.cfg.fit_input.empty()) throw ConfigError("fit.input: no input CSV given");
    const CsvData csv = parse_csv(read_file(ctx.cfg.fit_input));
    const int ie = csv.column("epsilon");
    if (ie < 0) throw ConfigError("fit.input: '" + ctx.cfg.fit_input + "' has no epsilon column");
    int ip = -1;
    if (!ctx.cfg.fit_column.empty()) {
        ip = csv.column(ctx.cfg.fit_column);
        if (ip < 0) throw ConfigError("fit.column: no column '" + ctx.cfg.fit_column + "' in the input");
    } else {
        for (std::size_t k = 0; k < csv.columns.size(); ++k) {
            if (!csv.columns[k].empty() && csv.columns[k][0] == 'P') {
                ip = static_cast<int>(k);
                break;
            }
        }
        if (ip < 0) throw ConfigError("fit.input: no probability column (name starting with 'P')");
    }
    double floor = ctx.cfg.noise_floor;
    const int ierr = csv.column("error_estimate");
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : csv.rows) {
        if (row.size() != csv.columns.size()) throw ConfigError("fit.input: ragged row");
        samples.emplace_back(parse_cell(row[ie], "epsilon"), parse_cell(row[ip], csv.columns[ip]));
        if (ierr >= 0) {
            const double e = parse_cell(row[ierr], "error_estimate");
            floor = std::max(floor, e * e);
        }
    }
    std::sort(samples.begin(), samples.end());
    const DecayFit f = fit_decay_rate(samples, floor);
    Table t;
    // Provenance follows the data, not the fit config.
    std::string source_model = ctx.cfg.model + " " + config::describe_params(ctx.cfg);
    if (auto it = csv.metadata.find("model"); it != csv.metadata.end()) source_model = it->second;
    t.metadata.emplace_back("model", source_model);
    t.metadata.emplace_back("input", ctx.cfg.fit_input);
    if (auto it = csv.metadata.find("config_hash"); it != csv.metadata.end())
        t.metadata.emplace_back("input_config_hash", it->second);
    t.metadata.emplace_back("column", csv.columns[ip]);
    t.metadata.emplace_back("noise_floor", fmt(floor));
    t.columns = {"epsilon", csv.columns[ip], "ln_P", "fitted_ln_P", "residual", "used"};
    std::size_t used = 0;
    for (const auto& [e, p] : samples) {
        const bool in_fit = std::find(f.epsilons.begin(), f.epsilons.end(), e) != f.epsilons.end();
        const double fitted = std::log(f.prefactor_fit) - 2.0 * f.gamma_fit / e;
        t.rows.push_back({fmt(e), fmt(p), fmt(std::log(p)), fmt(fitted),
                          fmt(in_fit ? f.residuals[used] : std::log(p) - fitted), fmt(in_fit)});
        if (in_fit) ++used;
    }
    const auto space = source_model.find(' ');
    t.columns.push_back("model");
    t.columns.push_back("params");
    for (auto& r : t.rows) {
        r.push_back(source_model.substr(0, space));
        r.push_back(space == std::string::npos ? "" : source_model.substr(space + 1));
    }
    std::ostringstream o;
    o << "fit " << csv.columns[ip] << ": gamma_fit=" << fmt(f.gamma_fit) << " two_gamma=" << fmt(2.0 * f.gamma_fit)
      << " prefactor_fit=" << fmt(f.prefactor_fit) << " r_squared=" << fmt(f.r_squared)
      << " points=" << f.epsilons.size() << " excluded=" << f.excluded.size();
    t.summary.push_back(o.str());
    return t;
}

Table run_compare(const Context& ctx) {
    const auto eps = ctx.epsilons();
    AsymptoticEstimate est;
    if (ctx.model.dimension == 2)
        est = theorem1_estimate(ctx.model, eps.front(), ctx.estimate);
    else if (ctx.model.dimension == 3)
        est = theorem1prime_estimate(ctx.model, eps.front(), ctx.estimate);
    else
        throw DomainError("compare: no asymptotic formula for dimension " + std::to_string(ctx.model.dimension));
    const auto points =
        parallel_map<PointResult>(eps.size(), ctx.jobs, [&](std::size_t i) { return transition_point(ctx, eps[i]); });
    Table t;
    t.metadata.emplace_back("labels", std::to_string(ctx.from) + " -> " + std::to_string(ctx.to));
    t.metadata.emplace_back("exponent_per_eps", fmt(est.exponent_per_eps));
    t.metadata.emplace_back("log_prefactor", fmt(est.log_prefactor));
    t.metadata.emplace_back("regime", est.regime);
    if (ctx.model.dimension == 2)
        t.metadata.emplace_back("dissipativity_violation", fmt(est.dissipativity_violation));
    t.columns = {"epsilon", "P_numeric", "P_estimate", "relative_deviation", "in_range", "error_estimate"};
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double value = std::exp(est.log_prefactor + est.exponent_per_eps / eps[i]);
        const double p = points[i].probability;
        t.rows.push_back({fmt(eps[i]), fmt(p), fmt(value), fmt((p - value) / value),
                          fmt(value >= 0.0 && value <= 1.0), fmt(points[i].error_estimate)});
    }
    return t;
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

Table run(const ExperimentConfig& cfg, Operation op, const RunOptions& options) {
    Context ctx(cfg, options.jobs);
    Table t;
    switch (op) {
        case Operation::Simulate: t = run_sweep(ctx, true); break;
        case Operation::Sweep: t = run_sweep(ctx, false); break;
        case Operation::Crossing: t = run_crossing(ctx); break;
        case Operation::LoopIntegral: t = run_loop_integral(ctx); break;
        case Operation::Prefactor: t = run_prefactor(ctx); break;
        case Operation::Dissipativity: t = run_dissipativity(ctx); break;
        case Operation::Superadiabatic: t = run_superadiabatic(ctx); break;
        case Operation::Fit: t = run_fit(ctx); break;
        case Operation::Compare: t = run_compare(ctx); break;
    }
    std::vector<std::pair<std::string, std::string>> head = {
        {"tool", std::string(kToolName) + " " + kToolVersion},
        {"operation", config::to_string(op)},
        {"config_hash", config::config_hash(cfg)},
    };
    if (op != Operation::Fit) {
        add_provenance(t, cfg);
        head.emplace_back("model", cfg.model + " " + config::describe_params(cfg));
    }
    head.insert(head.end(), {
        {"tolerances", "integrator=" + fmt(cfg.integrator_tolerance) + " truncation=" + fmt(cfg.truncation_tolerance) +
                           " quadrature=" + fmt(cfg.quadrature_tolerance) + " max_steps=" + fmt(cfg.max_steps)},
    });
    t.metadata.insert(t.metadata.begin(), head.begin(), head.end());
    return t;
}

std::string to_csv(const Table& table) {
    std::ostringstream o;
    for (const auto& [k, v] : table.metadata) o << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) o << (i ? "," : "") << table.columns[i];
    o << "\n";
    for (const auto& r : table.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
        o << "\n";
    }
    for (const auto& s : table.summary) o << "# " << s << "\n";
    return o.str();
}

int CsvData::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

CsvData parse_csv(const std::string& text) {
    CsvData d;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!d.columns.empty()) continue;
            const auto colon = line.find(": ");
            if (colon != std::string::npos && colon > 2) d.metadata[line.substr(2, colon - 2)] = line.substr(colon + 2);
            continue;
        }
        if (d.columns.empty())
            d.columns = split(line);
        else
            d.rows.push_back(split(line));
    }
    return d;
}

std::string manifest_json(const ExperimentConfig& cfg, Operation op, const Table& table, const std::string& csv_text) {
    nlohmann::ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["operation"] = config::to_string(op);
    j["config_hash"] = config::config_hash(cfg);
    j["config"] = config::to_toml(cfg);
    j["output"] = cfg.output;
    j["columns"] = table.columns;
    j["rows"] = table.rows.size();
    j["csv_fnv1a"] = fnv1a(csv_text);
    return j.dump(2) + "\n";
}

}  // namespace adiabatic::experiment
