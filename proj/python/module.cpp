#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adiabatic/asymptotics.hpp"
#include "adiabatic/complexplane.hpp"
#include "adiabatic/config.hpp"
#include "adiabatic/experiment.hpp"
#include "adiabatic/propagator.hpp"
#include "adiabatic/superadiabatic.hpp"

namespace py = pybind11;
using namespace adiabatic;

namespace {

HamiltonianModel make_model(const std::string& name, const py::kwargs& kwargs) {
    std::map<std::string, double> params;
    for (const auto& [k, v] : kwargs) params[py::cast<std::string>(k)] = py::cast<double>(v);
    return models::by_name(name, params);
}

CrossingPoint first_crossing(const HamiltonianModel& m, std::pair<int, int> pair, double reach) {
    const auto all = find_crossings(m, pair, reach);
    if (all.empty()) throw DomainError("no crossing of the pair in the upper strip");
    return all.front();
}

py::dict crossing_dict(const CrossingPoint& c) {
    py::dict d;
    d["location"] = c.location;
    d["pair"] = c.pair;
    d["order_check"] = c.order_check;
    d["residual"] = c.residual;
    d["iterations"] = c.iterations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adiabatic transition laboratory: propagation, complex crossings, superadiabatic bases";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<HamiltonianModel>(m, "Model")
        .def_readonly("name", &HamiltonianModel::name)
        .def_readonly("dimension", &HamiltonianModel::dimension)
        .def_readonly("strip_halfwidth", &HamiltonianModel::strip_halfwidth)
        .def_readonly("params", &HamiltonianModel::params)
        .def_readonly("scattering_safe", &HamiltonianModel::scattering_safe)
        .def("evaluate", &HamiltonianModel::evaluate, py::arg("z"))
        .def("__call__", &HamiltonianModel::evaluate, py::arg("z"))
        .def("__repr__", [](const HamiltonianModel& h) { return "<Model " + h.name + ">"; });

    m.def("model", &make_model, py::arg("name"), "Catalog model with keyword parameters (defaults fill the rest).");
    m.def("catalog", &models::catalog);
    m.def("parameter_defaults", &models::parameter_defaults, py::arg("name"));

    m.def(
        "propagate",
        [](const HamiltonianModel& model, double eps, double t0, double t1, double tolerance) {
            PropagateOptions o;
            o.tolerance = tolerance;
            const auto r = propagate(model, eps, t0, t1, o);
            py::dict d;
            d["U"] = r.U;
            d["steps"] = r.step_count;
            d["error_estimate"] = r.error_estimate;
            d["unitarity_defect"] = r.unitarity_defect;
            return d;
        },
        py::arg("model"), py::arg("epsilon"), py::arg("t0"), py::arg("t1"), py::arg("tolerance") = 1e-10);

    m.def(
        "transition_probability",
        [](const HamiltonianModel& model, double eps, int from, int to, double tolerance) {
            ScatteringOptions o;
            o.propagate.tolerance = tolerance;
            const auto r = transition_probability(model, eps, from, to, o);
            py::dict d;
            d["probability"] = r.probability;
            d["t_used"] = r.t_used;
            d["unitarity_defect"] = r.unitarity_defect;
            d["error_estimate"] = r.error_estimate;
            return d;
        },
        py::arg("model"), py::arg("epsilon"), py::arg("from_label") = 1, py::arg("to_label") = 2,
        py::arg("tolerance") = 1e-10);

    m.def(
        "find_crossings",
        [](const HamiltonianModel& model, std::pair<int, int> pair, double reach) {
            py::list out;
            for (const auto& c : find_crossings(model, pair, reach)) out.append(crossing_dict(c));
            return out;
        },
        py::arg("model"), py::arg("pair") = std::pair<int, int>{1, 2}, py::arg("reach") = 4.0);

    m.def(
        "loop_integral",
        [](const HamiltonianModel& model, int label, std::pair<int, int> pair, double half_width, double margin) {
            const auto cp = first_crossing(model, pair, 4.0);
            const auto r = loop_integral(model, loop_around(model, cp, half_width, margin), label);
            py::dict d;
            d["value"] = r.value;
            d["exchanged"] = r.exchanged;
            d["partner"] = r.partner;
            d["error_estimate"] = r.error_estimate;
            d["crossing"] = cp.location;
            return d;
        },
        py::arg("model"), py::arg("label") = 1, py::arg("pair") = std::pair<int, int>{1, 2},
        py::arg("half_width") = 1.0, py::arg("margin") = 0.25, "Eigenvalue integral around the first crossing.");

    m.def(
        "geometric_prefactor",
        [](const HamiltonianModel& model, int label, std::pair<int, int> pair, double half_width, double margin) {
            const auto cp = first_crossing(model, pair, 4.0);
            const auto g = geometric_prefactor(model, loop_around(model, cp, half_width, margin), label);
            py::dict d;
            d["theta"] = g.theta;
            d["partner"] = g.partner;
            d["complement_defect"] = g.complement_defect;
            d["error_estimate"] = g.error_estimate;
            return d;
        },
        py::arg("model"), py::arg("label") = 1, py::arg("pair") = std::pair<int, int>{1, 2},
        py::arg("half_width") = 1.0, py::arg("margin") = 0.25);

    m.def(
        "asymptotic_estimate",
        [](const HamiltonianModel& model, double eps) {
            const auto e = model.dimension == 2 ? theorem1_estimate(model, eps) : theorem1prime_estimate(model, eps);
            py::dict d;
            d["value"] = e.value;
            d["exponent_per_eps"] = e.exponent_per_eps;
            d["log_prefactor"] = e.log_prefactor;
            d["regime"] = e.regime;
            d["in_range"] = e.in_range;
            return d;
        },
        py::arg("model"), py::arg("epsilon"),
        "Single-crossing formula for two levels, product formula for the three-level cascade.");

    m.def(
        "fit_decay_rate",
        [](const std::vector<double>& eps, const std::vector<double>& p, double floor) {
            if (eps.size() != p.size()) throw DomainError("fit_decay_rate: epsilon and P lengths differ");
            std::vector<std::pair<double, double>> s;
            for (std::size_t i = 0; i < eps.size(); ++i) s.emplace_back(eps[i], p[i]);
            const auto f = fit_decay_rate(s, floor);
            py::dict d;
            d["gamma_fit"] = f.gamma_fit;
            d["prefactor_fit"] = f.prefactor_fit;
            d["r_squared"] = f.r_squared;
            d["excluded"] = f.excluded;
            return d;
        },
        py::arg("epsilons"), py::arg("probabilities"), py::arg("noise_floor") = 0.0);

    m.def(
        "superadiabatic_transition",
        [](const HamiltonianModel& model, double eps, int q, double t0, double t1) {
            return superadiabatic_transition(model, eps, q, t0, t1);
        },
        py::arg("model"), py::arg("epsilon"), py::arg("q"), py::arg("t0"), py::arg("t1"));

    m.def(
        "optimal_truncation",
        [](const HamiltonianModel& model, double eps, int q_max, double t0, double t1) {
            const auto r = optimal_truncation(model, eps, q_max, t0, t1);
            py::dict d;
            d["q_star"] = r.q_star;
            d["warning"] = r.warning;
            d["defects"] = r.defects;
            return d;
        },
        py::arg("model"), py::arg("epsilon"), py::arg("q_max"), py::arg("t0"), py::arg("t1"));

    m.def(
        "validate",
        [](const std::string& text) { return config::validate(text).errors; }, py::arg("text"),
        "Errors of a config text; empty when valid.");
    m.def("defaults", &config::defaults_text);
    m.def(
        "run",
        [](const std::string& text, const std::string& operation, int jobs) {
            auto v = config::validate(text);
            if (!v.ok()) {
                std::string msg = "invalid config:";
                for (const auto& e : v.errors) msg += "\n  " + e;
                throw DomainError(msg);
            }
            const auto op = config::operation_from_string(operation);
            if (!op) throw DomainError("unknown operation '" + operation + "'");
            py::gil_scoped_release release;
            return experiment::to_csv(experiment::run(v.config, *op, {.jobs = jobs}));
        },
        py::arg("config"), py::arg("operation"), py::arg("jobs") = 1, "Runs an experiment and returns the CSV text.");

    m.attr("__version__") = experiment::kToolVersion;
}
