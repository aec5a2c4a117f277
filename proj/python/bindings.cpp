#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "qnkit/bounds.hpp"
#include "qnkit/error.hpp"
#include "qnkit/exact.hpp"
#include "qnkit/model_io.hpp"
#include "qnkit/pam.hpp"
#include "qnkit/study.hpp"
#include "qnkit/uja.hpp"
#include "qnkit/uja2.hpp"

namespace py = pybind11;
using namespace qnkit;

namespace {

ClosedModel closed(const std::vector<double>& demands, double think_time, int population)
{
    ClosedModel m;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        m.stations.push_back(Station::fixed("s" + std::to_string(i + 1), demands[i]));
    }
    m.think_time = think_time;
    m.population = population;
    return m;
}

py::dict solver_dict(const SolverResult& r)
{
    py::dict d;
    d["stations"] = r.station_ids;
    d["throughput"] = r.throughput;
    d["utilization"] = r.utilization;
    d["queue_length"] = r.queue_length;
    d["residence_time"] = r.residence_time;
    return d;
}

SolverResult solve_closed(const ClosedModel& model, const std::string& method)
{
    if (method == "convolution") {
        return solve_convolution(model);
    }
    if (method == "mva") {
        return mva(model);
    }
    if (method == "oracle") {
        return metrics_from_G(model, oracle_enumerate(model));
    }
    throw ParseError("unknown method '" + method + "' (expected convolution, mva, oracle)");
}

PamVariant pam_variant(const std::string& name)
{
    if (name == "basic") {
        return PamVariant::Basic;
    }
    if (name == "improved") {
        return PamVariant::Improved;
    }
    if (name == "two") {
        return PamVariant::Two;
    }
    throw ParseError("unknown PAM variant '" + name + "' (expected basic, improved, two)");
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Closed queueing network solvers, approximations and throughput bounds.";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ModelError>(m, "ModelError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<ModelDocument>(m, "Model")
        .def_readonly("classes", &ModelDocument::classes)
        .def_readonly("populations", &ModelDocument::populations)
        .def_readonly("think_times", &ModelDocument::think_times)
        .def_readonly("metadata", &ModelDocument::metadata)
        .def_property_readonly("station_ids",
                               [](const ModelDocument& d) {
                                   std::vector<std::string> ids;
                                   for (const auto& s : d.stations) {
                                       ids.push_back(s.id);
                                   }
                                   return ids;
                               })
        .def("to_json", &serialize_model)
        .def("__eq__", [](const ModelDocument& a, const ModelDocument& b) { return a == b; });

    m.def("parse_model", &parse_model, py::arg("text"));
    m.def("load_model", &load_model_file, py::arg("path"));

    m.def(
        "solve",
        [](const ModelDocument& doc, const std::string& method) {
            return solver_dict(solve_closed(to_closed_model(doc), method));
        },
        py::arg("model"), py::arg("method") = "convolution",
        "Single-class throughput, utilization and queue lengths for k = 1..N.");
    m.def(
        "solve_demands",
        [](const std::vector<double>& demands, int population, double think_time, const std::string& method) {
            return solver_dict(solve_closed(closed(demands, think_time, population), method));
        },
        py::arg("demands"), py::arg("population"), py::arg("think_time") = 0.0, py::arg("method") = "convolution");
    m.def(
        "solve_multichain",
        [](const ModelDocument& doc) {
            const auto r = mva_multichain(to_multichain_model(doc));
            py::dict d;
            d["stations"] = r.station_ids;
            d["throughput"] = r.throughput;
            d["utilization"] = r.utilization;
            d["queue_length"] = r.queue_length;
            return d;
        },
        py::arg("model"));

    py::class_<DemandMoments>(m, "DemandMoments")
        .def_readonly("stations", &DemandMoments::stations)
        .def_readonly("mean", &DemandMoments::mean)
        .def_readonly("cv", &DemandMoments::cv)
        .def_readonly("skewness", &DemandMoments::skewness)
        .def_readonly("power_sums", &DemandMoments::power_sums)
        .def("E", &DemandMoments::E, py::arg("j"));
    m.def("moments", &moments, py::arg("demands"), py::arg("max_order") = kDefaultMomentOrder);
    m.def("t_series", &t_series, py::arg("moments"), py::arg("jobs"), py::arg("order"),
          "Order-j throughput approximation T_j(k); raises NumericError on divergence.");
    m.def(
        "uja2",
        [](const std::vector<double>& x, const std::vector<double>& y, int k, int l) {
            const auto t = uja2_first_order(x, y, k, l);
            return py::make_tuple(t.class1, t.class2);
        },
        py::arg("x"), py::arg("y"), py::arg("k"), py::arg("l"));

    py::class_<BoundInterval>(m, "BoundInterval")
        .def_readonly("lower", &BoundInterval::lower)
        .def_readonly("upper", &BoundInterval::upper)
        .def_readonly("level", &BoundInterval::level)
        .def_readonly("population", &BoundInterval::population)
        .def_property_readonly("label", &BoundInterval::label)
        .def("contains", &BoundInterval::contains, py::arg("x"), py::arg("tol") = 0.0)
        .def_property_readonly("error_measure", [](const BoundInterval& b) { return pbh_error_measure(b); })
        .def("__repr__", [](const BoundInterval& b) {
            return "<BoundInterval " + b.label() + " [" + std::to_string(b.lower) + ", " + std::to_string(b.upper)
                   + "]>";
        });
    m.def(
        "bound",
        [](const std::vector<double>& loadings, int population, const std::string& method, int level,
           double think_time) {
            return evaluate_bound(BoundModelView::from_loadings(loadings, think_time, population),
                                  parse_bound_method(method), level);
        },
        py::arg("loadings"), py::arg("population"), py::arg("method"), py::arg("level") = 0,
        py::arg("think_time") = 0.0);

    m.def(
        "pam",
        [](const std::vector<std::vector<double>>& loadings, const std::vector<int>& populations,
           const std::string& variant) {
            MultichainModel model;
            for (std::size_t i = 0; i < loadings.size(); ++i) {
                Station s = Station::fixed("s" + std::to_string(i + 1), 0.0);
                s.demands = loadings[i];
                model.stations.push_back(std::move(s));
            }
            model.populations = populations;
            const auto v = pam_variant(variant);
            const auto r = v == PamVariant::Basic      ? pam_basic(model)
                           : v == PamVariant::Improved ? pam_improved(model)
                                                       : pam_two(model);
            py::dict d;
            d["throughput"] = r.throughput;
            d["utilization"] = r.utilization;
            d["scaled"] = r.scaled;
            return d;
        },
        py::arg("loadings"), py::arg("populations"), py::arg("variant") = "basic",
        "loadings[station][chain]; returns per-chain throughput and per-station utilization.");

    m.def(
        "run_study",
        [](const std::string& config_json, std::optional<std::uint64_t> seed) {
            auto config = parse_study_config(config_json);
            if (seed) {
                config.seed = *seed;
            }
            const auto r = run_study(config);
            py::dict d;
            d["report"] = format_study_report(r);
            d["attempts"] = r.attempts;
            py::list errors;
            for (const auto& e : r.errors) {
                py::dict s;
                s["name"] = e.name;
                s["mean"] = e.mean;
                s["p95"] = e.p95;
                s["max"] = e.max;
                s["within10"] = e.within10;
                s["diverged"] = e.diverged;
                errors.append(s);
            }
            d["errors"] = errors;
            return d;
        },
        py::arg("config_json") = "{}", py::arg("seed") = py::none());
}
