#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "garsamp/config.hpp"
#include "garsamp/examples.hpp"
#include "garsamp/expression.hpp"
#include "garsamp/verify.hpp"

namespace py = pybind11;
using namespace garsamp;
using nlohmann::json;

namespace {

// Configs cross the boundary as JSON text; the Python layer handles paths
// and dicts.
ModelConfig config_from(const std::string& text) { return parse_config(json::parse(text)); }

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict trace_dict(const SamplerTrace& t) {
    py::dict d;
    d["samples"] = to_array(t.samples);
    d["proposals"] = t.proposals;
    d["total_proposals"] = t.total_proposals;
    d["acceptance_rate"] = t.acceptance_rate();
    return d;
}

py::dict bound_dict(const BoundReport& r) {
    py::dict d;
    const RegionBound& b = r.best();
    d["method"] = r.method;
    d["gamma"] = r.gamma;
    d["L"] = r.likelihood_bound();
    d["region"] = b.region;
    d["minimizer"] = b.minimizer;
    d["history"] = r.history;
    return d;
}

}  // namespace

PYBIND11_MODULE(_garsamp, m) {
    m.doc() = "Likelihood-bound rejection sampling and generalized adaptive rejection sampling";

    // Translators run in reverse registration order: base class first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<Expression>(m, "Expression")
        .def(py::init(&parse_expression), py::arg("text"))
        .def("__call__", &Expression::operator(), py::arg("x"))
        .def("jet", [](const Expression& e, double x) {
            Jet j = e.jet(x);
            return py::make_tuple(j.value, j.d1, j.d2);
        }, py::arg("x"), "Value, first and second derivative.")
        .def_property_readonly("text", &Expression::text);

    m.def("builtin_config", &builtin_config_text, py::arg("id"));

    m.def("bound", [](const std::string& cfg, const std::string& method, int iters) {
        return bound_dict(bound_by_name(config_from(cfg), method, iters));
    }, py::arg("config"), py::arg("method") = "bm2", py::arg("iters") = 3);

    m.def("bound_table", [](const std::string& cfg) {
        py::list out;
        for (const auto& r : bound_table(config_from(cfg))) {
            py::dict d;
            d["method"] = r.method;
            d["gamma"] = r.gamma;
            d["L"] = r.L;
            d["region"] = r.region;
            d["minimizer"] = r.minimizer;
            out.append(d);
        }
        return out;
    }, py::arg("config"));

    m.def("sample", [](const std::string& cfg, const std::string& algorithm, std::size_t n, std::uint64_t seed) {
        ModelConfig c = config_from(cfg);
        SamplerTrace t;
        {
            py::gil_scoped_release release;
            RandomSource rng(seed);
            t = sample_config(c, algorithm, n, rng);
        }
        return trace_dict(t);
    }, py::arg("config"), py::arg("algorithm") = "gars", py::arg("n") = 1000, py::arg("seed") = 1);

    m.def("gibbs", [](const std::string& cfg, std::size_t n, std::uint64_t seed, const std::string& variant,
                      std::size_t burn) {
        ModelConfig c = config_from(cfg);
        if (!c.model2d) throw ContractError("config has no model2d section");
        if (variant != "gars" && variant != "fixed") throw ParameterError("variant must be 'gars' or 'fixed'");
        GibbsOptions opt;
        opt.burn = burn;
        opt.gars.rule = c.extra_point_rule;
        GibbsResult res;
        {
            py::gil_scoped_release release;
            RandomSource rng(seed);
            res = variant == "fixed" ? gibbs_fixed_rs(*c.model2d, n, rng, opt) : gibbs_gars(*c.model2d, n, rng, opt);
        }
        py::array_t<double> chain({res.chain.size(), std::size_t{2}});
        auto w = chain.mutable_unchecked<2>();
        for (std::size_t i = 0; i < res.chain.size(); ++i) {
            w(i, 0) = res.chain[i][0];
            w(i, 1) = res.chain[i][1];
        }
        py::dict d = trace_dict(res.trace);
        d["chain"] = chain;
        return d;
    }, py::arg("config"), py::arg("n") = 1000, py::arg("seed") = 1, py::arg("variant") = "gars",
       py::arg("burn") = 0);

    m.def("verify", [](const std::string& cfg) { return verify_suite(json::parse(cfg)).to_json().dump(); },
          py::arg("config"), "JSON text of the verification report.");

    m.def("run_example", [](int id, const std::string& out_dir, const std::string& overrides) {
        return run_example(id, json::parse(overrides), out_dir).dump();
    }, py::arg("id"), py::arg("out_dir"), py::arg("overrides") = "{}", "JSON text of the summary.");
}
