#include "garsamp/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "builtin_configs.hpp"

namespace garsamp {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<double>();
}

double required(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ModelError(where + ": missing '" + key + "'");
    return j.at(key).get<double>();
}

// null stands for an infinite end.
ExtReal end_value(const json& j, bool upper) {
    if (j.is_null()) return upper ? ExtReal::pos_inf() : ExtReal::neg_inf();
    return ExtReal(j.get<double>());
}

MarginalPotential parse_potential(const json& j, const std::string& where) {
    std::string family = j.value("family", "gaussian");
    if (family == "gaussian" || family == "quadratic") {
        if (j.contains("sigma")) return gaussian_potential(j.at("sigma").get<double>());
        return quadratic_potential(number(j, "weight", 1.0));
    }
    if (family == "gamma")
        return gamma_potential(required(j, "theta", where), required(j, "lambda", where));
    if (family == "lp") return lp_potential(required(j, "p", where), number(j, "weight", 1.0));
    if (family == "cosh") return cosh_potential(number(j, "weight", 1.0));
    if (family == "custom") {
        if (!j.contains("expr")) throw ModelError(where + ": custom potential needs 'expr'");
        Expression e = parse_expression(j.at("expr").get<std::string>());
        return custom_potential(e.as_jet_fn(), j.value("convex", false));
    }
    throw ModelError(where + ": unknown noise family '" + family + "'");
}

double noise_mode(const json& j) {
    if (j.value("family", "gaussian") == "gamma")
        return (j.at("theta").get<double>() - 1) / j.at("lambda").get<double>();
    return 0.0;
}

Nonlinearity parse_nonlinearity(const json& j, const std::string& where) {
    if (!j.contains("expr")) throw ModelError(where + ": nonlinearity needs 'expr'");
    std::string text = j.at("expr").get<std::string>();
    Expression e = parse_expression(text);
    Interval support;
    if (j.contains("support")) {
        const auto& s = j.at("support");
        support = Interval{end_value(s.at(0), false), end_value(s.at(1), true)};
    }
    std::vector<double> breaks = j.value("breaks", std::vector<double>{});
    std::vector<BranchDecl> decl;
    if (!j.contains("branches")) throw ModelError(where + ": nonlinearity needs 'branches'");
    for (const auto& b : j.at("branches"))
        decl.push_back(BranchDecl{b.at("monotone").get<int>(), b.at("curvature").get<int>()});
    return Nonlinearity(e.as_jet_fn(), support, breaks, decl, text, true,
                        j.value("verify_window", 50.0));
}

Prior parse_prior(const json& j, const std::string& where) {
    std::string family = j.value("family", "gaussian");
    double mode = number(j, "mode", 0.0);
    if (family == "gaussian") {
        double sigma = j.contains("sigma") ? j.at("sigma").get<double>()
                                           : 1.0 / std::sqrt(2.0 * number(j, "weight", 1.0));
        return gaussian_prior(mode, sigma);
    }
    return Prior{parse_potential(j, where), mode, {}};
}

}  // namespace

json merge_overrides(json doc, const json& overrides) {
    if (!overrides.is_object()) return overrides;
    if (!doc.is_object()) doc = json::object();
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (it.value().is_null()) doc.erase(it.key());
        else doc[it.key()] = merge_overrides(doc.contains(it.key()) ? doc[it.key()] : json(), it.value());
    }
    return doc;
}

namespace {

ModelConfig parse_config_impl(const json& doc) {
    ModelConfig cfg;
    cfg.doc = doc;
    cfg.name = doc.value("name", "model");
    if (doc.contains("observations")) {
        std::vector<Observation> obs;
        std::size_t k = 0;
        for (const auto& o : doc.at("observations")) {
            std::string where = "observation " + std::to_string(k++);
            double y = required(o, "y", where);
            const json& noise = o.at("noise");
            if (o.contains("shift")) {
                const auto& s = o.at("shift");
                y -= s.is_string() ? (s.get<std::string>() == "mode" ? noise_mode(noise)
                                                                     : throw ModelError(where + ": bad shift"))
                                   : s.get<double>();
            }
            MarginalPotential v = parse_potential(noise, where);
            verify_potential(v);
            obs.push_back(Observation{y, parse_nonlinearity(o.at("nonlinearity"), where), v});
        }
        std::optional<Prior> prior;
        if (doc.contains("prior")) prior = parse_prior(doc.at("prior"), "prior");
        cfg.model.emplace(std::move(obs), std::move(prior), number(doc, "constant", 0.0));
    }
    if (doc.contains("model2d")) {
        const json& m = doc.at("model2d");
        std::vector<std::array<double, 2>> sensors;
        for (const auto& s : m.at("sensors")) sensors.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
        std::vector<double> y = m.at("y").get<std::vector<double>>();
        std::vector<MarginalPotential> noise;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const json& nj = m.at("noise").is_array() ? m.at("noise").at(k) : m.at("noise");
            noise.push_back(parse_potential(nj, "model2d noise"));
            verify_potential(noise.back());
        }
        const json& pj = m.at("priors");
        auto prior_at = [&](int c) { return parse_prior(pj.is_array() ? pj.at(c) : pj, "model2d prior"); };
        cfg.model2d.emplace(std::move(sensors), std::move(y), std::move(noise),
                            std::array<Prior, 2>{prior_at(0), prior_at(1)});
    }
    if (!cfg.model && !cfg.model2d) throw ModelError("config defines neither 'observations' nor 'model2d'");
    if (doc.contains("bounds")) {
        const json& b = doc.at("bounds");
        if (b.contains("transform_inverse"))
            cfg.transform_inverse = parse_expression(b.at("transform_inverse").get<std::string>());
        cfg.bm2_iterations = b.value("bm2_iterations", 3);
        if (b.contains("gamma_override")) cfg.gamma_override = b.at("gamma_override").get<double>();
    }
    if (doc.contains("sampling")) {
        const json& s = doc.at("sampling");
        cfg.ars_init = s.value("ars_init", std::vector<double>{});
        std::string rule = s.value("extra_point_rule", "midpoint");
        if (rule == "uniform") cfg.extra_point_rule = ExtraPointRule::uniform;
        else if (rule != "midpoint") throw ModelError("unknown extra_point_rule '" + rule + "'");
    }
    if (doc.contains("oracle")) {
        const json& o = doc.at("oracle");
        if (o.contains("domain")) cfg.oracle_domain = {o.at("domain").at(0).get<double>(), o.at("domain").at(1).get<double>()};
        cfg.oracle_points = o.value("points", cfg.oracle_points);
    }
    if (doc.contains("experiment")) cfg.experiment = doc.at("experiment");
    return cfg;
}

}  // namespace

ModelConfig parse_config(const json& doc) {
    try {
        return parse_config_impl(doc);
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed config: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("config '" + path + "': " + e.what());
    }
}

ModelConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

const std::string& builtin_config_text(int id) {
    static const std::string texts[] = {builtin::example1, builtin::example2, builtin::example3};
    if (id < 1 || id > 3) throw ParameterError("example id must be 1, 2 or 3");
    return texts[id - 1];
}

json builtin_config_doc(int id) { return json::parse(builtin_config_text(id)); }

}  // namespace garsamp
