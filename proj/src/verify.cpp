#include "garsamp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "garsamp/config.hpp"
#include "garsamp/samplers.hpp"

namespace garsamp {

using nlohmann::json;

bool VerifyReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json VerifyReport::to_json() const {
    json out = {{"pass", pass()}, {"checks", json::array()}};
    for (const auto& c : checks) out["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return out;
}

namespace {

std::vector<double> grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = lo + (hi - lo) * k / static_cast<double>(n - 1);
    return g;
}

std::string at(double x) {
    std::ostringstream s;
    s << "at x = " << x;
    return s.str();
}

class Suite {
public:
    Suite(VerifyReport& r, const VerifyOptions& o) : report_(r), opt_(o) {}

    void add(std::string name, bool pass, std::string detail = "") {
        report_.checks.push_back(CheckResult{std::move(name), pass, std::move(detail)});
    }

    // Runs body; an Error escaping it fails the check.
    template <class F>
    void guarded(const std::string& name, F body) {
        try {
            body();
        } catch (const Error& e) {
            add(name, false, e.what());
        }
    }

    void model_1d(const std::string& prefix, const ObservationModel& m, double dlo, double dhi,
                  std::optional<double> gamma_override) {
        const ObservationModel lm = m.without_prior();
        const double lo = std::max(dlo, lm.support().lo.as_double());
        const double hi = std::min(dhi, lm.support().hi.as_double());
        const std::size_t n = opt_.grid_points;
        const double step = (hi - lo) / (n - 1);
        auto V = [&lm](double x) { return observation_potential(lm, x); };

        double vmin = 0.0;
        guarded(prefix + "grid_minimum", [&] {
            vmin = minimize_grid_refine(V, lo, hi, static_cast<int>(n)).value;
            add(prefix + "grid_minimum", std::isfinite(vmin));
        });

        guarded(prefix + "search_interval_containment", [&] {
            bool ok = true;
            std::string detail;
            for (std::size_t j = 0; j < lm.region_count(); ++j) {
                const Interval& R = lm.regions()[j];
                double a = std::max(lo, R.lo.as_double()), b = std::min(hi, R.hi.as_double());
                if (!(b > a)) continue;
                Interval I;
                try {
                    I = ml_search_interval(simple_estimates(lm, j));
                } catch (const DegenerateInterval&) {
                    continue;
                }
                Minimum mn = minimize_grid_refine(V, a, b, static_cast<int>(n));
                if (!std::isfinite(mn.value)) continue;
                double xhat = mn.x;
                double tol = 2 * step + 1e-9;
                if (xhat < I.lo.as_double() - tol || xhat > I.hi.as_double() + tol) {
                    ok = false;
                    detail = "region " + std::to_string(j) + ": minimizer " + at(xhat) + " outside the interval";
                }
            }
            add(prefix + "search_interval_containment", ok, detail);
        });

        guarded(prefix + "bm1_minorants", [&] {
            BoundReport rep = bm1_bound(lm);
            bool lines_ok = true, dom_ok = true;
            std::string detail;
            for (const auto& rb : rep.regions) {
                for (std::size_t i = 0; i < lm.size(); ++i)
                    if (!check_minorant(rb.lines[i], lm.branch(i, rb.region), lm.observations()[i].y,
                                        rb.interval, static_cast<int>(n))) {
                        lines_ok = false;
                        detail = "observation " + std::to_string(i) + " region " + std::to_string(rb.region);
                    }
                double a = std::max(lo, rb.interval.lo.as_double()), b = std::min(hi, rb.interval.hi.as_double());
                if (!(b > a)) continue;
                for (double x : grid(a, b, n)) {
                    double mod = modified_potential(lm, rb.lines, x);
                    if (mod > V(x) + 1e-9 * std::max(1.0, std::abs(V(x)))) {
                        dom_ok = false;
                        detail = "modified potential above the true one " + at(x);
                        break;
                    }
                }
            }
            add(prefix + "bm1_minorants", lines_ok, lines_ok ? "" : detail);
            add(prefix + "modified_dominance", dom_ok, dom_ok ? "" : detail);
        });

        std::optional<double> bm2_gamma;
        guarded(prefix + "bm2_monotone", [&] {
            BoundReport rep = bm2_bound(lm, 3);
            bm2_gamma = rep.gamma;
            bool ok = std::is_sorted(rep.history.begin(), rep.history.end(),
                                     [](double next, double prev) { return next < prev - 1e-12; });
            add(prefix + "bm2_monotone", ok);
        });

        auto sound = [&](const std::string& method, auto compute) {
            std::string name = prefix + "soundness_" + method;
            try {
                double g = compute();
                bool ok = g <= vmin + 1e-9 * std::max(1.0, std::abs(vmin));
                std::ostringstream d;
                d << "gamma " << g << ", grid minimum " << vmin;
                add(name, ok, d.str());
            } catch (const ContractError& e) {
                add(name, true, std::string("not applicable: ") + e.what());
            } catch (const Error& e) {
                add(name, false, e.what());
            }
        };
        sound("bm1", [&] { return bm1_bound(lm).gamma; });
        sound("bm2", [&] { return bm2_bound(lm, 3).gamma; });
        sound("quad", [&] { return quad_bound(lm).gamma; });
        sound("lp", [&] { return lp_bound(lm).gamma; });
        sound("tangent", [&] { return tangent_bound(lm).gamma; });
        if (transform_inverse_)
            sound("transform", [&] {
                return transform_bound(lm, [this](double x) { return (*transform_inverse_)(x); }).gamma;
            });

        if (opt_.sampling && m.prior() && m.prior()->sampler && (gamma_override || bm2_gamma)) {
            const std::string name = prefix + "fixed_rs";
            double gamma = gamma_override ? *gamma_override : *bm2_gamma;
            try {
                RandomSource rng(opt_.seed);
                rejection_sample_fixed(lm, m.prior()->sampler, std::exp(-gamma), opt_.samples, rng);
                add(name, true);
            } catch (const BoundViolation& e) {
                std::ostringstream d;
                d << "bound violation " << at(e.x) << " (ratio " << e.ratio << ")";
                add(name, false, d.str());
            } catch (const Error& e) {
                add(name, false, e.what());
            }
        }

        gars(prefix, m, lo, hi);
    }

    void gars(const std::string& prefix, const ObservationModel& m, double lo, double hi) {
        std::optional<GarsState> st;
        try {
            RandomSource rng(opt_.seed);
            st.emplace(gars_init(m, {}, &rng));
        } catch (const ContractError& e) {
            add(prefix + "gars", true, std::string("not applicable: ") + e.what());
            return;
        } catch (const Error& e) {
            add(prefix + "gars", false, e.what());
            return;
        }
        const auto xs = grid(lo, hi, opt_.grid_points);
        guarded(prefix + "gars_minorants", [&] {
            bool ok = true;
            std::string detail;
            for (std::size_t t = 0; t < st->terms().size(); ++t) {
                if (!st->minorants()[t]) continue;
                const Observation& o = st->terms()[t];
                for (double x : xs) {
                    double r = o.y - (*st->minorants()[t])(x), g = o.y - o.g(x);
                    double tol = 1e-9 * std::max(1.0, std::abs(g));
                    if (std::abs(r) > std::abs(g) + tol || r * g < -tol) {
                        ok = false;
                        detail = "term " + std::to_string(t) + " " + at(x);
                        break;
                    }
                }
            }
            add(prefix + "gars_minorants", ok, detail);
        });
        auto domination = [&](const std::string& name) {
            guarded(name, [&] {
                bool ok = true;
                std::string detail;
                for (double x : xs) {
                    double w = st->hull()(x), mod = st->modified_potential(x), v = st->target_potential(x);
                    double tol = 1e-9 * std::max(1.0, std::abs(v));
                    if (w > mod + tol || mod > v + tol) {
                        ok = false;
                        detail = "hull or modified potential above the target " + at(x);
                        break;
                    }
                }
                add(name, ok, detail);
            });
        };
        domination(prefix + "hull_domination");
        guarded(prefix + "envelope_normalization", [&] {
            const auto& d = st->density();
            bool ok = std::isfinite(d.log_normalizer()) && std::abs(d.cumulative().back() - 1.0) <= 1e-12;
            add(prefix + "envelope_normalization", ok);
        });
        if (!opt_.sampling) return;
        guarded(prefix + "gars_run", [&] {
            RandomSource rng(opt_.seed + 1);
            SamplerTrace t = gars_run(*st, opt_.samples, rng);
            add(prefix + "gars_run", t.samples.size() == opt_.samples);
        });
        domination(prefix + "hull_domination_adapted");
    }

    std::optional<Expression> transform_inverse_;

private:
    VerifyReport& report_;
    const VerifyOptions& opt_;
};

}  // namespace

VerifyReport verify_suite(const json& doc, const VerifyOptions& opt) {
    VerifyReport report;
    Suite suite(report, opt);
    std::optional<ModelConfig> cfg;
    try {
        cfg = parse_config(doc);
        suite.add("model_load", true);
    } catch (const Error& e) {
        suite.add("model_load", false, e.what());
        return report;
    }
    suite.transform_inverse_ = cfg->transform_inverse;
    const double lo = cfg->oracle_domain[0], hi = cfg->oracle_domain[1];
    if (cfg->model) suite.model_1d("", *cfg->model, lo, hi, cfg->gamma_override);
    if (cfg->model2d) {
        suite.transform_inverse_.reset();
        for (int c = 0; c < 2; ++c)
            for (double other : {-1.0, 0.5, 2.0}) {
                std::ostringstream p;
                p << "conditional" << c + 1 << "[" << other << "]:";
                suite.model_1d(p.str(), cfg->model2d->conditional(c, other), lo, hi, cfg->gamma_override);
            }
    }
    return report;
}

}  // namespace garsamp
