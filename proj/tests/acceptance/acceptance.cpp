// Acceptance run: one pass/fail line per criterion.
//   acceptance                 all criteria
//   acceptance --criterion N   criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "garsamp/config.hpp"
#include "garsamp/examples.hpp"
#include "garsamp/verify.hpp"
#include "property_suite.hpp"

using namespace garsamp;

namespace {

struct Result {
    bool pass = true;
    std::ostringstream detail;

    // Records |value - target| <= tol.
    void near(const std::string& label, double value, double target, double tol) {
        bool ok = std::abs(value - target) <= tol;
        pass = pass && ok;
        detail << label << " " << value << " (" << target << " +/- " << tol << (ok ? "" : ", out") << "); ";
    }
    void require(const std::string& label, bool ok, const std::string& info = "") {
        pass = pass && ok;
        detail << label << (info.empty() ? "" : " " + info) << (ok ? "" : " (failed)") << "; ";
    }
};

double pct(double r) { return 100.0 * r; }

Result criterion1() {
    Result r;
    ModelConfig cfg = parse_config(builtin_config_doc(1));
    auto rows = bound_table(cfg);
    auto find = [&](const std::string& m) {
        for (const auto& row : rows)
            if (row.method == m) return row.gamma;
        return std::numeric_limits<double>::quiet_NaN();
    };
    r.near("bm1", find("bm1"), 2.89, 0.01);
    r.near("transform", find("transform"), 1.68, 0.01);
    r.near("tangent", find("tangent"), 1.61, 0.01);
    r.near("bm2", find("bm2"), 3.77, 0.01);
    r.near("optimal", find("optimal"), 3.78, 0.01);
    return r;
}

Result criterion2() {
    Result r;
    ModelConfig cfg = parse_config(builtin_config_doc(1));
    auto rows = bound_table(cfg);
    auto find = [&](const std::string& m) {
        for (const auto& row : rows)
            if (row.method == m) return row.gamma;
        return std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> gammas{0.0, find("bm1"), find("bm2"), find("optimal")};
    const double targets[] = {1.1, 18.0, 40.0, 41.0};
    const double tols[] = {0.3, 1.5, 1.5, 1.5};
    auto rates = rs_rate_curve(*cfg.model, gammas, 10000, 20, 1);
    for (std::size_t k = 0; k < rates.size(); ++k) {
        std::ostringstream label;
        label << "rate% at gamma=" << rates[k].gamma;
        r.near(label.str(), pct(rates[k].rate), targets[k], tols[k]);
    }
    return r;
}

Result criterion3() {
    Result r;
    ModelConfig cfg = parse_config(builtin_config_doc(2));
    GarsOptions opt;
    opt.rule = cfg.extra_point_rule;
    GridOracle o = grid_oracle(*cfg.model, cfg.oracle_domain[0], cfg.oracle_domain[1], cfg.oracle_points);
    auto c = adaptation_curve(*cfg.model, 2000, 20, 7, opt, o.log_mass());
    r.near("1st%", pct(c.first_accepted[0]), 16.0, 4.0);
    r.near("2nd%", pct(c.first_accepted[1]), 53.0, 5.0);
    r.near("20th%", pct(c.first_accepted[19]), 90.0, 4.0);
    r.detail << "pooled 1st/2nd/20th% " << pct(c.pooled[0]) << "/" << pct(c.pooled[1]) << "/" << pct(c.pooled[19])
             << "; ";
    return r;
}

Result criterion4() {
    Result r;
    nlohmann::json doc = builtin_config_doc(2);
    ModelConfig cfg = parse_config(doc);
    GarsOptions opt;
    opt.rule = cfg.extra_point_rule;
    GridOracle o = grid_oracle(*cfg.model, cfg.oracle_domain[0], cfg.oracle_domain[1], cfg.oracle_points);
    auto ks = gars_exactness(*cfg.model, o, 5000, 10, 11, opt);
    int passed = 0;
    for (const auto& e : ks) passed += e.ks < e.threshold;
    r.require("KS below 1.63/sqrt(N)", passed >= 9, std::to_string(passed) + "/10 seeds");
    double a5[] = {5.0};
    auto means = alpha_mean_table(doc, a5, 5000, 10, 13);
    std::ostringstream info;
    info << "max |mean| " << means[0].max_abs << " over " << means[0].runs << " runs";
    r.require("alpha=5 |sample mean| <= 0.1", means[0].max_abs <= 0.1, info.str());
    return r;
}

Result criterion5() {
    Result r;
    ModelConfig cfg = parse_config(builtin_config_doc(3));
    auto cmp = gibbs_comparison(*cfg.model2d, 10000, 100, 5);
    r.near("GARS rate%", pct(cmp.gars.trace.acceptance_rate()), 30.0, 5.0);
    r.near("fixed rate%", pct(cmp.fixed.trace.acceptance_rate()), 4.0, 2.0);
    std::ostringstream info;
    info << cmp.gars_seconds << " s vs " << cmp.fixed_seconds << " s";
    r.require("GARS faster", cmp.gars_seconds < cmp.fixed_seconds, info.str());
    r.detail << "mean per-conditional rate% GARS " << pct(cmp.gars_mean_rate) << ", fixed " << pct(cmp.fixed_mean_rate)
             << "; ";
    return r;
}

Result criterion6() {
    Result r;
    props::Outcome out = props::run_all(25, 2024);
    std::ostringstream info;
    info << out.checks << " checks, " << out.failures.size() << " failures";
    r.require("randomized models", out.failures.empty(), info.str());
    for (std::size_t k = 0; k < out.failures.size() && k < 5; ++k) r.detail << out.failures[k] << "; ";
    for (int id : {1, 2, 3}) {
        VerifyReport rep = verify_suite(builtin_config_doc(id));
        std::string failed;
        for (const auto& c : rep.checks)
            if (!c.pass) failed += c.name + " ";
        r.require("example " + std::to_string(id) + " suite", rep.pass(), failed);
    }
    return r;
}

struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int k = 1; k < argc; ++k)
        if (std::strcmp(argv[k], "--criterion") == 0 && k + 1 < argc) only = std::atoi(argv[++k]);
    const std::vector<Criterion> all{
        {1, "bound table (Example 1)", 5, criterion1},
        {2, "fixed-bound RS acceptance rates (Example 1)", 120, criterion2},
        {3, "GARS adaptation curve (Example 2)", 300, criterion3},
        {4, "GARS exactness (Example 2)", 120, criterion4},
        {5, "Gibbs localization (Example 3)", 300, criterion5},
        {6, "property suites", 180, criterion6},
    };
    bool ok = true;
    for (const auto& c : all) {
        if (only && c.id != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail << "error: " << e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs < c.limit_seconds;
        bool pass = r.pass && in_time;
        ok = ok && pass;
        std::printf("criterion %d %s: %s | %s%sruntime %.2f s (limit %.0f s)\n", c.id, c.title, pass ? "PASS" : "FAIL",
                    r.detail.str().c_str(), in_time ? "" : "TOO SLOW ", secs, c.limit_seconds);
        std::fflush(stdout);
    }
    return ok ? 0 : 1;
}
