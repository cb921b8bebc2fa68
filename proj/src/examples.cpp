#include "garsamp/examples.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "garsamp/log.hpp"

namespace garsamp {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t worker_count() {
    if (const char* env = std::getenv("GARSAMP_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double sd_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mu = mean_of(v), s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / (v.size() - 1));
}

std::size_t region_of(const ObservationModel& m, double x) {
    for (std::size_t j = 0; j < m.region_count(); ++j)
        if (m.regions()[j].contains(x)) return j;
    return 0;
}

BoundRow row_from(const BoundReport& r) {
    const RegionBound& b = r.best();
    return BoundRow{r.method, r.gamma, std::exp(-r.gamma), b.region, b.minimizer};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::vector<BoundRow> bound_table(const ModelConfig& cfg) {
    if (!cfg.model) throw ContractError("bound table needs a one-dimensional model");
    const ObservationModel lm = cfg.model->without_prior();
    std::vector<BoundRow> rows;
    rows.push_back(row_from(bm1_bound(lm)));
    if (cfg.transform_inverse) {
        const Expression& inv = *cfg.transform_inverse;
        rows.push_back(row_from(transform_bound(lm, [&inv](double x) { return inv(x); })));
    }
    for (auto method : {&quad_bound, &lp_bound, &tangent_bound}) {
        try {
            rows.push_back(row_from(method(lm, {})));
        } catch (const ContractError& e) {
            log_message(LogLevel::debug, std::string("bound method skipped: ") + e.what());
        }
    }
    rows.push_back(row_from(bm2_bound(lm, cfg.bm2_iterations)));
    Minimum opt = minimize_grid_refine([&lm](double x) { return observation_potential(lm, x); },
                                       cfg.oracle_domain[0], cfg.oracle_domain[1], 100000);
    rows.push_back(BoundRow{"optimal", opt.value, std::exp(-opt.value), region_of(lm, opt.x), opt.x});
    return rows;
}

std::vector<RateRow> rs_rate_curve(const ObservationModel& m, std::span<const double> gammas,
                                   std::size_t N, std::size_t seeds, std::uint64_t seed) {
    if (!m.prior() || !m.prior()->sampler)
        throw ContractError("rate curve needs a prior with a sampler");
    const ObservationModel lm = m.without_prior();
    const PriorSampler sampler = m.prior()->sampler;
    std::vector<RateRow> rows;
    for (double gamma : gammas) {
        std::vector<std::size_t> props(seeds);
        parallel_for(seeds, [&](std::size_t s) {
            RandomSource rng = RandomSource(seed).split(s);
            props[s] = rejection_sample_fixed(lm, sampler, std::exp(-gamma), N, rng).total_proposals;
        });
        std::vector<double> rates;
        for (std::size_t p : props) rates.push_back(static_cast<double>(N) / p);
        std::size_t total = std::accumulate(props.begin(), props.end(), std::size_t{0});
        rows.push_back(RateRow{gamma, static_cast<double>(N * seeds) / total, sd_of(rates), seeds, total});
    }
    return rows;
}

AdaptationCurve adaptation_curve(const ObservationModel& m, std::size_t replications,
                                 std::size_t samples, std::uint64_t seed, const GarsOptions& opt,
                                 double target_log_mass) {
    std::vector<SamplerTrace> traces(replications);
    parallel_for(replications, [&](std::size_t r) {
        RandomSource rng = RandomSource(seed).split(r);
        traces[r] = gars_run(m, samples, rng, opt);
    });
    AdaptationCurve c;
    c.replications = replications;
    c.first_accepted.assign(samples, 0.0);
    c.pooled.assign(samples, 0.0);
    c.mean_inverse.assign(samples, 0.0);
    c.normalizer_ratio.assign(samples, 0.0);
    std::vector<double> props(samples, 0.0);
    for (const auto& t : traces) {
        for (std::size_t k = 0; k < samples; ++k) {
            c.first_accepted[k] += t.first_accepted[k];
            props[k] += static_cast<double>(t.proposals[k]);
            c.mean_inverse[k] += 1.0 / static_cast<double>(t.proposals[k]);
            c.normalizer_ratio[k] += std::exp(target_log_mass - t.start_log_normalizer[k]);
        }
    }
    const double R = static_cast<double>(replications);
    for (std::size_t k = 0; k < samples; ++k) {
        c.first_accepted[k] /= R;
        c.pooled[k] = R / props[k];
        c.mean_inverse[k] /= R;
        c.normalizer_ratio[k] /= R;
    }
    return c;
}

std::vector<ExactnessRow> gars_exactness(const ObservationModel& m, const GridOracle& oracle,
                                         std::size_t N, std::size_t seeds, std::uint64_t seed,
                                         const GarsOptions& opt) {
    std::vector<ExactnessRow> rows(seeds);
    parallel_for(seeds, [&](std::size_t s) {
        RandomSource rng = RandomSource(seed).split(s);
        SamplerTrace t = gars_run(m, N, rng, opt);
        double d = ks_statistic(t.samples, oracle);
        rows[s] = ExactnessRow{seed + s, d, 1.63 / std::sqrt(static_cast<double>(N)), ks_pvalue(d, N)};
    });
    return rows;
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
    std::vector<double> out;
    for (std::size_t k = 0; k < steps; ++k)
        out.push_back(steps == 1 ? lo : lo + (hi - lo) * k / static_cast<double>(steps - 1));
    return out;
}

std::vector<MeanRow> alpha_mean_table(const json& doc, std::span<const double> alphas,
                                      std::size_t N, std::size_t runs, std::uint64_t seed) {
    std::vector<MeanRow> rows;
    for (double alpha : alphas) {
        json d = doc;
        d["observations"][1]["noise"]["weight"] = alpha;
        ModelConfig cfg = parse_config(d);
        GarsOptions opt;
        opt.rule = cfg.extra_point_rule;
        std::vector<double> means(runs);
        parallel_for(runs, [&](std::size_t r) {
            RandomSource rng = RandomSource(seed).split(r);
            SamplerTrace t = gars_run(*cfg.model, N, rng, opt);
            means[r] = mean_of(t.samples);
        });
        double max_abs = 0.0;
        for (double v : means) max_abs = std::max(max_abs, std::abs(v));
        rows.push_back(MeanRow{alpha, mean_of(means), sd_of(means), max_abs, runs});
    }
    return rows;
}

double mean_inverse_proposals(const SamplerTrace& t) {
    if (t.proposals.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t p : t.proposals) s += 1.0 / static_cast<double>(p);
    return s / t.proposals.size();
}

GibbsComparison gibbs_comparison(const RangeModel2D& model, std::size_t N, std::size_t burn,
                                 std::uint64_t seed, const GarsOptions& opt) {
    using clock = std::chrono::steady_clock;
    GibbsOptions g;
    g.burn = burn;
    g.gars = opt;
    GibbsComparison out;
    RandomSource base(seed);
    {
        RandomSource rng = base.split(0);
        auto t0 = clock::now();
        out.gars = gibbs_gars(model, N, rng, g);
        out.gars_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    }
    {
        RandomSource rng = base.split(1);
        auto t0 = clock::now();
        out.fixed = gibbs_fixed_rs(model, N, rng, g);
        out.fixed_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    }
    out.gars_mean_rate = mean_inverse_proposals(out.gars.trace);
    out.fixed_mean_rate = mean_inverse_proposals(out.fixed.trace);
    return out;
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
}

// Tracks the files of one report so a failed run can remove them.
class ReportFiles {
public:
    explicit ReportFiles(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
    std::string path(const std::string& name) {
        std::string p = (fs::path(dir_) / name).string();
        written_.push_back(p);
        return p;
    }
    void remove_all() {
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }

private:
    std::string dir_;
    std::vector<std::string> written_;
};

std::vector<std::size_t> histogram(std::span<const double> xs, double lo, double hi, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    for (double x : xs) {
        if (x < lo || x >= hi) continue;
        counts[std::min(bins - 1, static_cast<std::size_t>((x - lo) / (hi - lo) * bins))]++;
    }
    return counts;
}

void write_histogram_csv(const std::string& path, std::span<const double> xs, const GridOracle& oracle,
                         double lo, double hi, std::size_t bins) {
    auto counts = histogram(xs, lo, hi, bins);
    const double w = (hi - lo) / bins;
    auto out = open_csv(path);
    out << "bin_lo,bin_hi,count,density,oracle_density\n";
    for (std::size_t b = 0; b < bins; ++b) {
        double a = lo + b * w, c = a + w;
        out << fmt(a) << ',' << fmt(c) << ',' << counts[b] << ','
            << fmt(counts[b] / (xs.size() * w)) << ',' << fmt((oracle.cdf(c) - oracle.cdf(a)) / w) << '\n';
    }
}

json example1(const ModelConfig& cfg, ReportFiles& files) {
    const json& ex = cfg.experiment;
    const json rs = ex.value("rs", json::object());
    const std::size_t N = rs.value("samples", 10000);
    const std::size_t seeds = rs.value("seeds", 20);
    const std::uint64_t seed = rs.value("seed", 1);

    auto rows = bound_table(cfg);
    write_bound_csv(files.path("bounds.csv"), rows);

    std::vector<double> gammas = rs.value("gamma_grid", std::vector<double>{0.0});
    for (const auto& r : rows) gammas.push_back(r.gamma);
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
    auto rates = rs_rate_curve(*cfg.model, gammas, N, seeds, seed);
    {
        auto out = open_csv(files.path("rs_rates.csv"));
        out << "gamma,L,acceptance_rate,rate_sd,seeds,proposals\n";
        for (const auto& r : rates)
            out << fmt(r.gamma) << ',' << fmt(std::exp(-r.gamma)) << ',' << fmt(r.rate) << ','
                << fmt(r.rate_sd) << ',' << r.seeds << ',' << r.proposals << '\n';
    }

    const BoundRow& best = rows.back();
    RandomSource rng(seed);
    SamplerTrace t = rejection_sample_fixed(cfg.model->without_prior(), cfg.model->prior()->sampler,
                                            best.L, N, rng);
    write_samples_csv(files.path("samples.csv"), t.samples);
    GridOracle oracle = grid_oracle(*cfg.model, cfg.oracle_domain[0], cfg.oracle_domain[1], cfg.oracle_points);
    write_histogram_csv(files.path("histogram.csv"), t.samples, oracle, oracle.quantile(1e-4),
                        oracle.quantile(1 - 1e-4), ex.value("histogram_bins", 60));

    json summary = {{"example", 1}};
    for (const auto& r : rows) summary["bounds"][r.method] = {{"gamma", r.gamma}, {"minimizer", r.minimizer}};
    for (const auto& r : rates) summary["rs_rates"].push_back({{"gamma", r.gamma}, {"rate", r.rate}});
    summary["ks_optimal_rs"] = ks_statistic(t.samples, oracle);
    return summary;
}

json example2(const ModelConfig& cfg, ReportFiles& files) {
    const json& ex = cfg.experiment;
    GarsOptions opt;
    opt.rule = cfg.extra_point_rule;
    const ObservationModel& m = *cfg.model;
    GridOracle oracle = grid_oracle(m, cfg.oracle_domain[0], cfg.oracle_domain[1], cfg.oracle_points);

    const json cj = ex.value("curve", json::object());
    const std::size_t reps = cj.value("replications", 2000), len = cj.value("samples", 20);
    auto curve = adaptation_curve(m, reps, len, cj.value("seed", 7), opt, oracle.log_mass());
    {
        auto out = open_csv(files.path("adaptation.csv"));
        out << "sample_index,first_accepted_rate,pooled_rate,mean_inverse_proposals,normalizer_ratio\n";
        for (std::size_t k = 0; k < len; ++k)
            out << k + 1 << ',' << fmt(curve.first_accepted[k]) << ',' << fmt(curve.pooled[k]) << ','
                << fmt(curve.mean_inverse[k]) << ',' << fmt(curve.normalizer_ratio[k]) << '\n';
    }

    const json ej = ex.value("exactness", json::object());
    const std::size_t N = ej.value("samples", 5000);
    const std::uint64_t seed = ej.value("seed", 11);
    auto exact = gars_exactness(m, oracle, N, ej.value("seeds", 10), seed, opt);
    std::size_t passed = 0;
    {
        auto out = open_csv(files.path("exactness.csv"));
        out << "seed,ks,threshold,p_value,pass\n";
        for (const auto& r : exact) {
            bool ok = r.ks < r.threshold;
            passed += ok;
            out << r.seed << ',' << fmt(r.ks) << ',' << fmt(r.threshold) << ',' << fmt(r.p_value) << ','
                << (ok ? 1 : 0) << '\n';
        }
    }

    RandomSource rng(seed);
    SamplerTrace t = gars_run(m, N, rng, opt);
    write_samples_csv(files.path("samples.csv"), t.samples);
    write_trace_csv(files.path("trace.csv"), t);
    write_histogram_csv(files.path("histogram.csv"), t.samples, oracle, cfg.oracle_domain[0],
                        cfg.oracle_domain[1], ex.value("histogram_bins", 80));

    const json aj = ex.value("alpha_grid", json::object());
    auto alphas = linspace(aj.value("lo", 0.2), aj.value("hi", 5.0), aj.value("steps", 10));
    auto means = alpha_mean_table(cfg.doc, alphas, aj.value("samples", 5000), aj.value("runs", 10),
                                  aj.value("seed", 13));
    {
        auto out = open_csv(files.path("alpha_means.csv"));
        out << "alpha,mean,sd,max_abs,runs\n";
        for (const auto& r : means)
            out << fmt(r.alpha) << ',' << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.max_abs) << ','
                << r.runs << '\n';
    }

    json summary = {{"example", 2}, {"oracle_local_maxima", oracle.local_maxima()},
                    {"ks_passed", passed}, {"ks_seeds", exact.size()}};
    for (std::size_t k : {0, 1, 19})
        if (k < len) summary["first_accepted"][std::to_string(k + 1)] = curve.first_accepted[k];
    summary["acceptance_rate"] = t.acceptance_rate();
    return summary;
}

json example3(const ModelConfig& cfg, ReportFiles& files) {
    const json gj = cfg.experiment.value("gibbs", json::object());
    const std::size_t N = gj.value("samples", 10000);
    GarsOptions opt;
    opt.rule = cfg.extra_point_rule;
    auto cmp = gibbs_comparison(*cfg.model2d, N, gj.value("burn", 100), gj.value("seed", 5), opt);
    write_chain_csv(files.path("chain_gars.csv"), cmp.gars.chain);
    write_chain_csv(files.path("chain_fixed.csv"), cmp.fixed.chain);
    {
        auto out = open_csv(files.path("rates.csv"));
        out << "variant,pooled_rate,mean_conditional_rate,conditionals,proposals\n";
        for (auto [name, r, t] : {std::tuple{"gars", cmp.gars_mean_rate, &cmp.gars.trace},
                                  std::tuple{"fixed", cmp.fixed_mean_rate, &cmp.fixed.trace}})
            out << name << ',' << fmt(t->acceptance_rate()) << ',' << fmt(r) << ',' << t->samples.size()
                << ',' << t->total_proposals << '\n';
    }
    {
        const double lo = cfg.oracle_domain[0], hi = cfg.oracle_domain[1];
        const std::size_t bins = cfg.experiment.value("histogram_bins", 40);
        const double w = (hi - lo) / bins;
        std::vector<std::size_t> counts(bins * bins, 0);
        for (const auto& p : cmp.gars.chain) {
            if (p[0] < lo || p[0] >= hi || p[1] < lo || p[1] >= hi) continue;
            std::size_t a = std::min(bins - 1, static_cast<std::size_t>((p[0] - lo) / w));
            std::size_t b = std::min(bins - 1, static_cast<std::size_t>((p[1] - lo) / w));
            counts[a * bins + b]++;
        }
        auto out = open_csv(files.path("histogram2d.csv"));
        out << "x1_lo,x2_lo,count,density\n";
        for (std::size_t a = 0; a < bins; ++a)
            for (std::size_t b = 0; b < bins; ++b)
                out << fmt(lo + a * w) << ',' << fmt(lo + b * w) << ',' << counts[a * bins + b] << ','
                    << fmt(counts[a * bins + b] / (cmp.gars.chain.size() * w * w)) << '\n';
    }
    return {{"example", 3},
            {"gars", {{"pooled_rate", cmp.gars.trace.acceptance_rate()}, {"mean_rate", cmp.gars_mean_rate},
                      {"seconds", cmp.gars_seconds}}},
            {"fixed", {{"pooled_rate", cmp.fixed.trace.acceptance_rate()}, {"mean_rate", cmp.fixed_mean_rate},
                       {"seconds", cmp.fixed_seconds}}}};
}

}  // namespace

json run_example(int id, const json& overrides, const std::string& out_dir) {
    ModelConfig cfg = parse_config(merge_overrides(builtin_config_doc(id), overrides));
    ReportFiles files(out_dir);
    try {
        json summary = id == 1 ? example1(cfg, files) : id == 2 ? example2(cfg, files) : example3(cfg, files);
        std::ofstream(files.path("summary.json"), std::ios::binary) << summary.dump(2) << '\n';
        return summary;
    } catch (...) {
        files.remove_all();
        throw;
    }
}

void write_samples_csv(const std::string& path, std::span<const double> samples) {
    auto out = open_csv(path);
    out << "index,x\n";
    for (std::size_t i = 0; i < samples.size(); ++i) out << i << ',' << fmt(samples[i]) << '\n';
}

void write_chain_csv(const std::string& path, std::span<const std::array<double, 2>> chain) {
    auto out = open_csv(path);
    out << "index,x1,x2\n";
    for (std::size_t i = 0; i < chain.size(); ++i)
        out << i << ',' << fmt(chain[i][0]) << ',' << fmt(chain[i][1]) << '\n';
}

void write_trace_csv(const std::string& path, const SamplerTrace& trace) {
    auto out = open_csv(path);
    out << "sample_index,proposals,cumulative_acceptance_rate\n";
    auto running = trace.running_acceptance();
    for (std::size_t k = 0; k < trace.proposals.size(); ++k)
        out << k + 1 << ',' << trace.proposals[k] << ',' << fmt(running[k]) << '\n';
}

void write_bound_csv(const std::string& path, std::span<const BoundRow> rows) {
    auto out = open_csv(path);
    out << "method,gamma,L,region,minimizer\n";
    for (const auto& r : rows)
        out << r.method << ',' << fmt(r.gamma) << ',' << fmt(r.L) << ',' << r.region << ','
            << fmt(r.minimizer) << '\n';
}

namespace {

const ObservationModel& one_dimensional(const ModelConfig& cfg) {
    if (!cfg.model) throw ContractError("config '" + cfg.name + "' has no one-dimensional model");
    return *cfg.model;
}

}  // namespace

BoundReport bound_by_name(const ModelConfig& cfg, const std::string& method, int iters) {
    const ObservationModel lm = one_dimensional(cfg).without_prior();
    if (method == "bm1") return bm1_bound(lm);
    if (method == "bm2") return bm2_bound(lm, iters);
    if (method == "quad") return quad_bound(lm);
    if (method == "lp") return lp_bound(lm);
    if (method == "tangent") return tangent_bound(lm);
    if (method != "transform") throw ParameterError("unknown bound method '" + method + "'");
    if (!cfg.transform_inverse) throw ContractError("transform bound needs bounds.transform_inverse in the config");
    const Expression& inv = *cfg.transform_inverse;
    return transform_bound(lm, [&inv](double x) { return inv(x); });
}

SamplerTrace sample_config(const ModelConfig& cfg, const std::string& algorithm, std::size_t n,
                           RandomSource& rng) {
    const ObservationModel& m = one_dimensional(cfg);
    if (algorithm == "rs") {
        if (!m.prior() || !m.prior()->sampler) throw ContractError("rejection sampling needs a prior with a sampler");
        double gamma = cfg.gamma_override ? *cfg.gamma_override : bm2_bound(m.without_prior(), cfg.bm2_iterations).gamma;
        return rejection_sample_fixed(m.without_prior(), m.prior()->sampler, std::exp(-gamma), n, rng);
    }
    if (algorithm == "ars") {
        std::vector<double> S0 = cfg.ars_init;
        if (S0.empty()) {
            auto V = [&m](double x) { return system_potential(m, x); };
            double c = minimize_grid_refine(V, cfg.oracle_domain[0], cfg.oracle_domain[1], 10000).x;
            S0 = {c - 1.0, c, c + 1.0};
        }
        return ars_run([&m](double x) { return system_potential(m, x); }, S0, n, rng);
    }
    if (algorithm != "gars") throw ParameterError("unknown algorithm '" + algorithm + "'");
    GarsOptions opt;
    opt.rule = cfg.extra_point_rule;
    return gars_run(m, n, rng, opt);
}

}  // namespace garsamp
