// garsamp command line: bounds, sampling, Gibbs chains, verification and
// the shipped experiments. Exit codes: 0 success, 2 validation failure,
// 1 other errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "garsamp/config.hpp"
#include "garsamp/examples.hpp"
#include "garsamp/verify.hpp"

using namespace garsamp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int exit_validation = 2;
constexpr int exit_error = 1;

int cmd_bound(const std::string& path, const std::string& method, int iters) {
    ModelConfig cfg = load_config(path);
    BoundReport rep = bound_by_name(cfg, method, iters);
    const RegionBound& b = rep.best();
    std::printf("method,gamma,L,region,minimizer\n%s,%.10g,%.10g,%zu,%.10g\n", method.c_str(), rep.gamma,
                rep.likelihood_bound(), b.region, b.minimizer);
    if (!rep.history.empty()) {
        std::fprintf(stderr, "bm2 history:");
        for (double g : rep.history) std::fprintf(stderr, " %.10g", g);
        std::fprintf(stderr, "\n");
    }
    return 0;
}

json trace_summary(const SamplerTrace& t) {
    return {{"samples", t.samples.size()},
            {"proposals", t.total_proposals},
            {"acceptance_rate", t.acceptance_rate()},
            {"mean_inverse_proposals", mean_inverse_proposals(t)}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write '" + path.string() + "'");
}

int cmd_sample(const std::string& path, const std::string& algorithm, std::size_t n, std::uint64_t seed,
               std::size_t replications, const std::string& out_dir) {
    ModelConfig cfg = load_config(path);
    fs::create_directories(out_dir);
    std::vector<SamplerTrace> traces(replications);
    RandomSource base(seed);
    parallel_for(replications, [&](std::size_t r) {
        RandomSource rng = replications == 1 ? base : base.split(r);
        traces[r] = sample_config(cfg, algorithm, n, rng);
    });
    json summary = {{"algorithm", algorithm}, {"seed", seed}, {"replications", json::array()}};
    for (std::size_t r = 0; r < replications; ++r) {
        std::string suffix = replications == 1 ? "" : "_r" + std::to_string(r);
        write_samples_csv((fs::path(out_dir) / ("samples" + suffix + ".csv")).string(), traces[r].samples);
        write_trace_csv((fs::path(out_dir) / ("trace" + suffix + ".csv")).string(), traces[r]);
        summary["replications"].push_back(trace_summary(traces[r]));
    }
    write_json(fs::path(out_dir) / "summary.json", summary);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_gibbs(const std::string& path, std::size_t n, std::uint64_t seed, std::optional<std::size_t> burn,
              const std::string& variant, const std::string& out_dir) {
    ModelConfig cfg = load_config(path);
    if (!cfg.model2d) throw ContractError("config '" + cfg.name + "' has no model2d section");
    GibbsOptions opt;
    opt.gars.rule = cfg.extra_point_rule;
    opt.burn = burn ? *burn : cfg.experiment.value("/gibbs/burn"_json_pointer, std::size_t{0});
    RandomSource rng(seed);
    GibbsResult res = variant == "fixed" ? gibbs_fixed_rs(*cfg.model2d, n, rng, opt) : gibbs_gars(*cfg.model2d, n, rng, opt);
    fs::create_directories(out_dir);
    write_chain_csv((fs::path(out_dir) / "chain.csv").string(), res.chain);
    write_trace_csv((fs::path(out_dir) / "trace.csv").string(), res.trace);
    json summary = trace_summary(res.trace);
    summary["variant"] = variant;
    summary["burn"] = opt.burn;
    write_json(fs::path(out_dir) / "summary.json", summary);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_verify(const std::string& path) {
    VerifyReport rep = verify_suite(read_json_file(path));
    std::cout << rep.to_json().dump(2) << '\n';
    return rep.pass() ? 0 : exit_validation;
}

int cmd_experiment(int id, const std::string& out_dir, const std::string& overrides) {
    json o = overrides.empty() ? json::object() : json::parse(overrides);
    json summary = run_example(id, o, out_dir);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"garsamp: rejection sampling with likelihood bounds and generalized adaptive envelopes"};
    app.require_subcommand(1);

    std::string config, method = "bm2", algorithm = "gars", out, variant = "gars", overrides;
    int iters = 3, id = 1;
    std::size_t n = 1000, replications = 1, burn = 0;
    std::uint64_t seed = 1;

    auto* bound = app.add_subcommand("bound", "Lower bound of the likelihood potential");
    bound->add_option("--config", config, "Model config")->required()->check(CLI::ExistingFile);
    bound->add_option("--method", method)->check(CLI::IsMember({"bm1", "bm2", "quad", "lp", "transform", "tangent"}));
    bound->add_option("--iters", iters, "BM2 insertions")->check(CLI::NonNegativeNumber);

    auto* sample = app.add_subcommand("sample", "Draw samples from the posterior");
    sample->add_option("--config", config)->required()->check(CLI::ExistingFile);
    sample->add_option("--algorithm", algorithm)->check(CLI::IsMember({"rs", "ars", "gars"}));
    sample->add_option("--n", n, "Samples per replication");
    sample->add_option("--seed", seed);
    sample->add_option("--replications", replications)->check(CLI::PositiveNumber);
    sample->add_option("--out", out)->required();

    auto* gibbs = app.add_subcommand("gibbs", "Gibbs chain for the two-coordinate model");
    gibbs->add_option("--config", config)->required()->check(CLI::ExistingFile);
    gibbs->add_option("--n", n);
    gibbs->add_option("--seed", seed);
    auto* burn_opt = gibbs->add_option("--burn", burn, "Discarded sweeps (default: config)");
    gibbs->add_option("--variant", variant)->check(CLI::IsMember({"gars", "fixed"}));
    gibbs->add_option("--out", out)->required();

    auto* verify = app.add_subcommand("verify", "Run the invariant checks on a config");
    verify->add_option("--config", config)->required();

    auto* experiment = app.add_subcommand("experiment", "Run a shipped example and write its reports");
    experiment->add_option("--id", id)->required()->check(CLI::IsMember({1, 2, 3}));
    experiment->add_option("--out", out)->required();
    experiment->add_option("--set", overrides, "JSON merged into the example config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try {
        if (*bound) return cmd_bound(config, method, iters);
        if (*sample) return cmd_sample(config, algorithm, n, seed, replications, out);
        if (*gibbs)
            return cmd_gibbs(config, n, seed, burn_opt->count() ? std::optional<std::size_t>(burn) : std::nullopt,
                             variant, out);
        if (*verify) return cmd_verify(config);
        if (*experiment) return cmd_experiment(id, out, overrides);
    } catch (const ModelError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return exit_validation;
    } catch (const ParameterError& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return exit_validation;
    } catch (const ContractError& e) {
        std::cerr << "not applicable: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
