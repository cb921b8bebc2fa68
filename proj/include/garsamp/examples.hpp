#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "garsamp/config.hpp"
#include "garsamp/oracle.hpp"
#include "garsamp/samplers.hpp"

namespace garsamp {

// Worker count: GARSAMP_THREADS when set, else the hardware concurrency.
std::size_t worker_count();

// Runs fn(0..n-1) on the work pool. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct BoundRow {
    std::string method;
    double gamma = 0.0;
    double L = 0.0;
    std::size_t region = 0;
    double minimizer = 0.0;
};

// BM1, transform, tangent, BM2 and the grid optimum of the likelihood
// potential; quad and lp rows are added when the potentials allow them.
std::vector<BoundRow> bound_table(const ModelConfig& cfg);

struct RateRow {
    double gamma = 0.0;
    double rate = 0.0;     // pooled over seeds
    double rate_sd = 0.0;  // across seeds
    std::size_t seeds = 0;
    std::size_t proposals = 0;
};

// Fixed-bound rejection sampling with prior proposals at each gamma.
std::vector<RateRow> rs_rate_curve(const ObservationModel& m, std::span<const double> gammas,
                                   std::size_t N, std::size_t seeds, std::uint64_t seed);

struct AdaptationCurve {
    std::size_t replications = 0;
    // Indexed by accepted-sample position.
    std::vector<double> first_accepted;     // fraction of first candidates accepted
    std::vector<double> pooled;             // replications / total proposals
    std::vector<double> mean_inverse;       // mean of 1 / proposals
    std::vector<double> normalizer_ratio;   // mean of Z_target / Z_envelope at search start
};

// Independent GARS runs of `samples` draws each.
AdaptationCurve adaptation_curve(const ObservationModel& m, std::size_t replications,
                                 std::size_t samples, std::uint64_t seed, const GarsOptions& opt,
                                 double target_log_mass);

struct ExactnessRow {
    std::uint64_t seed = 0;
    double ks = 0.0;
    double threshold = 0.0;
    double p_value = 0.0;
};

std::vector<ExactnessRow> gars_exactness(const ObservationModel& m, const GridOracle& oracle,
                                         std::size_t N, std::size_t seeds, std::uint64_t seed,
                                         const GarsOptions& opt);

struct MeanRow {
    double alpha = 0.0;
    double mean = 0.0;  // across runs of the per-run sample mean
    double sd = 0.0;
    double max_abs = 0.0;
    std::size_t runs = 0;
};

// Sample means of the Example-2 target with the second observation's noise
// weight set to each alpha.
std::vector<MeanRow> alpha_mean_table(const nlohmann::json& doc, std::span<const double> alphas,
                                      std::size_t N, std::size_t runs, std::uint64_t seed);

// alpha grid of `steps` equally spaced values on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t steps);

struct GibbsComparison {
    GibbsResult gars;
    GibbsResult fixed;
    double gars_seconds = 0.0;
    double fixed_seconds = 0.0;
    // Mean over conditional draws of 1 / proposals.
    double gars_mean_rate = 0.0;
    double fixed_mean_rate = 0.0;
};

GibbsComparison gibbs_comparison(const RangeModel2D& model, std::size_t N, std::size_t burn,
                                 std::uint64_t seed, const GarsOptions& opt = {});

double mean_inverse_proposals(const SamplerTrace& t);

// Writes the example's report files into out_dir and returns the summary.
// Files written before a failure are removed.
nlohmann::json run_example(int id, const nlohmann::json& overrides, const std::string& out_dir);

// Bound of the config's likelihood potential: bm1, bm2 (iters insertions),
// quad, lp, transform or tangent.
BoundReport bound_by_name(const ModelConfig& cfg, const std::string& method, int iters = 3);

// N posterior draws with rs (prior proposals, gamma_override or BM2),
// ars or gars.
SamplerTrace sample_config(const ModelConfig& cfg, const std::string& algorithm, std::size_t N,
                           RandomSource& rng);

// CSV writers shared with the CLI.
void write_samples_csv(const std::string& path, std::span<const double> samples);
void write_chain_csv(const std::string& path, std::span<const std::array<double, 2>> chain);
void write_trace_csv(const std::string& path, const SamplerTrace& trace);
void write_bound_csv(const std::string& path, std::span<const BoundRow> rows);

}  // namespace garsamp
