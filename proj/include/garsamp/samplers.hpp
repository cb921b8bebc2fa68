#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "garsamp/bounds.hpp"
#include "garsamp/envelope.hpp"
#include "garsamp/model.hpp"
#include "garsamp/random.hpp"

namespace garsamp {

struct SamplerTrace {
    std::vector<double> samples;
    // Proposals spent on each accepted sample (including the accepted one).
    std::vector<std::size_t> proposals;
    // Whether the first candidate drawn for each sample was accepted.
    std::vector<unsigned char> first_accepted;
    // log of the envelope normalizer in force when each sample's search began
    // (adaptive samplers only).
    std::vector<double> start_log_normalizer;
    // Support-set size when each sample was accepted (adaptive samplers only).
    std::vector<std::size_t> support_sizes;
    std::size_t total_proposals = 0;
    std::size_t rebuilds = 0;
    // Domination failures recorded in diagnostic mode.
    std::size_t violations = 0;
    bool approximate = false;

    double acceptance_rate() const;
    // Acceptance rate after each accepted sample.
    std::vector<double> running_acceptance() const;
    void append(const SamplerTrace& other);
};

struct SamplerOptions {
    // Record domination failures instead of throwing.
    bool diagnostic = false;
    double tol = 1e-9;
    // Fixed RS: include c_n in the likelihood (must match the bound).
    bool include_constant = false;
};

using PriorSampler = std::function<double(RandomSource&)>;

// Proposals from the prior, accepted with probability likelihood / L, where
// the likelihood excludes the prior term.
SamplerTrace rejection_sample_fixed(const ObservationModel& m, const PriorSampler& prior_sampler,
                                    double L, std::size_t N, RandomSource& rng,
                                    const SamplerOptions& opt = {});

SamplerTrace ars_run(const TangentOracle& tangent, const std::function<double(double)>& potential,
                     std::vector<double> S0, std::size_t N, RandomSource& rng,
                     const SamplerOptions& opt = {});
// Slopes by finite differences of the potential.
SamplerTrace ars_run(const std::function<double(double)>& potential, std::vector<double> S0,
                     std::size_t N, RandomSource& rng, const SamplerOptions& opt = {});

enum class ExtraPointRule { midpoint, uniform };

struct GarsOptions {
    ExtraPointRule rule = ExtraPointRule::midpoint;
    // Hull knots are E_t plus the support points; false uses E_t alone.
    bool knots_include_support = true;
    NormalizeOptions normalize;
    SamplerOptions sampler;
};

class GarsState {
public:
    const ObservationModel& model() const { return model_; }
    const GarsOptions& options() const { return opt_; }
    const std::vector<Observation>& terms() const { return terms_; }
    const std::vector<double>& support() const { return support_; }
    // One entry per extended term; empty for linear terms (used exactly).
    const std::vector<std::optional<PiecewiseLinearFn>>& minorants() const { return minorants_; }
    const std::vector<double>& intersections() const { return intersections_; }
    const std::vector<double>& knots() const { return knots_; }
    const PiecewiseLinearFn& hull() const { return *hull_; }
    const PiecewiseExpDensity& density() const { return *density_; }
    const std::vector<std::vector<double>>& estimates() const { return estimates_; }

    // Potential with the minorants in place of the nonlinearities.
    double modified_potential(double x) const;
    // System potential of the extended model (target).
    double target_potential(double x) const;

    // Inserts x into the support set and rebuilds every cache.
    void add_support_point(double x);
    void rebuild();

private:
    friend GarsState gars_init(const ObservationModel&, const GarsOptions&, RandomSource*);
    GarsState(ObservationModel m, GarsOptions opt);
    OneSided tangent(double x, double toward) const;

    ObservationModel model_;
    GarsOptions opt_;
    std::vector<Observation> terms_;
    std::vector<GlobalShape> shapes_;
    std::vector<std::vector<double>> estimates_;
    std::vector<double> support_;
    std::vector<std::optional<PiecewiseLinearFn>> minorants_;
    std::vector<double> intersections_;
    std::vector<double> knots_;
    std::optional<PiecewiseLinearFn> hull_;
    std::optional<PiecewiseExpDensity> density_;
};

// rng is needed only for the uniform extra-point rule.
GarsState gars_init(const ObservationModel& m, const GarsOptions& opt = {},
                    RandomSource* rng = nullptr);

struct StepResult {
    bool accepted = false;
    double x = 0.0;
    double ratio = 0.0;
};

StepResult gars_step(GarsState& state, RandomSource& rng, SamplerTrace* trace = nullptr);

SamplerTrace gars_run(const ObservationModel& m, std::size_t N, RandomSource& rng,
                      const GarsOptions& opt = {});
// Continues from an existing state.
SamplerTrace gars_run(GarsState& state, std::size_t N, RandomSource& rng);

// Target x = (x1, x2) observed through squared ranges to fixed sensors:
// y_k = |x - h_k|^2 + noise, with independent priors on each coordinate.
class RangeModel2D {
public:
    RangeModel2D(std::vector<std::array<double, 2>> sensors, std::vector<double> y,
                 std::vector<MarginalPotential> noise, std::array<Prior, 2> priors);

    // Model of coordinate c given the other coordinate, prior included.
    ObservationModel conditional(int c, double other) const;
    double potential(double x1, double x2) const;

    const std::vector<std::array<double, 2>>& sensors() const { return sensors_; }
    const std::vector<double>& y() const { return y_; }
    const std::array<Prior, 2>& priors() const { return priors_; }

private:
    std::vector<std::array<double, 2>> sensors_;
    std::vector<double> y_;
    std::vector<MarginalPotential> noise_;
    std::array<Prior, 2> priors_;
    std::array<std::vector<Nonlinearity>, 2> ranges_;
};

struct GibbsOptions {
    std::size_t burn = 0;
    GarsOptions gars;
    SamplerOptions sampler;
};

struct GibbsResult {
    std::vector<std::array<double, 2>> chain;
    // Conditional draws of both coordinates pooled.
    SamplerTrace trace;
};

GibbsResult gibbs_gars(const RangeModel2D& model, std::size_t N, RandomSource& rng,
                       const GibbsOptions& opt = {});
// Same chain with fixed-bound rejection sampling of each conditional: prior
// proposals and the quadratic closed-form bound.
GibbsResult gibbs_fixed_rs(const RangeModel2D& model, std::size_t N, RandomSource& rng,
                           const GibbsOptions& opt = {});

}  // namespace garsamp
