#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "garsamp/errors.hpp"
#include "garsamp/ext_real.hpp"
#include "garsamp/random.hpp"

namespace garsamp {

// Value with first and second derivative.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

using JetFn = std::function<Jet(double)>;

enum class PotentialFamily { quadratic, gamma, lp, cosh, custom };

// Noise potential with its minimum at 0 (P1/P2). eval excludes the
// normalizing constant, which is kept in log_norm.
class MarginalPotential {
public:
    MarginalPotential(PotentialFamily family, JetFn fn, bool convex, double log_norm,
                      bool finite_everywhere = true, double param = 0.0, double weight = 1.0);

    double operator()(double t) const { return fn_(t).value; }
    double eval(double t) const { return fn_(t).value; }
    double deriv(double t) const { return fn_(t).d1; }
    Jet jet(double t) const { return fn_(t); }

    PotentialFamily family() const { return family_; }
    bool convex() const { return convex_; }
    double log_norm() const { return log_norm_; }
    // False for potentials that are +inf on part of the line (gamma family).
    bool finite_everywhere() const { return finite_everywhere_; }
    // Family parameter: exponent p for lp, unused otherwise.
    double param() const { return param_; }
    double weight() const { return weight_; }

private:
    PotentialFamily family_;
    JetFn fn_;
    bool convex_;
    double log_norm_;
    bool finite_everywhere_;
    double param_;
    double weight_;
};

// weight * t^2. A Gaussian with standard deviation sigma has weight 1/(2 sigma^2).
MarginalPotential quadratic_potential(double weight = 1.0);
MarginalPotential gaussian_potential(double sigma);
// Gamma(theta, lambda) noise recentred at its mode m = (theta-1)/lambda:
// -(theta-1) log(t+m) + lambda (t+m), +inf for t <= -m. Requires theta > 1.
MarginalPotential gamma_potential(double theta, double lambda);
// weight * |t|^p.
MarginalPotential lp_potential(double p, double weight = 1.0);
// weight * cosh(t).
MarginalPotential cosh_potential(double weight = 1.0);
MarginalPotential custom_potential(JetFn fn, bool convex);

// Grid check of P1, P2 and the convexity flag on [-window, window].
// Throws ModelError on failure.
void verify_potential(const MarginalPotential& v, double window = 10.0, int points = 1000);

struct NonlinearBranch {
    Interval domain;
    JetFn fn;
    int monotone_sign = 1;
    int curvature_sign = 1;
    // Set at construction when d2 vanishes on the verification grid.
    bool linear = false;

    Jet jet(double x) const { return fn(x); }
    double eval(double x) const { return fn(x).value; }
    double d1(double x) const { return fn(x).d1; }
    double d2(double x) const { return fn(x).d2; }
};

struct BranchDecl {
    int monotone_sign;
    int curvature_sign;
};

enum class ShapeClass { nonmonotonic, monotonic_a, monotonic_b };

struct GlobalShape {
    ShapeClass cls;
    int curvature_sign;  // +1 convex, -1 concave
    bool linear;
};

// Observation function partitioned into monotone, fixed-curvature branches.
class Nonlinearity {
public:
    // support is split at the interior points in breaks; decl has one entry
    // per branch. With verify set, the declared flags are checked on a
    // 10^3-point grid per branch (clipped to [-window, window]).
    Nonlinearity(JetFn fn, Interval support, std::vector<double> breaks,
                 std::vector<BranchDecl> decl, std::string label = "", bool verify = true,
                 double window = 50.0);

    // Single branch on the real line.
    static Nonlinearity monotone(JetFn fn, int monotone_sign, int curvature_sign,
                                 std::string label = "", bool verify = true);
    static Nonlinearity identity();

    const std::vector<NonlinearBranch>& branches() const { return data_->branches; }
    const Interval& support() const { return data_->support; }
    const std::string& label() const { return data_->label; }
    Jet jet(double x) const { return data_->fn(x); }
    double operator()(double x) const { return data_->fn(x).value; }
    const JetFn& fn() const { return data_->fn; }
    bool linear() const;

    // Index of the branch whose closed domain contains x (first match).
    std::size_t branch_at(double x) const;

private:
    struct Data {
        JetFn fn;
        Interval support;
        std::vector<NonlinearBranch> branches;
        std::string label;
    };
    std::shared_ptr<const Data> data_;
};

struct Observation {
    double y;
    Nonlinearity g;
    MarginalPotential v;
};

struct Prior {
    MarginalPotential v;
    double mode = 0.0;
    // Draws from the normalized prior, when the family allows it.
    std::function<double(RandomSource&)> sampler;
};

Prior gaussian_prior(double mode, double sigma);

class ObservationModel {
public:
    ObservationModel(std::vector<Observation> obs, std::optional<Prior> prior = std::nullopt,
                     double c_n = 0.0);

    std::size_t size() const { return obs_.size(); }
    const std::vector<Observation>& observations() const { return obs_; }
    const std::optional<Prior>& prior() const { return prior_; }
    double constant() const { return c_n_; }
    const Interval& support() const { return support_; }

    // Observations followed by the prior as (y = mode, g = identity).
    std::vector<Observation> extended_terms() const;

    // Common refinement of all branch partitions.
    const std::vector<Interval>& regions() const { return regions_; }
    std::size_t region_count() const { return regions_.size(); }

    // Branch of observation i active on region j.
    const NonlinearBranch& branch(std::size_t i, std::size_t j) const;

    ObservationModel without_prior() const;
    ObservationModel with_prior(Prior p) const;

private:
    std::vector<Observation> obs_;
    std::optional<Prior> prior_;
    double c_n_;
    Interval support_;
    std::vector<Interval> regions_;
    std::vector<std::vector<std::size_t>> branch_index_;  // [j][i]
};

// c_n + sum_i V_i(y_i - g_i(x)), excluding the prior term.
double observation_potential(const ObservationModel& m, double x);
// observation_potential plus V_prior(mode - x) when a prior is present.
double system_potential(const ObservationModel& m, double x);
double likelihood(const ObservationModel& m, double x);

struct RootOptions {
    double tol = 1e-12;
    int max_iter = 200;
    double expand_limit = 1e15;
};

// Simple estimate of y = g(x) on region (a subset of one branch): the root,
// or the arg-extremum over the closure of region when y is out of range.
ExtReal branch_estimate(const NonlinearBranch& b, const Interval& region, double y,
                        const RootOptions& opt = {});

struct SimpleEstimateSet {
    std::size_t region = 0;
    Interval region_domain;
    std::vector<ExtReal> estimates;
    Interval interval;  // [min, max] of the estimates
};

SimpleEstimateSet simple_estimates(const ObservationModel& m, std::size_t j,
                                   const RootOptions& opt = {});

// Throws DegenerateInterval when every estimate is a sentinel.
Interval ml_search_interval(const SimpleEstimateSet& est);

GlobalShape classify_shape(const Nonlinearity& nl);

}  // namespace garsamp
