#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "garsamp/model.hpp"

namespace garsamp {

struct LinearFn {
    double slope = 0.0;
    double intercept = 0.0;

    double operator()(double x) const { return slope * x + intercept; }
};

struct RegionBound {
    std::size_t region = 0;
    double gamma = 0.0;
    double minimizer = 0.0;
    Interval interval;
    std::vector<LinearFn> lines;
    // Set when a method had to fall back to a weaker rule.
    bool fallback = false;
};

struct BoundReport {
    std::string method;
    double gamma = 0.0;
    std::vector<RegionBound> regions;
    int iterations = 0;
    // BM2 only: final support set and the bound after each insertion.
    std::vector<double> support;
    std::vector<double> history;

    double likelihood_bound() const;
    const RegionBound& best() const;
};

struct BoundOptions {
    // Add c_n to gamma; by default bounds ignore the additive constant.
    bool include_constant = false;
    // Finite stand-in for infinite interval ends.
    double horizon = default_horizon;
    RootOptions root;
};

// Minorant line for one branch on I (chord or tangent, or the horizontal
// asymptote for a sentinel estimate).
LinearFn build_minorant_line(const NonlinearBranch& branch, double y, const Interval& I,
                             ExtReal est, double horizon = default_horizon);

// |y - r| <= |y - g| and (y - r)(y - g) >= -tol on a grid over I.
bool check_minorant(const LinearFn& line, const NonlinearBranch& branch, double y,
                    const Interval& I, int points = 1000, double tol = 1e-9,
                    double horizon = default_horizon);

struct Minimum {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section search down to the given bracket width. f may be +inf
// outside a subinterval; value is +inf when no finite point is found.
Minimum minimize_convex_1d(const std::function<double(double)>& f, double lo, double hi,
                           double width = 1e-10);
// Dense grid followed by golden-section refinement around the best node.
// value is +inf when f is infinite on the whole grid.
Minimum minimize_grid_refine(const std::function<double(double)>& f, double lo, double hi,
                             int points = 10000);

// sum_i V_i(y_i - r_i(x)) plus c_n when include_constant.
double modified_potential(const ObservationModel& m, std::span<const LinearFn> lines, double x,
                          bool include_constant = false);

std::vector<LinearFn> bm1_lines(const ObservationModel& m, const SimpleEstimateSet& est,
                                const BoundOptions& opt = {});

BoundReport bm1_bound(const ObservationModel& m, const BoundOptions& opt = {});

using PointRule = std::function<double(double lo, double hi)>;
double midpoint_rule(double lo, double hi);

BoundReport bm2_bound(const ObservationModel& m, std::size_t j, int k_max,
                      const PointRule& rule = midpoint_rule, const BoundOptions& opt = {});
// bm2_bound on every region, gamma = min over regions.
BoundReport bm2_bound(const ObservationModel& m, int k_max, const PointRule& rule = midpoint_rule,
                      const BoundOptions& opt = {});

struct QuadraticBound {
    double gamma2 = 0.0;
    double x = 0.0;
};

// Closed-form minimum of sum_i w_i (y_i - a_i x - b_i)^2; unit weights when
// weights is empty.
QuadraticBound quadratic_bound(std::span<const LinearFn> lines, std::span<const double> y,
                               std::span<const double> weights = {});

double lp_transform_bound(double gamma2, double p, std::size_t n);

// Throws ContractError when r_inv is not increasing on a test grid.
double generic_transform_bound(double gamma2, const std::function<double(double)>& r_inv);

RegionBound convex_tangent_bound(const ObservationModel& m, std::size_t j,
                                 const BoundOptions& opt = {});

// Model-level reports for the remaining methods: quadratic closed form (all
// potentials quadratic), lp transform (all potentials weight*|t|^p with a
// common p and weight), generic transform, convex tangents.
BoundReport quad_bound(const ObservationModel& m, const BoundOptions& opt = {});
BoundReport lp_bound(const ObservationModel& m, const BoundOptions& opt = {});
BoundReport transform_bound(const ObservationModel& m, const std::function<double(double)>& r_inv,
                            const BoundOptions& opt = {});
BoundReport tangent_bound(const ObservationModel& m, const BoundOptions& opt = {});

}  // namespace garsamp
