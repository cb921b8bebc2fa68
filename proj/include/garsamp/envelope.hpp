#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "garsamp/bounds.hpp"
#include "garsamp/model.hpp"
#include "garsamp/random.hpp"

namespace garsamp {

// Continuous-or-not piecewise-linear function on a domain. segments[k] is
// active on [breakpoints[k-1], breakpoints[k]] with the domain ends closing
// the first and last pieces.
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn(Interval domain, std::vector<double> breakpoints,
                      std::vector<LinearFn> segments);
    explicit PiecewiseLinearFn(LinearFn line, Interval domain = {});

    // Throws DomainError outside the domain.
    double operator()(double x) const;
    // Segment in force at x; at a breakpoint side < 0 picks the left piece,
    // otherwise the right one.
    std::size_t segment_index(double x, int side = 1) const;
    const LinearFn& segment_at(double x, int side = 1) const {
        return segments_[segment_index(x, side)];
    }

    const Interval& domain() const { return domain_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<LinearFn>& segments() const { return segments_; }
    // Lower / upper end of segment k (may be infinite).
    double segment_lo(std::size_t k) const;
    double segment_hi(std::size_t k) const;

    // Adjacent segments with slope and intercept within tol merged.
    PiecewiseLinearFn canonical(double tol = 1e-12) const;

private:
    Interval domain_;
    std::vector<double> breakpoints_;
    std::vector<LinearFn> segments_;
};

enum class EnvelopeMode { max, min };

PiecewiseLinearFn envelope_combine(std::span<const LinearFn> lines, EnvelopeMode mode,
                                   std::optional<double> clamp = std::nullopt);

// Interior breakpoints of all inputs, sorted, merged within tol.
std::vector<double> intersection_abscissas(std::span<const PiecewiseLinearFn> fns,
                                           double tol = 1e-9);

// Genuine roots of y = g(x) for a globally convex/concave nonlinearity:
// none, one (touching or monotone) or two (non-monotonic), ascending.
std::vector<double> gars_estimates(const Nonlinearity& nl, double y);

// Minorant functions built from the support set S (ascending, distinct).
PiecewiseLinearFn gars_minorant_nonmonotonic(const Nonlinearity& nl, double y,
                                             std::span<const double> S);
PiecewiseLinearFn gars_minorant_monotonic(const Nonlinearity& nl, double y,
                                          std::span<const double> S);
// Dispatch on classify_shape; linear nonlinearities return g itself.
PiecewiseLinearFn gars_minorant(const Nonlinearity& nl, double y, std::span<const double> S);
// Same with the shape and estimates already known.
PiecewiseLinearFn gars_minorant(const Nonlinearity& nl, const GlobalShape& shape, double y,
                                std::span<const double> est, std::span<const double> S);

struct OneSided {
    double value = 0.0;
    double slope = 0.0;
};

// Value at x and slope of the piece active between x and toward (a point
// strictly inside the adjacent knot interval).
using TangentOracle = std::function<OneSided(double x, double toward)>;

// Lower hull from tangents at the knots: max of the two endpoint tangents on
// each interior interval, outermost tangents on the tails.
PiecewiseLinearFn build_hull(const TangentOracle& tangent, std::span<const double> knots);
// Same with finite-difference slopes of f (step h).
PiecewiseLinearFn build_hull(const std::function<double(double)>& f,
                             std::span<const double> knots, double h = 1e-6);
TangentOracle finite_difference_oracle(std::function<double(double)> f, double h = 1e-6);

struct ExpSegment {
    double lo;
    double hi;
    LinearFn w;
    double log_mass;
};

// Density proportional to exp(-W) for piecewise-linear W.
class PiecewiseExpDensity {
public:
    PiecewiseExpDensity(std::vector<ExpSegment> segments, bool approximate);

    const std::vector<ExpSegment>& segments() const { return segments_; }
    // Normalized segment probabilities and their running sums (last = 1).
    const std::vector<double>& probabilities() const { return probs_; }
    const std::vector<double>& cumulative() const { return cumulative_; }
    // log of the integral of exp(-W) before normalization.
    double log_normalizer() const { return log_norm_; }
    bool approximate() const { return approximate_; }

    // W(x) as used by the density; +inf outside the covered range.
    double exponent(double x) const;
    double pdf(double x) const;
    double cdf(double x) const;
    std::size_t segment_index(double x) const;

private:
    std::vector<ExpSegment> segments_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
    double log_norm_ = 0.0;
    bool approximate_ = false;
};

struct NormalizeOptions {
    // Replace non-integrable tail slopes by +-epsilon; marks the result approximate.
    bool epsilon_fallback = false;
    double epsilon = 1e-3;
};

// Throws ImproperEnvelope when a tail has infinite mass and the fallback is off.
PiecewiseExpDensity normalize_piecewise_exp(const PiecewiseLinearFn& W,
                                            const NormalizeOptions& opt = {});

double sample_piecewise_exp(const PiecewiseExpDensity& d, RandomSource& rng);

}  // namespace garsamp
