#include "garsamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace garsamp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Finite grid points over the interval, clipped to [-window, window].
std::vector<double> interval_grid(const Interval& iv, double window, int points) {
    double lo = std::max(iv.lo.as_double(), -window);
    double hi = std::min(iv.hi.as_double(), window);
    std::vector<double> xs;
    if (!(hi > lo)) return xs;
    xs.reserve(points);
    for (int k = 0; k < points; ++k) xs.push_back(lo + (hi - lo) * (k + 0.5) / points);
    return xs;
}

}  // namespace

double ExtReal::value() const {
    if (!is_finite()) throw ContractError("value() on an infinite sentinel");
    return value_;
}

MarginalPotential::MarginalPotential(PotentialFamily family, JetFn fn, bool convex,
                                     double log_norm, bool finite_everywhere, double param,
                                     double weight)
    : family_(family), fn_(std::move(fn)), convex_(convex), log_norm_(log_norm),
      finite_everywhere_(finite_everywhere), param_(param), weight_(weight) {}

MarginalPotential quadratic_potential(double weight) {
    if (!(weight > 0)) throw ParameterError("quadratic potential weight must be positive");
    return MarginalPotential(
        PotentialFamily::quadratic,
        [weight](double t) { return Jet{weight * t * t, 2 * weight * t, 2 * weight}; }, true,
        0.5 * std::log(std::numbers::pi / weight), true, 2.0, weight);
}

MarginalPotential gaussian_potential(double sigma) {
    if (!(sigma > 0)) throw ParameterError("gaussian sigma must be positive");
    return quadratic_potential(1.0 / (2.0 * sigma * sigma));
}

MarginalPotential gamma_potential(double theta, double lambda) {
    if (!(theta > 1) || !(lambda > 0))
        throw ParameterError("gamma potential needs theta > 1 and lambda > 0");
    const double m = (theta - 1) / lambda;
    return MarginalPotential(
        PotentialFamily::gamma,
        [theta, lambda, m](double t) {
            double u = t + m;
            if (!(u > 0)) return Jet{inf, -inf, inf};
            return Jet{-(theta - 1) * std::log(u) + lambda * u, -(theta - 1) / u + lambda,
                       (theta - 1) / (u * u)};
        },
        true, std::lgamma(theta) - theta * std::log(lambda), false, theta, lambda);
}

MarginalPotential lp_potential(double p, double weight) {
    if (!(p > 0)) throw ParameterError("lp exponent must be positive");
    if (!(weight > 0)) throw ParameterError("lp weight must be positive");
    return MarginalPotential(
        PotentialFamily::lp,
        [p, weight](double t) {
            double a = std::abs(t);
            if (a == 0) return Jet{0.0, 0.0, p == 2 ? 2 * weight : (p > 2 ? 0.0 : inf)};
            double s = t > 0 ? 1.0 : -1.0;
            return Jet{weight * std::pow(a, p), weight * s * p * std::pow(a, p - 1),
                       weight * p * (p - 1) * std::pow(a, p - 2)};
        },
        p >= 1, std::log(2 * std::tgamma(1 + 1 / p)) - std::log(weight) / p, true, p, weight);
}

MarginalPotential cosh_potential(double weight) {
    if (!(weight > 0)) throw ParameterError("cosh weight must be positive");
    return MarginalPotential(
        PotentialFamily::cosh,
        [weight](double t) {
            return Jet{weight * std::cosh(t), weight * std::sinh(t), weight * std::cosh(t)};
        },
        true, 0.0, true, 0.0, weight);
}

MarginalPotential custom_potential(JetFn fn, bool convex) {
    return MarginalPotential(PotentialFamily::custom, std::move(fn), convex, 0.0, true);
}

void verify_potential(const MarginalPotential& v, double window, int points) {
    const double h = 2 * window / points;
    double v0 = v.eval(0.0);
    if (!(v0 >= 0)) throw ModelError("potential is negative at 0");
    double prev2 = 0, prev1 = 0;
    int finite_run = 0;
    for (int k = 0; k <= points; ++k) {
        double t = -window + k * h;
        if (std::abs(t) < 1e-12) t = 0.0;
        double val = v.eval(t);
        if (std::isnan(val)) throw ModelError("potential is NaN at " + fmt(t));
        if (val < 0) throw ModelError("potential is negative at " + fmt(t) + " (P1)");
        if (val < v0 - 1e-12) throw ModelError("potential minimum is not at 0");
        if (t != 0.0 && std::isfinite(val)) {
            double d = v.deriv(t);
            if (!(d * (t > 0 ? 1 : -1) > 0))
                throw ModelError("potential derivative has the wrong sign at " + fmt(t) + " (P2)");
        }
        if (!std::isfinite(val)) {
            finite_run = 0;
            continue;
        }
        if (finite_run >= 2 && v.convex()) {
            double sd = val - 2 * prev1 + prev2;
            double scale = std::max({1.0, std::abs(val), std::abs(prev1), std::abs(prev2)});
            if (sd < -1e-9 * scale)
                throw ModelError("potential flagged convex has negative second difference at " +
                                 fmt(t));
        }
        prev2 = prev1;
        prev1 = val;
        ++finite_run;
    }
}

Nonlinearity::Nonlinearity(JetFn fn, Interval support, std::vector<double> breaks,
                           std::vector<BranchDecl> decl, std::string label, bool verify,
                           double window) {
    if (decl.size() != breaks.size() + 1)
        throw ModelError("nonlinearity '" + label + "': need one branch declaration per piece");
    if (!std::is_sorted(breaks.begin(), breaks.end()) ||
        std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end())
        throw ModelError("nonlinearity '" + label + "': branch breaks must be increasing");
    for (double b : breaks)
        if (!(support.lo.as_double() < b && b < support.hi.as_double()))
            throw ModelError("nonlinearity '" + label + "': break outside support");
    auto d = std::make_shared<Data>();
    d->fn = std::move(fn);
    d->support = support;
    d->label = std::move(label);
    for (std::size_t k = 0; k < decl.size(); ++k) {
        NonlinearBranch b;
        b.domain.lo = k == 0 ? support.lo : ExtReal(breaks[k - 1]);
        b.domain.hi = k == breaks.size() ? support.hi : ExtReal(breaks[k]);
        b.fn = d->fn;
        b.monotone_sign = decl[k].monotone_sign;
        b.curvature_sign = decl[k].curvature_sign;
        if (std::abs(b.monotone_sign) != 1 || std::abs(b.curvature_sign) != 1)
            throw ModelError("nonlinearity '" + d->label + "': branch flags must be +1 or -1");
        // Without verification the branch is treated as curved.
        auto grid = verify ? interval_grid(b.domain, window, 1000) : std::vector<double>{};
        bool all_linear = !grid.empty();
        for (double x : grid) {
            Jet j = d->fn(x);
            if (j.d2 != 0.0) all_linear = false;
            if (std::isnan(j.value) || std::isnan(j.d1) || std::isnan(j.d2))
                throw ModelError("nonlinearity '" + d->label + "' is NaN at " + fmt(x));
            if (!(j.d1 * b.monotone_sign > 0))
                throw ModelError("nonlinearity '" + d->label + "': declared monotone sign " +
                                 std::to_string(b.monotone_sign) + " fails at x=" + fmt(x));
            if (j.d2 * b.curvature_sign < 0)
                throw ModelError("nonlinearity '" + d->label + "': declared curvature sign " +
                                 std::to_string(b.curvature_sign) + " fails at x=" + fmt(x));
        }
        b.linear = all_linear;
        d->branches.push_back(std::move(b));
    }
    data_ = std::move(d);
}

Nonlinearity Nonlinearity::monotone(JetFn fn, int monotone_sign, int curvature_sign,
                                    std::string label, bool verify) {
    return Nonlinearity(std::move(fn), Interval{}, {}, {{monotone_sign, curvature_sign}},
                        std::move(label), verify);
}

Nonlinearity Nonlinearity::identity() {
    static const Nonlinearity id =
        monotone([](double x) { return Jet{x, 1.0, 0.0}; }, 1, 1, "x", true);
    return id;
}

bool Nonlinearity::linear() const {
    for (const auto& b : data_->branches)
        if (!b.linear) return false;
    return true;
}

std::size_t Nonlinearity::branch_at(double x) const {
    const auto& bs = data_->branches;
    for (std::size_t k = 0; k < bs.size(); ++k)
        if (bs[k].domain.contains(x)) return k;
    throw DomainError("x=" + fmt(x) + " outside the support of '" + data_->label + "'");
}

Prior gaussian_prior(double mode, double sigma) {
    Prior p{gaussian_potential(sigma), mode, {}};
    p.sampler = [mode, sigma](RandomSource& rng) { return rng.gaussian(mode, sigma); };
    return p;
}

ObservationModel::ObservationModel(std::vector<Observation> obs, std::optional<Prior> prior,
                                   double c_n)
    : obs_(std::move(obs)), prior_(std::move(prior)), c_n_(c_n) {
    ExtReal lo = ExtReal::neg_inf(), hi = ExtReal::pos_inf();
    for (const auto& o : obs_) {
        if (lo < o.g.support().lo) lo = o.g.support().lo;
        if (o.g.support().hi < hi) hi = o.g.support().hi;
    }
    if (!(lo < hi)) throw ModelError("observation supports do not overlap");
    support_ = Interval{lo, hi};
    std::vector<double> cuts;
    for (const auto& o : obs_)
        for (const auto& b : o.g.branches())
            if (b.domain.hi.is_finite() && lo < b.domain.hi && b.domain.hi < hi)
                cuts.push_back(b.domain.hi.value());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    ExtReal left = lo;
    for (std::size_t k = 0; k <= cuts.size(); ++k) {
        ExtReal right = k < cuts.size() ? ExtReal(cuts[k]) : hi;
        regions_.push_back(Interval{left, right});
        left = right;
    }
    for (const auto& r : regions_) {
        double probe;
        if (r.bounded()) probe = 0.5 * (r.lo.value() + r.hi.value());
        else if (r.lo.is_finite()) probe = r.lo.value() + 1.0;
        else if (r.hi.is_finite()) probe = r.hi.value() - 1.0;
        else probe = 0.0;
        std::vector<std::size_t> idx;
        for (const auto& o : obs_) idx.push_back(o.g.branch_at(probe));
        branch_index_.push_back(std::move(idx));
    }
}

std::vector<Observation> ObservationModel::extended_terms() const {
    std::vector<Observation> out = obs_;
    if (prior_) out.push_back(Observation{prior_->mode, Nonlinearity::identity(), prior_->v});
    return out;
}

const NonlinearBranch& ObservationModel::branch(std::size_t i, std::size_t j) const {
    return obs_.at(i).g.branches().at(branch_index_.at(j).at(i));
}

ObservationModel ObservationModel::without_prior() const {
    return ObservationModel(obs_, std::nullopt, c_n_);
}

ObservationModel ObservationModel::with_prior(Prior p) const {
    return ObservationModel(obs_, std::move(p), c_n_);
}

double observation_potential(const ObservationModel& m, double x) {
    if (!m.support().contains(x))
        throw DomainError("x=" + fmt(x) + " outside the model support");
    double v = m.constant();
    for (const auto& o : m.observations()) v += o.v(o.y - o.g(x));
    return v;
}

double system_potential(const ObservationModel& m, double x) {
    double v = observation_potential(m, x);
    if (m.prior()) v += m.prior()->v(m.prior()->mode - x);
    return v;
}

double likelihood(const ObservationModel& m, double x) { return std::exp(-system_potential(m, x)); }

ExtReal branch_estimate(const NonlinearBranch& b, const Interval& region, double y,
                        const RootOptions& opt) {
    const double s = b.monotone_sign;
    // phi is increasing in x.
    auto phi = [&](double x) { return s * (b.eval(x) - y); };
    const bool lo_fin = region.lo.is_finite(), hi_fin = region.hi.is_finite();
    double xl, xr;
    if (lo_fin && hi_fin) {
        xl = region.lo.value();
        xr = region.hi.value();
    } else if (lo_fin) {
        xl = region.lo.value();
        xr = xl + 1.0;
    } else if (hi_fin) {
        xr = region.hi.value();
        xl = xr - 1.0;
    } else {
        xl = -1.0;
        xr = 1.0;
    }
    double fl = phi(xl), fr = phi(xr);
    if (!lo_fin) {
        double step = 1.0;
        while (fl > 0 && xl > -opt.expand_limit) {
            xr = xl;
            fr = fl;
            xl -= step;
            step *= 2;
            fl = phi(xl);
        }
        if (fl > 0) return ExtReal::neg_inf();
    } else if (fl > 0) {
        return region.lo;
    }
    if (!hi_fin) {
        double step = 1.0;
        while (fr < 0 && xr < opt.expand_limit) {
            xl = xr;
            fl = fr;
            xr += step;
            step *= 2;
            fr = phi(xr);
        }
        if (fr < 0) return ExtReal::pos_inf();
    } else if (fr < 0) {
        return region.hi;
    }
    if (fl == 0) return ExtReal(xl);
    if (fr == 0) return ExtReal(xr);
    if (std::isnan(fl) || std::isnan(fr)) throw NumericError("NaN while bracketing root", xl, xr);
    // Safeguarded Newton on the bracket [xl, xr] with phi(xl) < 0 < phi(xr).
    double x = 0.5 * (xl + xr);
    for (int it = 0; it < opt.max_iter; ++it) {
        Jet j = b.jet(x);
        double f = s * (j.value - y);
        if (f == 0) return ExtReal(x);
        if (f < 0) xl = x;
        else xr = x;
        if (xr - xl <= opt.tol * std::max(1.0, std::abs(x))) return ExtReal(0.5 * (xl + xr));
        double df = s * j.d1;
        double xn = (std::isfinite(df) && df > 0) ? x - f / df : xl - 1.0;
        if (!(xn > xl && xn < xr)) xn = 0.5 * (xl + xr);
        if (std::abs(xn - x) <= 0.25 * opt.tol * std::max(1.0, std::abs(x))) {
            double fn = phi(xn);
            if (fn == 0 || std::abs(fn) <= std::abs(f)) return ExtReal(xn);
        }
        x = xn;
    }
    throw NumericError("root finder did not converge", xl, xr);
}

SimpleEstimateSet simple_estimates(const ObservationModel& m, std::size_t j,
                                   const RootOptions& opt) {
    if (j >= m.region_count()) throw ContractError("region index out of range");
    SimpleEstimateSet out;
    out.region = j;
    out.region_domain = m.regions()[j];
    for (std::size_t i = 0; i < m.size(); ++i)
        out.estimates.push_back(
            branch_estimate(m.branch(i, j), out.region_domain, m.observations()[i].y, opt));
    bool any_finite = std::any_of(out.estimates.begin(), out.estimates.end(),
                                  [](const ExtReal& e) { return e.is_finite(); });
    if (any_finite) out.interval = ml_search_interval(out);
    return out;
}

Interval ml_search_interval(const SimpleEstimateSet& est) {
    bool any_finite = false;
    ExtReal lo = ExtReal::pos_inf(), hi = ExtReal::neg_inf();
    for (const auto& e : est.estimates) {
        any_finite = any_finite || e.is_finite();
        if (e < lo) lo = e;
        if (hi < e) hi = e;
    }
    if (!any_finite) throw DegenerateInterval("all simple estimates are infinite");
    return Interval{lo, hi};
}

GlobalShape classify_shape(const Nonlinearity& nl) {
    const auto& bs = nl.branches();
    GlobalShape shape{};
    shape.curvature_sign = bs.front().curvature_sign;
    shape.linear = nl.linear();
    for (const auto& b : bs)
        if (b.curvature_sign != shape.curvature_sign && !shape.linear)
            throw ModelError("'" + nl.label() + "' is neither globally convex nor concave");
    int changes = 0;
    for (std::size_t k = 1; k < bs.size(); ++k)
        if (bs[k].monotone_sign != bs[k - 1].monotone_sign) ++changes;
    if (changes > 1)
        throw ModelError("'" + nl.label() + "': derivative changes sign more than once");
    if (shape.linear) {
        if (changes) throw ModelError("'" + nl.label() + "': linear but not monotone");
        shape.cls = ShapeClass::monotonic_a;
        return shape;
    }
    if (changes == 1) {
        // Convex must fall then rise, concave must rise then fall.
        if (bs.front().monotone_sign != -shape.curvature_sign)
            throw ModelError("'" + nl.label() + "': monotonicity inconsistent with curvature");
        shape.cls = ShapeClass::nonmonotonic;
        return shape;
    }
    shape.cls = bs.front().monotone_sign * shape.curvature_sign >= 0 ? ShapeClass::monotonic_a
                                                                     : ShapeClass::monotonic_b;
    return shape;
}

}  // namespace garsamp
