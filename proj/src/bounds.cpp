#include "garsamp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "garsamp/log.hpp"

namespace garsamp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double clip_logged(const ExtReal& e, double horizon) {
    if (!e.is_finite())
        log_message(LogLevel::info,
                    "clipping infinite interval end to " + std::to_string(e.clip(horizon)));
    return e.clip(horizon);
}

LinearFn tangent_line(const NonlinearBranch& b, double x) {
    Jet j = b.jet(x);
    return LinearFn{j.d1, j.value - j.d1 * x};
}

LinearFn chord_line(const NonlinearBranch& b, double x0, double x1) {
    double g0 = b.eval(x0), g1 = b.eval(x1);
    double s = (g1 - g0) / (x1 - x0);
    return LinearFn{s, g0 - s * x0};
}

// Limit of g toward -inf (dir < 0) or +inf (dir > 0), by doubling the probe
// point until the value settles.
double asymptote(const NonlinearBranch& b, int dir, double horizon) {
    double x = dir * std::max(horizon, 1.0);
    double v = b.eval(x);
    for (int k = 0; k < 60; ++k) {
        double next = b.eval(2 * x);
        if (!std::isfinite(next)) break;
        bool settled = std::abs(next - v) <= 1e-13 * std::max(1.0, std::abs(v));
        x *= 2;
        v = next;
        if (settled) break;
    }
    return v;
}

bool all_convex(const ObservationModel& m) {
    return std::all_of(m.observations().begin(), m.observations().end(),
                       [](const Observation& o) { return o.v.convex(); });
}

Minimum minimize_on(const ObservationModel& m, const std::vector<LinearFn>& lines, double lo,
                    double hi, const BoundOptions& opt) {
    auto f = [&](double x) { return modified_potential(m, lines, x, opt.include_constant); };
    if (!(hi > lo)) return Minimum{lo, f(lo)};
    return all_convex(m) ? minimize_convex_1d(f, lo, hi) : minimize_grid_refine(f, lo, hi);
}

ExtReal clamp_to(const ExtReal& e, double a, double b) {
    if (e.as_double() < a) return ExtReal(a);
    if (e.as_double() > b) return ExtReal(b);
    return e;
}

}  // namespace

double BoundReport::likelihood_bound() const { return std::exp(-gamma); }

const RegionBound& BoundReport::best() const {
    return *std::min_element(regions.begin(), regions.end(),
                             [](const RegionBound& a, const RegionBound& b) {
                                 return a.gamma < b.gamma;
                             });
}

LinearFn build_minorant_line(const NonlinearBranch& b, double y, const Interval& I, ExtReal est,
                             double horizon) {
    (void)y;
    if (b.linear) {
        double p = b.domain.contains(0.0) ? 0.0 : est.clip(horizon);
        return tangent_line(b, p);
    }
    if (!est.is_finite()) return LinearFn{0.0, asymptote(b, est.is_neg_inf() ? -1 : 1, horizon)};
    const double e = est.value();
    const bool case1 = b.monotone_sign * b.curvature_sign >= 0;
    const ExtReal& pivot = case1 ? I.lo : I.hi;
    // A chord anchored at an infinite end degenerates to the horizontal line
    // through the estimate (zero residual, always admissible).
    if (!pivot.is_finite()) return LinearFn{0.0, b.eval(e)};
    double p = pivot.value();
    if (std::abs(p - e) <= 1e-12 * std::max(1.0, std::abs(e))) return tangent_line(b, e);
    return chord_line(b, p, e);
}

bool check_minorant(const LinearFn& line, const NonlinearBranch& b, double y, const Interval& I,
                    int points, double tol, double horizon) {
    double lo = I.lo.clip(horizon), hi = I.hi.clip(horizon);
    for (int k = 0; k < points; ++k) {
        double x = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
        double rr = y - line(x), rg = y - b.eval(x);
        double scale = std::max(1.0, std::abs(rg));
        if (std::abs(rr) > std::abs(rg) + tol * scale) return false;
        if (rr * rg < -tol * scale) return false;
    }
    return true;
}

namespace {

// Convex f may be +inf outside an interval (support limits, overflow at the
// horizon). Narrows [lo, hi] to the part where f is finite.
// Returns false when no finite value is found.
bool finite_domain(const std::function<double(double)>& f, double& lo, double& hi, double width) {
    auto finite = [&](double x) {
        double v = f(x);
        if (std::isnan(v)) throw NumericError("NaN objective value", lo, hi);
        return v < inf;
    };
    if (finite(lo) && finite(hi)) return true;
    const int n = 256;
    const double h = (hi - lo) / n;
    int first = -1, last = -1;
    for (int k = 0; k <= n; ++k)
        if (finite(lo + k * h)) {
            if (first < 0) first = k;
            last = k;
        }
    if (first < 0) return false;
    auto edge = [&](double in, double out) {
        while (std::abs(out - in) > width) {
            double mid = 0.5 * (in + out);
            (finite(mid) ? in : out) = mid;
        }
        return in;
    };
    double a = first == 0 ? lo : edge(lo + first * h, lo + (first - 1) * h);
    double b = last == n ? hi : edge(lo + last * h, lo + (last + 1) * h);
    lo = a;
    hi = b;
    return true;
}

}  // namespace

Minimum minimize_convex_1d(const std::function<double(double)>& f, double lo, double hi,
                           double width) {
    if (!finite_domain(f, lo, hi, width)) return Minimum{0.5 * (lo + hi), inf};
    auto eval = [&](double x) {
        double v = f(x);
        if (!std::isfinite(v)) throw NumericError("non-finite objective value", lo, hi);
        return v;
    };
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    while (b - a > width) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = eval(x2);
        }
    }
    Minimum best = f1 <= f2 ? Minimum{x1, f1} : Minimum{x2, f2};
    double xm = 0.5 * (a + b), fm = eval(xm);
    if (fm < best.value) best = {xm, fm};
    for (double e : {lo, hi}) {
        double fe = eval(e);
        if (fe < best.value) best = {e, fe};
    }
    return best;
}

Minimum minimize_grid_refine(const std::function<double(double)>& f, double lo, double hi,
                             int points) {
    const double h = (hi - lo) / (points - 1);
    int best_k = 0;
    double best = inf;
    for (int k = 0; k < points; ++k) {
        double v = f(lo + k * h);
        if (std::isnan(v)) throw NumericError("NaN objective value", lo, hi);
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    if (!std::isfinite(best)) return Minimum{0.5 * (lo + hi), inf};
    double a = lo + std::max(0, best_k - 1) * h;
    double b = lo + std::min(points - 1, best_k + 1) * h;
    Minimum m{lo + best_k * h, best};
    try {
        Minimum r = minimize_convex_1d(f, a, b);
        if (r.value < m.value) m = r;
    } catch (const NumericError&) {
    }
    return m;
}

double modified_potential(const ObservationModel& m, std::span<const LinearFn> lines, double x,
                          bool include_constant) {
    double v = include_constant ? m.constant() : 0.0;
    const auto& obs = m.observations();
    for (std::size_t i = 0; i < obs.size(); ++i) v += obs[i].v(obs[i].y - lines[i](x));
    return v;
}

std::vector<LinearFn> bm1_lines(const ObservationModel& m, const SimpleEstimateSet& est,
                                const BoundOptions& opt) {
    std::vector<LinearFn> lines;
    for (std::size_t i = 0; i < m.size(); ++i)
        lines.push_back(build_minorant_line(m.branch(i, est.region), m.observations()[i].y,
                                            est.interval, est.estimates[i], opt.horizon));
    return lines;
}

BoundReport bm1_bound(const ObservationModel& m, const BoundOptions& opt) {
    BoundReport rep;
    rep.method = "bm1";
    rep.gamma = inf;
    for (std::size_t j = 0; j < m.region_count(); ++j) {
        auto est = simple_estimates(m, j, opt.root);
        ml_search_interval(est);
        RegionBound rb;
        rb.region = j;
        rb.interval = est.interval;
        rb.lines = bm1_lines(m, est, opt);
        Minimum mn = minimize_on(m, rb.lines, clip_logged(est.interval.lo, opt.horizon),
                                 clip_logged(est.interval.hi, opt.horizon), opt);
        rb.gamma = mn.value;
        rb.minimizer = mn.x;
        rep.gamma = std::min(rep.gamma, rb.gamma);
        rep.regions.push_back(std::move(rb));
    }
    return rep;
}

double midpoint_rule(double lo, double hi) { return 0.5 * (lo + hi); }

BoundReport bm2_bound(const ObservationModel& m, std::size_t j, int k_max, const PointRule& rule,
                      const BoundOptions& opt) {
    auto est = simple_estimates(m, j, opt.root);
    ml_search_interval(est);
    BoundReport rep;
    rep.method = "bm2";
    RegionBound base;
    base.region = j;
    base.interval = est.interval;
    base.lines = bm1_lines(m, est, opt);
    double lo = clip_logged(est.interval.lo, opt.horizon);
    double hi = clip_logged(est.interval.hi, opt.horizon);
    Minimum mn = minimize_on(m, base.lines, lo, hi, opt);
    base.gamma = mn.value;
    base.minimizer = mn.x;
    rep.history.push_back(base.gamma);
    rep.support = {lo, hi};
    if (k_max <= 0 || !(hi > lo)) {
        rep.gamma = base.gamma;
        rep.regions.push_back(std::move(base));
        return rep;
    }

    struct Piece {
        double a, b;
        std::vector<LinearFn> lines;
        Minimum min;
    };
    auto solve = [&](double a, double b) {
        Piece p{a, b, {}, {}};
        for (std::size_t i = 0; i < m.size(); ++i)
            p.lines.push_back(build_minorant_line(m.branch(i, j), m.observations()[i].y,
                                                  Interval{a, b},
                                                  clamp_to(est.estimates[i], a, b), opt.horizon));
        p.min = minimize_on(m, p.lines, a, b, opt);
        return p;
    };
    std::vector<Piece> pieces{solve(lo, hi)};
    auto winner = [&] {
        return std::min_element(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) {
            return x.min.value < y.min.value;
        });
    };
    for (int k = 0; k < k_max; ++k) {
        auto w = winner();
        double s = rule(w->a, w->b);
        if (!(s > w->a && s < w->b)) throw ContractError("point rule returned a non-interior point");
        Piece left = solve(w->a, s), right = solve(s, w->b);
        *w = std::move(right);
        pieces.insert(w, std::move(left));
        rep.support.insert(std::upper_bound(rep.support.begin(), rep.support.end(), s), s);
        rep.history.push_back(winner()->min.value);
        ++rep.iterations;
    }
    auto w = winner();
    RegionBound rb;
    rb.region = j;
    rb.interval = est.interval;
    rb.gamma = w->min.value;
    rb.minimizer = w->min.x;
    rb.lines = w->lines;
    rep.gamma = rb.gamma;
    rep.regions.push_back(std::move(rb));
    return rep;
}

BoundReport bm2_bound(const ObservationModel& m, int k_max, const PointRule& rule,
                      const BoundOptions& opt) {
    BoundReport rep;
    rep.method = "bm2";
    rep.gamma = inf;
    for (std::size_t j = 0; j < m.region_count(); ++j) {
        BoundReport r = bm2_bound(m, j, k_max, rule, opt);
        rep.gamma = std::min(rep.gamma, r.gamma);
        rep.iterations = std::max(rep.iterations, r.iterations);
        for (auto& rb : r.regions) rep.regions.push_back(std::move(rb));
        if (m.region_count() == 1) {
            rep.support = std::move(r.support);
            rep.history = std::move(r.history);
        }
    }
    return rep;
}

QuadraticBound quadratic_bound(std::span<const LinearFn> lines, std::span<const double> y,
                               std::span<const double> weights) {
    if (lines.size() != y.size() || (!weights.empty() && weights.size() != y.size()))
        throw ContractError("quadratic_bound: size mismatch");
    double aa = 0, aw = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        double wt = weights.empty() ? 1.0 : weights[i];
        aa += wt * lines[i].slope * lines[i].slope;
        aw += wt * lines[i].slope * (y[i] - lines[i].intercept);
    }
    if (aa == 0) throw NumericError("quadratic_bound: all slopes are zero");
    QuadraticBound q;
    q.x = aw / aa;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        double wt = weights.empty() ? 1.0 : weights[i];
        double r = y[i] - lines[i](q.x);
        q.gamma2 += wt * r * r;
    }
    return q;
}

double lp_transform_bound(double gamma2, double p, std::size_t n) {
    if (!(p > 0)) throw ParameterError("lp_transform_bound: p must be positive");
    if (!(gamma2 >= 0)) throw ParameterError("lp_transform_bound: gamma2 must be nonnegative");
    double g = std::pow(gamma2, p / 2);
    if (p <= 2) return g;
    return std::pow(static_cast<double>(n), -(p - 2) / 2) * g;
}

double generic_transform_bound(double gamma2, const std::function<double(double)>& r_inv) {
    const double top = std::max(10.0, 2 * gamma2);
    const int points = 1000;
    double prev = r_inv(0.0);
    for (int k = 1; k <= points; ++k) {
        double v = r_inv(top * k / points);
        if (!(v > prev)) throw ContractError("transform inverse is not increasing");
        prev = v;
    }
    return r_inv(gamma2);
}

RegionBound convex_tangent_bound(const ObservationModel& m, std::size_t j, const BoundOptions& opt) {
    auto est = simple_estimates(m, j, opt.root);
    ml_search_interval(est);
    RegionBound rb;
    rb.region = j;
    rb.interval = est.interval;
    rb.lines = bm1_lines(m, est, opt);
    const auto& obs = m.observations();
    auto f = [&](double x) { return modified_potential(m, rb.lines, x, opt.include_constant); };
    auto slope = [&](double x) {
        double d = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) d -= rb.lines[i].slope * obs[i].v.deriv(obs[i].y - rb.lines[i](x));
        return d;
    };
    double a = clip_logged(est.interval.lo, opt.horizon);
    double b = clip_logged(est.interval.hi, opt.horizon);
    if (!(b > a)) {
        rb.gamma = f(a);
        rb.minimizer = a;
        return rb;
    }
    if (!finite_domain(f, a, b, 1e-10)) {
        rb.gamma = inf;
        rb.minimizer = 0.5 * (a + b);
        return rb;
    }
    double fa = f(a), fb = f(b), sa = slope(a), sb = slope(b);
    if (sa >= 0 || sb <= 0) {
        rb.fallback = true;
        rb.minimizer = sa >= 0 ? a : b;
        rb.gamma = sa >= 0 ? fa : fb;
        log_message(LogLevel::info, "tangent bound: minimum at an interval end");
        return rb;
    }
    double x = (fb - fa + sa * a - sb * b) / (sa - sb);
    if (std::isfinite(x) && x >= a && x <= b) {
        rb.minimizer = x;
        rb.gamma = fa + sa * (x - a);
    } else {
        // An infinite end slope: the other tangent alone bounds [a, b].
        rb.minimizer = std::isfinite(sa) ? b : a;
        rb.gamma = std::isfinite(sa) ? fa + sa * (b - a) : fb + sb * (a - b);
    }
    return rb;
}

namespace {

template <class PerRegion>
BoundReport per_region(const ObservationModel& m, const std::string& method, const BoundOptions& opt,
                       PerRegion fn) {
    BoundReport rep;
    rep.method = method;
    rep.gamma = inf;
    for (std::size_t j = 0; j < m.region_count(); ++j) {
        auto est = simple_estimates(m, j, opt.root);
        ml_search_interval(est);
        RegionBound rb;
        rb.region = j;
        rb.interval = est.interval;
        rb.lines = bm1_lines(m, est, opt);
        fn(est, rb);
        rep.gamma = std::min(rep.gamma, rb.gamma);
        rep.regions.push_back(std::move(rb));
    }
    return rep;
}

std::vector<double> observed_y(const ObservationModel& m) {
    std::vector<double> y;
    for (const auto& o : m.observations()) y.push_back(o.y);
    return y;
}

// gamma2 for unit weights; all-flat lines make the residual sum constant.
QuadraticBound unit_quadratic(const std::vector<LinearFn>& lines, const std::vector<double>& y,
                              std::span<const double> weights = {}) {
    bool flat = std::all_of(lines.begin(), lines.end(), [](const LinearFn& l) { return l.slope == 0; });
    if (!flat) return quadratic_bound(lines, y, weights);
    QuadraticBound q;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        double r = y[i] - lines[i].intercept;
        q.gamma2 += (weights.empty() ? 1.0 : weights[i]) * r * r;
    }
    return q;
}

}  // namespace

BoundReport quad_bound(const ObservationModel& m, const BoundOptions& opt) {
    std::vector<double> w;
    for (const auto& o : m.observations()) {
        if (o.v.family() != PotentialFamily::quadratic)
            throw ContractError("quad bound needs quadratic marginal potentials");
        w.push_back(o.v.weight());
    }
    auto y = observed_y(m);
    double c = opt.include_constant ? m.constant() : 0.0;
    return per_region(m, "quad", opt, [&](const SimpleEstimateSet&, RegionBound& rb) {
        auto q = unit_quadratic(rb.lines, y, w);
        rb.gamma = q.gamma2 + c;
        rb.minimizer = q.x;
    });
}

BoundReport lp_bound(const ObservationModel& m, const BoundOptions& opt) {
    const auto& obs = m.observations();
    double p = obs.front().v.param(), wt = obs.front().v.weight();
    for (const auto& o : obs) {
        bool lp = o.v.family() == PotentialFamily::lp || o.v.family() == PotentialFamily::quadratic;
        if (!lp || o.v.param() != p || o.v.weight() != wt)
            throw ContractError("lp bound needs weight*|t|^p potentials with a common p and weight");
    }
    auto y = observed_y(m);
    double c = opt.include_constant ? m.constant() : 0.0;
    return per_region(m, "lp", opt, [&](const SimpleEstimateSet&, RegionBound& rb) {
        auto q = unit_quadratic(rb.lines, y);
        rb.gamma = wt * lp_transform_bound(q.gamma2, p, obs.size()) + c;
        rb.minimizer = q.x;
    });
}

BoundReport transform_bound(const ObservationModel& m, const std::function<double(double)>& r_inv,
                            const BoundOptions& opt) {
    auto y = observed_y(m);
    double c = opt.include_constant ? m.constant() : 0.0;
    return per_region(m, "transform", opt, [&](const SimpleEstimateSet&, RegionBound& rb) {
        auto q = unit_quadratic(rb.lines, y);
        rb.gamma = generic_transform_bound(q.gamma2, r_inv) + c;
        rb.minimizer = q.x;
    });
}

BoundReport tangent_bound(const ObservationModel& m, const BoundOptions& opt) {
    for (const auto& o : m.observations())
        if (!o.v.convex()) throw ContractError("tangent bound needs convex marginal potentials");
    BoundReport rep;
    rep.method = "tangent";
    rep.gamma = inf;
    for (std::size_t j = 0; j < m.region_count(); ++j) {
        RegionBound rb = convex_tangent_bound(m, j, opt);
        rep.gamma = std::min(rep.gamma, rb.gamma);
        rep.regions.push_back(std::move(rb));
    }
    return rep;
}

}  // namespace garsamp
