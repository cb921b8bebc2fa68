#include "garsamp/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace garsamp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

LinearFn tangent_of(const Nonlinearity& nl, double x) {
    Jet j = nl.jet(x);
    return LinearFn{j.d1, j.value - j.d1 * x};
}

LinearFn chord_of(const Nonlinearity& nl, double a, double b) {
    double ga = nl(a), gb = nl(b);
    double s = (gb - ga) / (b - a);
    return LinearFn{s, ga - s * a};
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

bool contains_point(std::span<const double> S, double x) {
    return std::any_of(S.begin(), S.end(), [x](double s) { return near(s, x); });
}

void check_support(std::span<const double> S) {
    if (S.empty()) throw ContractError("support set is empty");
    for (std::size_t k = 1; k < S.size(); ++k)
        if (!(S[k] > S[k - 1])) throw ContractError("support set must be strictly increasing");
}

EnvelopeMode mode_for(int curvature_sign) {
    return curvature_sign > 0 ? EnvelopeMode::max : EnvelopeMode::min;
}

// Nonlinearity restricted to [lo, hi] as a single monotone branch.
NonlinearBranch run_branch(const Nonlinearity& nl, ExtReal lo, ExtReal hi, int sign) {
    NonlinearBranch b;
    b.domain = Interval{lo, hi};
    b.fn = nl.fn();
    b.monotone_sign = sign;
    b.curvature_sign = nl.branches().front().curvature_sign;
    return b;
}

bool is_root(const Nonlinearity& nl, double x, double y) {
    return std::abs(nl(x) - y) <= 1e-9 * std::max(1.0, std::abs(y));
}

}  // namespace

PiecewiseLinearFn::PiecewiseLinearFn(Interval domain, std::vector<double> breakpoints,
                                     std::vector<LinearFn> segments)
    : domain_(domain), breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
    if (segments_.size() != breakpoints_.size() + 1)
        throw ContractError("piecewise-linear function needs one more segment than breakpoints");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k)
        if (!(breakpoints_[k] > breakpoints_[k - 1]))
            throw ContractError("breakpoints must be strictly increasing");
}

PiecewiseLinearFn::PiecewiseLinearFn(LinearFn line, Interval domain)
    : domain_(domain), segments_{line} {}

std::size_t PiecewiseLinearFn::segment_index(double x, int side) const {
    auto it = side < 0 ? std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x)
                       : std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<std::size_t>(it - breakpoints_.begin());
}

double PiecewiseLinearFn::operator()(double x) const {
    if (!domain_.contains(x)) throw DomainError("evaluation outside piecewise-linear domain");
    return segments_[segment_index(x)](x);
}

double PiecewiseLinearFn::segment_lo(std::size_t k) const {
    return k == 0 ? domain_.lo.as_double() : breakpoints_[k - 1];
}

double PiecewiseLinearFn::segment_hi(std::size_t k) const {
    return k == breakpoints_.size() ? domain_.hi.as_double() : breakpoints_[k];
}

PiecewiseLinearFn PiecewiseLinearFn::canonical(double tol) const {
    std::vector<double> bps;
    std::vector<LinearFn> segs;
    bps.reserve(breakpoints_.size());
    segs.reserve(segments_.size());
    segs.push_back(segments_.front());
    for (std::size_t k = 1; k < segments_.size(); ++k) {
        const LinearFn& a = segs.back();
        const LinearFn& b = segments_[k];
        if (std::abs(a.slope - b.slope) <= tol && std::abs(a.intercept - b.intercept) <= tol)
            continue;
        bps.push_back(breakpoints_[k - 1]);
        segs.push_back(b);
    }
    return PiecewiseLinearFn(domain_, std::move(bps), std::move(segs));
}

PiecewiseLinearFn envelope_combine(std::span<const LinearFn> lines, EnvelopeMode mode,
                                   std::optional<double> clamp) {
    std::vector<LinearFn> ls(lines.begin(), lines.end());
    if (clamp) ls.push_back(LinearFn{0.0, *clamp});
    if (ls.empty()) throw ContractError("envelope_combine needs at least one line");
    const double sgn = mode == EnvelopeMode::max ? 1.0 : -1.0;
    for (auto& l : ls) l = LinearFn{sgn * l.slope, sgn * l.intercept};
    std::sort(ls.begin(), ls.end(), [](const LinearFn& a, const LinearFn& b) {
        return a.slope < b.slope || (a.slope == b.slope && a.intercept < b.intercept);
    });
    // Upper envelope: slopes increase left to right.
    std::vector<LinearFn> st;
    st.reserve(ls.size());
    auto cross = [](const LinearFn& a, const LinearFn& b) {
        return (a.intercept - b.intercept) / (b.slope - a.slope);
    };
    for (const auto& l : ls) {
        if (!st.empty() && st.back().slope == l.slope) st.pop_back();
        while (st.size() >= 2 && cross(st[st.size() - 2], l) <= cross(st[st.size() - 2], st.back()))
            st.pop_back();
        st.push_back(l);
    }
    std::vector<double> bps;
    bps.reserve(st.size());
    for (std::size_t k = 1; k < st.size(); ++k) bps.push_back(cross(st[k - 1], st[k]));
    // Guard against round-off producing non-increasing crossings.
    std::vector<double> keep_b;
    std::vector<LinearFn> keep_s;
    keep_b.reserve(bps.size());
    keep_s.reserve(st.size());
    keep_s.push_back(st.front());
    for (std::size_t k = 0; k < bps.size(); ++k) {
        if (!keep_b.empty() && !(bps[k] > keep_b.back())) {
            keep_b.back() = bps[k];
            keep_s.back() = st[k + 1];
            continue;
        }
        keep_b.push_back(bps[k]);
        keep_s.push_back(st[k + 1]);
    }
    for (auto& l : keep_s) l = LinearFn{sgn * l.slope, sgn * l.intercept};
    return PiecewiseLinearFn(Interval{}, std::move(keep_b), std::move(keep_s)).canonical();
}

std::vector<double> intersection_abscissas(std::span<const PiecewiseLinearFn> fns, double tol) {
    std::vector<double> all;
    for (const auto& f : fns) all.insert(all.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double u : all)
        if (out.empty() || u - out.back() > tol) out.push_back(u);
    return out;
}

std::vector<double> gars_estimates(const Nonlinearity& nl, double y) {
    GlobalShape shape = classify_shape(nl);
    const auto& bs = nl.branches();
    const Interval& sup = nl.support();
    std::vector<double> out;
    if (shape.cls == ShapeClass::nonmonotonic) {
        std::size_t k = 1;
        while (bs[k].monotone_sign == bs[0].monotone_sign) ++k;
        ExtReal c = bs[k].domain.lo;
        NonlinearBranch left = run_branch(nl, sup.lo, c, bs[0].monotone_sign);
        NonlinearBranch right = run_branch(nl, c, sup.hi, bs[k].monotone_sign);
        ExtReal e1 = branch_estimate(left, left.domain, y);
        ExtReal e2 = branch_estimate(right, right.domain, y);
        if (e1.is_finite() && is_root(nl, e1.value(), y)) out.push_back(e1.value());
        if (e2.is_finite() && is_root(nl, e2.value(), y)) {
            if (out.empty() || e2.value() > out.back()) out.push_back(e2.value());
        }
        return out;
    }
    NonlinearBranch whole = run_branch(nl, sup.lo, sup.hi, bs[0].monotone_sign);
    ExtReal e = branch_estimate(whole, whole.domain, y);
    if (e.is_finite() && is_root(nl, e.value(), y)) out.push_back(e.value());
    return out;
}

PiecewiseLinearFn gars_minorant(const Nonlinearity& nl, const GlobalShape& shape, double y,
                                std::span<const double> est, std::span<const double> S) {
    check_support(S);
    if (shape.linear) return PiecewiseLinearFn(tangent_of(nl, 0.0));
    std::vector<LinearFn> lines;
    lines.reserve(S.size() + 2);
    const bool has_j = shape.cls == ShapeClass::nonmonotonic ? est.size() == 2 : est.size() == 1;
    if (!has_j) {
        // No interval J: all tangents, clamped at y.
        for (double s : S) lines.push_back(tangent_of(nl, s));
        return envelope_combine(lines, mode_for(shape.curvature_sign), y);
    }
    double lo, hi;
    if (shape.cls == ShapeClass::nonmonotonic) {
        lo = est[0];
        hi = est[1];
    } else if (shape.cls == ShapeClass::monotonic_a) {
        lo = -inf;
        hi = est[0];
    } else {
        lo = est[0];
        hi = inf;
    }
    for (double e : est)
        if (!contains_point(S, e))
            throw ContractError("support set is missing a simple estimate of '" + nl.label() + "'");
    std::vector<double> inside;
    inside.reserve(S.size());
    for (double s : S) {
        bool in = (s >= lo || near(s, lo)) && (s <= hi || near(s, hi));
        if (in) inside.push_back(s);
        else lines.push_back(tangent_of(nl, s));
    }
    if (shape.cls == ShapeClass::monotonic_a) lines.push_back(LinearFn{0.0, nl(inside.front())});
    if (shape.cls == ShapeClass::monotonic_b) lines.push_back(LinearFn{0.0, nl(inside.back())});
    for (std::size_t k = 1; k < inside.size(); ++k)
        lines.push_back(chord_of(nl, inside[k - 1], inside[k]));
    return envelope_combine(lines, mode_for(shape.curvature_sign));
}

PiecewiseLinearFn gars_minorant_nonmonotonic(const Nonlinearity& nl, double y,
                                             std::span<const double> S) {
    GlobalShape shape = classify_shape(nl);
    if (shape.cls != ShapeClass::nonmonotonic)
        throw ContractError("gars_minorant_nonmonotonic on a monotonic nonlinearity");
    auto est = gars_estimates(nl, y);
    if (est.size() == 1) est.clear();
    return gars_minorant(nl, shape, y, est, S);
}

PiecewiseLinearFn gars_minorant_monotonic(const Nonlinearity& nl, double y,
                                          std::span<const double> S) {
    GlobalShape shape = classify_shape(nl);
    if (shape.cls == ShapeClass::nonmonotonic)
        throw ContractError("gars_minorant_monotonic on a non-monotonic nonlinearity");
    return gars_minorant(nl, shape, y, gars_estimates(nl, y), S);
}

PiecewiseLinearFn gars_minorant(const Nonlinearity& nl, double y, std::span<const double> S) {
    GlobalShape shape = classify_shape(nl);
    if (shape.cls == ShapeClass::nonmonotonic) return gars_minorant_nonmonotonic(nl, y, S);
    return gars_minorant_monotonic(nl, y, S);
}

PiecewiseLinearFn build_hull(const TangentOracle& tangent, std::span<const double> knots) {
    if (knots.empty()) throw ContractError("build_hull needs at least one knot");
    for (std::size_t k = 1; k < knots.size(); ++k)
        if (!(knots[k] > knots[k - 1])) throw ContractError("hull knots must be strictly increasing");
    auto line_at = [&](double u, double toward) {
        OneSided t = tangent(u, toward);
        return LinearFn{t.slope, t.value - t.slope * u};
    };
    std::vector<double> bps;
    std::vector<LinearFn> segs;
    bps.reserve(2 * knots.size());
    segs.reserve(2 * knots.size() + 1);
    segs.push_back(line_at(knots.front(), knots.front() - 1.0));
    for (std::size_t q = 0; q + 1 < knots.size(); ++q) {
        const double u0 = knots[q], u1 = knots[q + 1];
        const double mid = 0.5 * (u0 + u1);
        LinearFn l0 = line_at(u0, mid), l1 = line_at(u1, mid);
        bps.push_back(u0);
        if (l1.slope - l0.slope > 0) {
            double xc = (l0.intercept - l1.intercept) / (l1.slope - l0.slope);
            if (xc > u0 && xc < u1) {
                segs.push_back(l0);
                bps.push_back(xc);
                segs.push_back(l1);
                continue;
            }
        }
        segs.push_back(l0(u1) + l0(u0) >= l1(u1) + l1(u0) ? l0 : l1);
    }
    bps.push_back(knots.back());
    segs.push_back(line_at(knots.back(), knots.back() + 1.0));
    return PiecewiseLinearFn(Interval{}, std::move(bps), std::move(segs)).canonical();
}

TangentOracle finite_difference_oracle(std::function<double(double)> f, double h) {
    return [f = std::move(f), h](double x, double toward) {
        double fx = f(x);
        double right = (f(x + h) - fx) / h;
        double left = (fx - f(x - h)) / h;
        double central = 0.5 * (left + right);
        // One-sided at kinks, central where both sides agree.
        double slope = std::abs(right - left) <= 1e-4 * (1.0 + std::abs(central))
                           ? central
                           : (toward < x ? left : right);
        return OneSided{fx, slope};
    };
}

PiecewiseLinearFn build_hull(const std::function<double(double)>& f, std::span<const double> knots,
                             double h) {
    return build_hull(finite_difference_oracle(f, h), knots);
}

PiecewiseExpDensity::PiecewiseExpDensity(std::vector<ExpSegment> segments, bool approximate)
    : segments_(std::move(segments)), approximate_(approximate) {
    double mx = -inf;
    for (const auto& s : segments_) mx = std::max(mx, s.log_mass);
    if (!std::isfinite(mx)) throw NumericError("envelope has no finite mass");
    double sum = 0;
    for (const auto& s : segments_) sum += std::exp(s.log_mass - mx);
    log_norm_ = mx + std::log(sum);
    double acc = 0;
    probs_.reserve(segments_.size());
    cumulative_.reserve(segments_.size());
    for (const auto& s : segments_) {
        double p = std::exp(s.log_mass - log_norm_);
        probs_.push_back(p);
        acc += p;
        cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
}

std::size_t PiecewiseExpDensity::segment_index(double x) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](double v, const ExpSegment& s) { return v < s.hi; });
    if (it == segments_.end()) return segments_.size() - 1;
    return static_cast<std::size_t>(it - segments_.begin());
}

double PiecewiseExpDensity::exponent(double x) const {
    if (x < segments_.front().lo || x > segments_.back().hi) return inf;
    return segments_[segment_index(x)].w(x);
}

double PiecewiseExpDensity::pdf(double x) const { return std::exp(-exponent(x) - log_norm_); }

double PiecewiseExpDensity::cdf(double x) const {
    if (x <= segments_.front().lo) return 0.0;
    if (x >= segments_.back().hi) return 1.0;
    std::size_t k = segment_index(x);
    double before = k == 0 ? 0.0 : cumulative_[k - 1];
    const ExpSegment& s = segments_[k];
    if (probs_[k] == 0) return before;
    // Mass of [lo, x].
    double a = s.w.slope;
    double lm;
    if (a == 0) lm = -s.w.intercept + std::log(x - s.lo);
    else if (a > 0) lm = -s.w(s.lo) + std::log(-std::expm1(-a * (x - s.lo))) - std::log(a);
    else lm = -s.w(x) + std::log(-std::expm1(a * (x - s.lo))) - std::log(-a);
    return before + std::exp(lm - log_norm_);
}

namespace {

double segment_log_mass(double lo, double hi, const LinearFn& w) {
    const double len = hi - lo;
    if (!(len > 0)) return -inf;
    const double a = w.slope;
    if (a == 0) return -w.intercept + std::log(len);
    if (a > 0) return -w(lo) + std::log(-std::expm1(-a * len)) - std::log(a);
    return -w(hi) + std::log(-std::expm1(a * len)) - std::log(-a);
}

}  // namespace

PiecewiseExpDensity normalize_piecewise_exp(const PiecewiseLinearFn& W, const NormalizeOptions& opt) {
    std::vector<ExpSegment> segs;
    bool approximate = false;
    const std::size_t n = W.segments().size();
    segs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double lo = W.segment_lo(k), hi = W.segment_hi(k);
        LinearFn w = W.segments()[k];
        if (std::isinf(lo) && !(w.slope < 0)) {
            if (!opt.epsilon_fallback || std::isinf(hi))
                throw ImproperEnvelope(ImproperEnvelope::Tail::left, w.slope);
            w = LinearFn{-opt.epsilon, w(hi) + opt.epsilon * hi};
            approximate = true;
        }
        if (std::isinf(hi) && !(w.slope > 0)) {
            if (!opt.epsilon_fallback || std::isinf(lo))
                throw ImproperEnvelope(ImproperEnvelope::Tail::right, w.slope);
            w = LinearFn{opt.epsilon, w(lo) - opt.epsilon * lo};
            approximate = true;
        }
        segs.push_back(ExpSegment{lo, hi, w, segment_log_mass(lo, hi, w)});
    }
    return PiecewiseExpDensity(std::move(segs), approximate);
}

double sample_piecewise_exp(const PiecewiseExpDensity& d, RandomSource& rng) {
    const auto& cum = d.cumulative();
    double u1 = rng.uniform();
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u1) - cum.begin());
    if (k >= cum.size()) k = cum.size() - 1;
    while (d.probabilities()[k] == 0 && k + 1 < cum.size()) ++k;
    const ExpSegment& s = d.segments()[k];
    const double len = s.hi - s.lo;
    const double a = s.w.slope;
    double u = rng.uniform();
    double x;
    if (a == 0 || (std::isfinite(len) && std::abs(a) * len < 1e-14)) {
        x = s.lo + u * len;
    } else if (a > 0) {
        x = s.lo - std::log1p(-u * -std::expm1(-a * len)) / a;
    } else {
        x = s.hi + std::log1p(-u * -std::expm1(a * len)) / (-a);
    }
    return std::clamp(x, s.lo, s.hi);
}

}  // namespace garsamp
