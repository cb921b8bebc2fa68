#include "garsamp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace garsamp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_ratio(double ratio, double x, const SamplerOptions& opt, SamplerTrace& trace,
                 bool bound_error) {
    if (ratio <= 1 + opt.tol) return;
    if (opt.diagnostic) {
        ++trace.violations;
        return;
    }
    if (bound_error) throw BoundViolation(x, ratio);
    throw EnvelopeViolation(x, ratio);
}

void insert_sorted(std::vector<double>& v, double x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) return;
    v.insert(it, x);
}

}  // namespace

double SamplerTrace::acceptance_rate() const {
    return total_proposals ? static_cast<double>(samples.size()) / total_proposals : 0.0;
}

std::vector<double> SamplerTrace::running_acceptance() const {
    std::vector<double> out;
    std::size_t props = 0;
    for (std::size_t k = 0; k < proposals.size(); ++k) {
        props += proposals[k];
        out.push_back(static_cast<double>(k + 1) / props);
    }
    return out;
}

void SamplerTrace::append(const SamplerTrace& o) {
    samples.insert(samples.end(), o.samples.begin(), o.samples.end());
    proposals.insert(proposals.end(), o.proposals.begin(), o.proposals.end());
    first_accepted.insert(first_accepted.end(), o.first_accepted.begin(), o.first_accepted.end());
    start_log_normalizer.insert(start_log_normalizer.end(), o.start_log_normalizer.begin(),
                                o.start_log_normalizer.end());
    support_sizes.insert(support_sizes.end(), o.support_sizes.begin(), o.support_sizes.end());
    total_proposals += o.total_proposals;
    rebuilds += o.rebuilds;
    violations += o.violations;
    approximate = approximate || o.approximate;
}

SamplerTrace rejection_sample_fixed(const ObservationModel& m, const PriorSampler& prior_sampler,
                                    double L, std::size_t N, RandomSource& rng,
                                    const SamplerOptions& opt) {
    if (!(L > 0)) throw ParameterError("likelihood bound L must be positive");
    if (!prior_sampler) throw ContractError("fixed-bound rejection sampling needs a prior sampler");
    const double log_l = std::log(L);
    const double offset = opt.include_constant ? 0.0 : m.constant();
    SamplerTrace trace;
    for (std::size_t n = 0; n < N; ++n) {
        std::size_t count = 0;
        while (true) {
            double x = prior_sampler(rng);
            ++count;
            ++trace.total_proposals;
            double ratio = 0.0;
            if (m.support().contains(x)) ratio = std::exp(-(observation_potential(m, x) - offset) - log_l);
            check_ratio(ratio, x, opt, trace, true);
            double u = rng.uniform();
            if (ratio > u) {
                trace.samples.push_back(x);
                trace.proposals.push_back(count);
                trace.first_accepted.push_back(count == 1);
                break;
            }
        }
    }
    return trace;
}

SamplerTrace ars_run(const TangentOracle& tangent, const std::function<double(double)>& potential,
                     std::vector<double> S, std::size_t N, RandomSource& rng,
                     const SamplerOptions& opt) {
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    if (S.size() < 2) throw ContractError("ARS needs at least two initial support points");
    if (!(tangent(S.front(), S.front() - 1).slope < 0) || !(tangent(S.back(), S.back() + 1).slope > 0))
        throw ContractError("ARS initial support points need tangent slopes of opposite sign");
    SamplerTrace trace;
    auto density = normalize_piecewise_exp(build_hull(tangent, S));
    for (std::size_t n = 0; n < N; ++n) {
        std::size_t count = 0;
        trace.start_log_normalizer.push_back(density.log_normalizer());
        while (true) {
            double x = sample_piecewise_exp(density, rng);
            ++count;
            ++trace.total_proposals;
            double ratio = std::exp(density.exponent(x) - potential(x));
            check_ratio(ratio, x, opt, trace, false);
            if (rng.uniform() <= ratio) {
                trace.samples.push_back(x);
                trace.proposals.push_back(count);
                trace.first_accepted.push_back(count == 1);
                trace.support_sizes.push_back(S.size());
                break;
            }
            insert_sorted(S, x);
            density = normalize_piecewise_exp(build_hull(tangent, S));
            ++trace.rebuilds;
        }
    }
    return trace;
}

SamplerTrace ars_run(const std::function<double(double)>& potential, std::vector<double> S0,
                     std::size_t N, RandomSource& rng, const SamplerOptions& opt) {
    return ars_run(finite_difference_oracle(potential), potential, std::move(S0), N, rng, opt);
}

GarsState::GarsState(ObservationModel m, GarsOptions opt)
    : model_(std::move(m)), opt_(std::move(opt)), terms_(model_.extended_terms()) {}

double GarsState::target_potential(double x) const {
    double v = model_.constant();
    for (const auto& t : terms_) v += t.v(t.y - t.g(x));
    return v;
}

double GarsState::modified_potential(double x) const {
    double v = model_.constant();
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        double r = minorants_[i] ? (*minorants_[i])(x) : terms_[i].g(x);
        v += terms_[i].v(terms_[i].y - r);
    }
    return v;
}

OneSided GarsState::tangent(double x, double toward) const {
    OneSided out{model_.constant(), 0.0};
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        double a, b;
        if (minorants_[i]) {
            const LinearFn& l = minorants_[i]->segment_at(toward);
            a = l.slope;
            b = l.intercept;
        } else {
            Jet j = terms_[i].g.jet(x);
            a = j.d1;
            b = j.value - j.d1 * x;
        }
        Jet v = terms_[i].v.jet(terms_[i].y - (a * x + b));
        out.value += v.value;
        out.slope -= v.d1 * a;
    }
    return out;
}

void GarsState::rebuild() {
    minorants_.clear();
    std::vector<double> raw;
    raw.reserve(4 * support_.size() + 8);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (shapes_[i].linear) {
            minorants_.emplace_back(std::nullopt);
            continue;
        }
        PiecewiseLinearFn r = gars_minorant(terms_[i].g, shapes_[i], terms_[i].y, estimates_[i], support_);
        raw.insert(raw.end(), r.breakpoints().begin(), r.breakpoints().end());
        minorants_.emplace_back(std::move(r));
    }
    std::sort(raw.begin(), raw.end());
    intersections_.clear();
    for (double u : raw)
        if (intersections_.empty() || u - intersections_.back() > 1e-9) intersections_.push_back(u);
    if (opt_.knots_include_support || raw.empty()) {
        raw.insert(raw.end(), support_.begin(), support_.end());
        std::sort(raw.begin(), raw.end());
    }
    knots_.clear();
    for (double u : raw)
        if (knots_.empty() || std::abs(u - knots_.back()) > 1e-12 * std::max(1.0, std::abs(u)))
            knots_.push_back(u);
    // Push the outer knots out until the tail tangents are integrable.
    double delta = 1.0;
    for (int it = 0; it < 64 && !(tangent(knots_.front(), knots_.front() - 1.0).slope < 0); ++it) {
        knots_.insert(knots_.begin(), knots_.front() - delta);
        delta *= 2;
    }
    delta = 1.0;
    for (int it = 0; it < 64 && !(tangent(knots_.back(), knots_.back() + 1.0).slope > 0); ++it) {
        knots_.push_back(knots_.back() + delta);
        delta *= 2;
    }
    hull_ = build_hull([this](double x, double toward) { return tangent(x, toward); }, knots_);
    density_ = normalize_piecewise_exp(*hull_, opt_.normalize);
}

void GarsState::add_support_point(double x) {
    // Where the target overflows no tangent exists; pull x toward the nearest
    // support point until it is finite.
    if (!std::isfinite(target_potential(x)) && !support_.empty()) {
        auto it = std::lower_bound(support_.begin(), support_.end(), x);
        double near = it == support_.end() ? support_.back()
                      : it == support_.begin() ? *it
                      : (x - *(it - 1) < *it - x ? *(it - 1) : *it);
        for (int k = 0; k < 200 && !std::isfinite(target_potential(x)); ++k) x = 0.5 * (x + near);
        if (!std::isfinite(target_potential(x)) || std::abs(x - near) <= 1e-9 * std::max(1.0, std::abs(near))) return;
    }
    insert_sorted(support_, x);
    rebuild();
}

GarsState gars_init(const ObservationModel& m, const GarsOptions& opt, RandomSource* rng) {
    GarsState st(m, opt);
    for (const auto& t : st.terms_) {
        if (!t.v.convex() || !t.v.finite_everywhere())
            throw ContractError("GARS needs convex marginal potentials finite on the real line");
        if (t.g.support().lo.is_finite() || t.g.support().hi.is_finite())
            throw ContractError("GARS needs nonlinearities defined on the real line");
        st.shapes_.push_back(classify_shape(t.g));
        st.estimates_.push_back(gars_estimates(t.g, t.y));
    }
    for (const auto& est : st.estimates_)
        for (double e : est) insert_sorted(st.support_, e);
    auto draw = [&](double lo, double hi) {
        if (opt.rule == ExtraPointRule::uniform) {
            if (!rng) throw ContractError("uniform extra-point rule needs a random source");
            return lo + rng->uniform() * (hi - lo);
        }
        return 0.5 * (lo + hi);
    };
    for (std::size_t i = 0; i < st.terms_.size(); ++i) {
        const auto& est = st.estimates_[i];
        const auto& shape = st.shapes_[i];
        double lo, hi;
        if (shape.cls == ShapeClass::nonmonotonic) {
            if (est.size() != 2) continue;
            lo = est[0];
            hi = est[1];
        } else {
            if (est.size() != 1) continue;
            if (shape.cls == ShapeClass::monotonic_a) {
                lo = est[0] - 2.0;
                hi = est[0];
            } else {
                lo = est[0];
                hi = est[0] + 2.0;
            }
        }
        bool has_inner = std::any_of(st.support_.begin(), st.support_.end(),
                                     [&](double s) { return s > lo && s < hi; });
        if (has_inner) continue;
        double s = draw(lo, hi);
        if (s > lo && s < hi) insert_sorted(st.support_, s);
    }
    if (st.support_.empty()) st.support_.push_back(0.0);
    st.rebuild();
    return st;
}

StepResult gars_step(GarsState& state, RandomSource& rng, SamplerTrace* trace) {
    const auto& d = state.density();
    StepResult r;
    r.x = sample_piecewise_exp(d, rng);
    r.ratio = std::exp(d.exponent(r.x) - state.target_potential(r.x));
    SamplerTrace scratch;
    SamplerTrace& t = trace ? *trace : scratch;
    ++t.total_proposals;
    t.approximate = t.approximate || d.approximate();
    check_ratio(r.ratio, r.x, state.options().sampler, t, false);
    r.accepted = rng.uniform() <= r.ratio;
    if (!r.accepted) {
        state.add_support_point(r.x);
        ++t.rebuilds;
    }
    return r;
}

SamplerTrace gars_run(GarsState& state, std::size_t N, RandomSource& rng) {
    SamplerTrace trace;
    for (std::size_t n = 0; n < N; ++n) {
        trace.start_log_normalizer.push_back(state.density().log_normalizer());
        std::size_t count = 0;
        while (true) {
            StepResult r = gars_step(state, rng, &trace);
            ++count;
            if (r.accepted) {
                trace.samples.push_back(r.x);
                trace.proposals.push_back(count);
                trace.first_accepted.push_back(count == 1);
                trace.support_sizes.push_back(state.support().size());
                break;
            }
        }
    }
    return trace;
}

SamplerTrace gars_run(const ObservationModel& m, std::size_t N, RandomSource& rng,
                      const GarsOptions& opt) {
    GarsState st = gars_init(m, opt, &rng);
    return gars_run(st, N, rng);
}

RangeModel2D::RangeModel2D(std::vector<std::array<double, 2>> sensors, std::vector<double> y,
                           std::vector<MarginalPotential> noise, std::array<Prior, 2> priors)
    : sensors_(std::move(sensors)), y_(std::move(y)), noise_(std::move(noise)),
      priors_(std::move(priors)) {
    if (sensors_.size() != y_.size() || noise_.size() != y_.size())
        throw ModelError("range model: sensors, observations and noise must have equal length");
    for (int c = 0; c < 2; ++c)
        for (const auto& h : sensors_) {
            double hc = h[c];
            ranges_[c].emplace_back(
                [hc](double x) { return Jet{(x - hc) * (x - hc), 2 * (x - hc), 2.0}; }, Interval{},
                std::vector<double>{hc}, std::vector<BranchDecl>{{-1, 1}, {1, 1}},
                "(x-" + std::to_string(hc) + ")^2");
        }
}

ObservationModel RangeModel2D::conditional(int c, double other) const {
    std::vector<Observation> obs;
    for (std::size_t k = 0; k < sensors_.size(); ++k) {
        double d = other - sensors_[k][1 - c];
        obs.push_back(Observation{y_[k] - d * d, ranges_[c][k], noise_[k]});
    }
    return ObservationModel(std::move(obs), priors_[c]);
}

double RangeModel2D::potential(double x1, double x2) const {
    double v = priors_[0].v(priors_[0].mode - x1) + priors_[1].v(priors_[1].mode - x2);
    for (std::size_t k = 0; k < sensors_.size(); ++k) {
        double d1 = x1 - sensors_[k][0], d2 = x2 - sensors_[k][1];
        v += noise_[k](y_[k] - d1 * d1 - d2 * d2);
    }
    return v;
}

namespace {

template <class Draw>
GibbsResult run_gibbs(const RangeModel2D& model, std::size_t N, RandomSource& rng,
                      const GibbsOptions& opt, Draw draw) {
    if (!model.priors()[1].sampler) throw ContractError("Gibbs initialization needs a prior sampler");
    GibbsResult out;
    double x2 = model.priors()[1].sampler(rng);
    for (std::size_t i = 0; i < N + opt.burn; ++i) {
        double x1 = draw(model.conditional(0, x2), 0, out.trace);
        x2 = draw(model.conditional(1, x1), 1, out.trace);
        if (i >= opt.burn) out.chain.push_back({x1, x2});
    }
    return out;
}

}  // namespace

GibbsResult gibbs_gars(const RangeModel2D& model, std::size_t N, RandomSource& rng,
                       const GibbsOptions& opt) {
    return run_gibbs(model, N, rng, opt,
                     [&](const ObservationModel& cm, int, SamplerTrace& trace) {
                         SamplerTrace t = gars_run(cm, 1, rng, opt.gars);
                         trace.append(t);
                         return t.samples.front();
                     });
}

GibbsResult gibbs_fixed_rs(const RangeModel2D& model, std::size_t N, RandomSource& rng,
                           const GibbsOptions& opt) {
    return run_gibbs(model, N, rng, opt,
                     [&](const ObservationModel& cm, int c, SamplerTrace& trace) {
                         ObservationModel lik = cm.without_prior();
                         double gamma = quad_bound(lik).gamma;
                         SamplerTrace t = rejection_sample_fixed(
                             lik, model.priors()[c].sampler, std::exp(-gamma), 1, rng, opt.sampler);
                         trace.append(t);
                         return t.samples.front();
                     });
}

}  // namespace garsamp
