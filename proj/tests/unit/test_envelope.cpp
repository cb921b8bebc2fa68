#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "garsamp/envelope.hpp"
#include "garsamp/oracle.hpp"

using namespace garsamp;
using namespace fixtures;

namespace {

// |y - r| <= |y - g| and no sign change, on [-50, 50].
bool minorant_holds(const PiecewiseLinearFn& r, const Nonlinearity& g, double y, double lo = -50,
                    double hi = 50, std::size_t n = 10000) {
    for (double x : grid(lo, hi, n)) {
        double a = y - r(x), b = y - g(x);
        double tol = 1e-9 * std::max(1.0, std::abs(b));
        if (std::abs(a) > std::abs(b) + tol || a * b < -tol) return false;
    }
    return true;
}

// Adaptive Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, double eps, int depth = 40) {
    auto rec = [&](auto&& self, double a0, double b0, double fa, double fm, double fb, double whole,
                   double e, int d) -> double {
        double m = 0.5 * (a0 + b0), lm = 0.5 * (a0 + m), rm = 0.5 * (m + b0);
        double flm = f(lm), frm = f(rm);
        double left = (m - a0) / 6 * (fa + 4 * flm + fm), right = (b0 - m) / 6 * (fm + 4 * frm + fb);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * e) return left + right + (left + right - whole) / 15;
        return self(self, a0, m, fa, flm, fm, left, e / 2, d - 1) + self(self, m, b0, fm, frm, fb, right, e / 2, d - 1);
    };
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(rec, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), eps, depth);
}

}  // namespace

TEST_CASE("envelope of two crossing lines") {
    std::vector<LinearFn> ls{{1, 0}, {-1, 2}};
    PiecewiseLinearFn e = envelope_combine(ls, EnvelopeMode::max);
    REQUIRE(e.breakpoints().size() == 1);
    CHECK(e.breakpoints()[0] == doctest::Approx(1.0));
    CHECK(e(1.0) == doctest::Approx(1.0));
    PiecewiseLinearFn lo = envelope_combine(ls, EnvelopeMode::min);
    CHECK(lo(1.0) == doctest::Approx(1.0));
    CHECK(lo(3.0) == doctest::Approx(-1.0));
}

TEST_CASE("envelope of one line") {
    std::vector<LinearFn> ls{{0.5, -2}};
    PiecewiseLinearFn e = envelope_combine(ls, EnvelopeMode::max);
    CHECK(e.breakpoints().empty());
    CHECK(e.segments()[0].slope == 0.5);
    CHECK(e.segments()[0].intercept == -2);
}

TEST_CASE("envelope equals the pointwise extremum") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0, 3);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<LinearFn> ls;
        for (int k = 0; k < 10; ++k) ls.push_back(LinearFn{n(rng), n(rng)});
        PiecewiseLinearFn mx = envelope_combine(ls, EnvelopeMode::max);
        PiecewiseLinearFn mn = envelope_combine(ls, EnvelopeMode::min);
        for (int k = 0; k < 1000; ++k) {
            double x = u(rng), hi = -INFINITY, lo = INFINITY;
            for (const auto& l : ls) {
                hi = std::max(hi, l(x));
                lo = std::min(lo, l(x));
            }
            CHECK(std::abs(mx(x) - hi) <= 1e-12 * std::max(1.0, std::abs(hi)) * 100);
            CHECK(std::abs(mn(x) - lo) <= 1e-12 * std::max(1.0, std::abs(lo)) * 100);
        }
    }
}

TEST_CASE("clamped envelope") {
    std::vector<LinearFn> ls{{-2, -2}, {2, -2}};
    PiecewiseLinearFn e = envelope_combine(ls, EnvelopeMode::max, -1.0);
    CHECK(e(0.0) == doctest::Approx(-1.0));
    CHECK(e(2.0) == doctest::Approx(2.0));
}

TEST_CASE("intersection abscissas") {
    PiecewiseLinearFn f(Interval{}, {0.0, 2.0}, {{0, 0}, {1, 0}, {0, 2}});
    auto a = intersection_abscissas(std::vector<PiecewiseLinearFn>{f});
    REQUIRE(a.size() == 2);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 2.0);
    PiecewiseLinearFn g(Interval{}, {1.0}, {{0, 1}, {1, 0}});
    PiecewiseLinearFn h(Interval{}, {1.0 + 1e-12}, {{0, 1}, {1, 0}});
    CHECK(intersection_abscissas(std::vector<PiecewiseLinearFn>{g, h}).size() == 1);
}

TEST_CASE("nonmonotonic minorant with two estimates") {
    double s5 = std::sqrt(5.0);
    std::vector<double> S{-s5, 0.0, s5};
    PiecewiseLinearFn r = gars_minorant_nonmonotonic(parabola(), 5.0, S);
    CHECK(r(-s5 / 2) == doctest::Approx(-s5 * (-s5 / 2)));  // chord through (-s5, 5) and (0, 0)
    CHECK(r(s5 / 2) == doctest::Approx(s5 * (s5 / 2)));
    CHECK(minorant_holds(r, parabola(), 5.0, -10, 10));
    CHECK(minorant_holds(r, parabola(), 5.0));
}

TEST_CASE("nonmonotonic minorant with one or no estimate") {
    std::vector<double> S{-1.0, 0.0, 1.0};
    PiecewiseLinearFn r0 = gars_minorant_nonmonotonic(parabola(), 0.0, S);
    for (double x : grid(-10, 10, 1001)) CHECK(r0(x) >= -1e-12);
    CHECK(minorant_holds(r0, parabola(), 0.0));

    std::vector<double> T{-1.0, 1.0};
    PiecewiseLinearFn rn = gars_minorant_nonmonotonic(parabola(), -1.0, T);
    for (double x : grid(-10, 10, 1001))
        CHECK(rn(x) == doctest::Approx(std::max({-2 * x - 1, 2 * x - 1, -1.0})));
    CHECK(minorant_holds(rn, parabola(), -1.0, -10, 10));
}

TEST_CASE("monotonic minorants") {
    Nonlinearity e = Nonlinearity::monotone(exp_fn(), 1, 1);
    std::vector<double> S{-1.0, 0.0, std::log(2.0)};
    CHECK(minorant_holds(gars_minorant_monotonic(e, 2.0, S), e, 2.0, -10, 10));
    CHECK(minorant_holds(gars_minorant_monotonic(e, -1.0, std::vector<double>{-1.0, 0.0}), e, -1.0, -10, 10));

    Nonlinearity d = Nonlinearity::monotone(exp_neg_fn(), -1, 1);
    std::vector<double> T{-std::log(5.0), 0.0, 1.0};
    CHECK(minorant_holds(gars_minorant_monotonic(d, 5.0, T), d, 5.0, -10, 10));

    Nonlinearity l = Nonlinearity::monotone(affine_fn(2, 1), 1, 1);
    PiecewiseLinearFn r = gars_minorant_monotonic(l, 3.0, std::vector<double>{-1.0, 1.0, 4.0});
    for (double x : grid(-5, 5, 101)) CHECK(r(x) == doctest::Approx(2 * x + 1));
}

TEST_CASE("minorants are missing an estimate") {
    CHECK_THROWS_AS(gars_minorant(Nonlinearity::monotone(exp_fn(), 1, 1), classify_shape(Nonlinearity::monotone(exp_fn(), 1, 1)),
                                  2.0, std::vector<double>{std::log(2.0)}, std::vector<double>{0.0}),
                    ContractError);
}

TEST_CASE("minorants refine monotonically") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4, 4);
    Nonlinearity g = parabola();
    for (double y : {5.0, 0.5, -1.0}) {
        std::vector<double> S;
        if (y > 0) S = {-std::sqrt(y), std::sqrt(y)};
        else S = {-1.0, 1.0};
        PiecewiseLinearFn prev = gars_minorant(g, y, S);
        for (int k = 0; k < 20; ++k) {
            double x = u(rng);
            S.insert(std::upper_bound(S.begin(), S.end(), x), x);
            PiecewiseLinearFn next = gars_minorant(g, y, S);
            for (double t : grid(-10, 10, 501)) CHECK(std::abs(y - next(t)) >= std::abs(y - prev(t)) - 1e-9);
            CHECK(minorant_holds(next, g, y));
            prev = next;
        }
    }
}

TEST_CASE("hull of a parabola") {
    auto f = [](double x) { return x * x; };
    PiecewiseLinearFn W = build_hull(f, std::vector<double>{-1.0, 1.0});
    CHECK(W(0.0) == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(W(0.5) == doctest::Approx(2 * 0.5 - 1).epsilon(1e-5));
    for (double x : grid(-5, 5, 1001)) CHECK(W(x) <= f(x) + 1e-6);
}

TEST_CASE("hull of a linear function is exact") {
    auto f = [](double x) { return 3 * x + 1; };
    PiecewiseLinearFn W = build_hull(f, std::vector<double>{-2.0, 0.0, 5.0});
    for (double x : grid(-10, 10, 201)) CHECK(W(x) == doctest::Approx(f(x)).epsilon(1e-6));
}

TEST_CASE("normalizing piecewise exponentials") {
    PiecewiseLinearFn flat(Interval{0.0, 1.0}, {}, {{0, 0}});
    PiecewiseExpDensity u = normalize_piecewise_exp(flat);
    CHECK(u.log_normalizer() == doctest::Approx(0.0));
    CHECK(u.pdf(0.3) == doctest::Approx(1.0));
    CHECK(u.pdf(1.5) == 0.0);

    PiecewiseLinearFn lap(Interval{}, {0.0}, {{-1, 0}, {1, 0}});
    PiecewiseExpDensity l = normalize_piecewise_exp(lap);
    CHECK(l.log_normalizer() == doctest::Approx(std::log(2.0)));
    CHECK(l.cdf(0.0) == doctest::Approx(0.5));
    CHECK(l.cdf(1.0) == doctest::Approx(1 - 0.5 * std::exp(-1.0)));
    CHECK(l.cumulative().back() == 1.0);
}

TEST_CASE("closed-form normalizer matches quadrature") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> knots;
        for (int k = 0; k < 5; ++k) knots.push_back(n(rng) * 2);
        knots.insert(knots.end(), {-3.0, 3.0});
        std::sort(knots.begin(), knots.end());
        auto f = [](double x) { return 0.5 * x * x + std::cosh(0.3 * x); };
        PiecewiseLinearFn W = build_hull(f, knots);
        PiecewiseExpDensity d = normalize_piecewise_exp(W);
        double lo = knots.front() - 40, hi = knots.back() + 40;
        std::vector<double> cuts{lo};
        for (double b : W.breakpoints()) cuts.push_back(b);
        cuts.push_back(hi);
        double mass = 0;
        for (std::size_t k = 1; k < cuts.size(); ++k)
            mass += simpson([&](double x) { return std::exp(-W(x)); }, cuts[k - 1], cuts[k], 1e-14);
        CHECK(std::abs(std::log(mass) - d.log_normalizer()) <= 1e-8);
        double total = 0;
        for (double p : d.probabilities()) total += p;
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("improper envelopes") {
    PiecewiseLinearFn flat_tail(Interval{}, {0.0}, {{0, 0}, {1, 0}});
    CHECK_THROWS_AS(normalize_piecewise_exp(flat_tail), ImproperEnvelope);
    NormalizeOptions eps;
    eps.epsilon_fallback = true;
    PiecewiseExpDensity d = normalize_piecewise_exp(flat_tail, eps);
    CHECK(d.approximate());
    CHECK(std::isfinite(d.log_normalizer()));
}

TEST_CASE("uniform segment sampling") {
    PiecewiseExpDensity u = normalize_piecewise_exp(PiecewiseLinearFn(Interval{0.0, 1.0}, {}, {{0, 0}}));
    RandomSource rng(3);
    double s = 0;
    for (int k = 0; k < 100000; ++k) s += sample_piecewise_exp(u, rng);
    CHECK(std::abs(s / 100000 - 0.5) < 0.005);
}

TEST_CASE("Laplace sampling against the analytic CDF") {
    PiecewiseExpDensity l = normalize_piecewise_exp(PiecewiseLinearFn(Interval{}, {0.0}, {{-1, 0}, {1, 0}}));
    RandomSource rng(8);
    const std::size_t N = 100000;
    std::vector<double> xs(N);
    for (auto& x : xs) x = sample_piecewise_exp(l, rng);
    std::sort(xs.begin(), xs.end());
    auto F = [](double x) { return x < 0 ? 0.5 * std::exp(x) : 1 - 0.5 * std::exp(-x); };
    double d = 0;
    for (std::size_t i = 0; i < N; ++i)
        d = std::max({d, (i + 1.0) / N - F(xs[i]), F(xs[i]) - static_cast<double>(i) / N});
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("segment frequencies match masses") {
    PiecewiseLinearFn W(Interval{-1.0, 3.0}, {1.0}, {{0.5, 0}, {-0.2, 0.7}});
    PiecewiseExpDensity d = normalize_piecewise_exp(W);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomSource rng(seed);
        const std::size_t N = 20000;
        std::size_t left = 0;
        for (std::size_t k = 0; k < N; ++k) left += sample_piecewise_exp(d, rng) < 1.0;
        double e0 = N * d.probabilities()[0], e1 = N * d.probabilities()[1];
        double chi = std::pow(left - e0, 2) / e0 + std::pow(N - left - e1, 2) / e1;
        CHECK(chi_square_pvalue(chi, 1.0) > 0.001);
    }
}
