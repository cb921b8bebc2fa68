#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "garsamp/bounds.hpp"

using namespace garsamp;
using namespace fixtures;

namespace {

const double log2_ = std::log(2.0), log5_ = std::log(5.0);

Interval example1_interval() { return Interval{-log5_, log2_}; }

}  // namespace

TEST_CASE("Example 1 minorant lines") {
    auto m = example1_likelihood();
    Interval I = example1_interval();
    LinearFn r1 = build_minorant_line(m.branch(0, 0), 2.0, I, log2_);
    CHECK(r1.slope == doctest::Approx(0.78).epsilon(0.005 / 0.78));
    CHECK(r1.intercept == doctest::Approx(1.45).epsilon(0.005 / 1.45));
    LinearFn r2 = build_minorant_line(m.branch(1, 0), 5.0, I, -log5_);
    CHECK(r2.slope == doctest::Approx(-1.95).epsilon(0.005 / 1.95));
    CHECK(r2.intercept == doctest::Approx(1.85).epsilon(0.005 / 1.85));
    CHECK(check_minorant(r1, m.branch(0, 0), 2.0, I));
    CHECK(check_minorant(r2, m.branch(1, 0), 5.0, I));
}

TEST_CASE("minorant of a linear branch is the branch") {
    Nonlinearity l = Nonlinearity::monotone(affine_fn(2, 1), 1, 1);
    for (double y : {-3.0, 0.0, 4.0}) {
        LinearFn r = build_minorant_line(l.branches()[0], y, Interval{-2.0, 5.0}, (y - 1) / 2);
        CHECK(r.slope == 2.0);
        CHECK(r.intercept == 1.0);
        CHECK(check_minorant(r, l.branches()[0], y, Interval{-2.0, 5.0}));
    }
}

TEST_CASE("check_minorant rejects a doubled residual") {
    // r = y + 2 (g - y) = 2 exp(x) - 2 is not a line; use the linear branch g = x.
    const NonlinearBranch& b = Nonlinearity::identity().branches()[0];
    double y = 1.0;
    LinearFn doubled{2.0, -y};
    CHECK_FALSE(check_minorant(doubled, b, y, Interval{-3.0, 3.0}));
    LinearFn crossing{-1.0, 2.0 * y};
    CHECK_FALSE(check_minorant(crossing, b, y, Interval{-3.0, 3.0}));
}

TEST_CASE("convex minimization") {
    Minimum q = minimize_convex_1d([](double x) { return (x - 2) * (x - 2); }, 0.0, 5.0);
    CHECK(std::abs(q.x - 2.0) < 1e-8);
    CHECK(std::abs(q.value) < 1e-8);
    Minimum a = minimize_convex_1d([](double x) { return std::abs(x); }, -1.0, 3.0);
    CHECK(std::abs(a.x) < 1e-8);
    CHECK(std::abs(a.value) < 1e-8);
    CHECK_THROWS_AS(minimize_convex_1d([](double) { return NAN; }, 0.0, 1.0), NumericError);
}

TEST_CASE("Example 1 modified potential minimizer") {
    auto m = example1_likelihood();
    auto est = simple_estimates(m, 0);
    auto lines = bm1_lines(m, est);
    Minimum mn = minimize_convex_1d([&](double x) { return modified_potential(m, lines, x); }, -log5_, log2_);
    CHECK(mn.x == doctest::Approx(-0.4171).epsilon(1e-2));
    CHECK(std::abs(mn.x + 0.4171) < 1e-2);
}

TEST_CASE("BM1 on Example 1") {
    BoundReport r = bm1_bound(example1_likelihood());
    CHECK(std::abs(r.gamma - 2.89) <= 0.01);
    CHECK(r.likelihood_bound() == doctest::Approx(std::exp(-r.gamma)));
}

TEST_CASE("BM1 with linear nonlinearities is exact") {
    ObservationModel m({Observation{1.0, Nonlinearity::monotone(affine_fn(1, 0), 1, 1), quadratic_potential()},
                        Observation{3.0, Nonlinearity::monotone(affine_fn(2, 1), 1, 1), quadratic_potential(2.0)},
                        Observation{-1.0, Nonlinearity::monotone(affine_fn(-1, 0.5), -1, 1), lp_potential(1.5)}});
    BoundReport r = bm1_bound(m);
    auto [x, v] = grid_min([&](double t) { return system_potential(m, t); }, -5, 5, 200001);
    CHECK(std::abs(r.gamma - v) < 1e-6);

    ObservationModel fit({Observation{4.0, Nonlinearity::identity(), quadratic_potential()}});
    BoundReport f = bm1_bound(fit);
    CHECK(std::abs(f.gamma) < 1e-12);
    CHECK(f.best().minimizer == doctest::Approx(4.0));
}

TEST_CASE("BM2 on Example 1") {
    auto m = example1_likelihood();
    BoundReport r3 = bm2_bound(m, 3);
    CHECK(std::abs(r3.gamma - 3.77) <= 0.01);
    CHECK(r3.iterations == 3);
    BoundReport r12 = bm2_bound(m, 12);
    CHECK(std::abs(r12.gamma - 3.7835) <= 0.005);
    CHECK(bm2_bound(m, 0).gamma == bm1_bound(m).gamma);
    for (std::size_t k = 1; k < r12.history.size(); ++k) CHECK(r12.history[k] >= r12.history[k - 1] - 1e-9);
}

TEST_CASE("quadratic closed form") {
    std::vector<LinearFn> same{{1, 0}, {1, 0}};
    std::vector<double> ones{1, 1};
    QuadraticBound a = quadratic_bound(same, ones);
    CHECK(a.x == doctest::Approx(1.0));
    CHECK(std::abs(a.gamma2) < 1e-12);
    std::vector<LinearFn> opposite{{1, 0}, {-1, 0}};
    QuadraticBound b = quadratic_bound(opposite, ones);
    CHECK(std::abs(b.x) < 1e-12);
    CHECK(b.gamma2 == doctest::Approx(2.0));

    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int k = 0; k < 10; ++k) {
        std::vector<LinearFn> ls;
        std::vector<double> y;
        for (int i = 0; i < 3; ++i) {
            ls.push_back(LinearFn{n(rng), n(rng)});
            y.push_back(n(rng));
        }
        QuadraticBound q = quadratic_bound(ls, y);
        auto f = [&](double x) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += std::pow(y[i] - ls[i](x), 2);
            return s;
        };
        Minimum mn = minimize_convex_1d(f, q.x - 50, q.x + 50, 1e-12);
        CHECK(std::abs(q.gamma2 - mn.value) < 1e-8);
    }
}

TEST_CASE("lp transform") {
    CHECK(lp_transform_bound(5.0, 2.0, 3) == doctest::Approx(5.0));
    CHECK(lp_transform_bound(4.0, 1.0, 3) == doctest::Approx(2.0));
    CHECK(lp_transform_bound(2.0, 4.0, 2) == doctest::Approx(2.0));
    for (std::size_t n : {1, 2, 7}) {
        CHECK(lp_transform_bound(3.0, 2.0, n) == 3.0);
        CHECK(lp_transform_bound(3.0, 2.0 + 1e-9, n) == doctest::Approx(lp_transform_bound(3.0, 2.0 - 1e-9, n)));
    }
}

TEST_CASE("generic transform") {
    auto inv = [](double v) { return -std::log(std::sqrt(v) + 1) + std::sqrt(v) + 1; };
    CHECK(generic_transform_bound(2.79, inv) - 1.0 == doctest::Approx(1.68 - 1.0).epsilon(0.01 / 0.68));
    CHECK(generic_transform_bound(2.5, [](double v) { return v; }) == 2.5);
    CHECK_THROWS_AS(generic_transform_bound(1.0, [](double v) { return -v; }), ContractError);

    auto m = example1_likelihood();
    BoundReport t = transform_bound(m, inv);
    CHECK(std::abs(t.gamma - 1.68) <= 0.01);
    CHECK(std::abs(t.regions[0].gamma - t.gamma) < 1e-12);
}

TEST_CASE("transform bound of the gamma potential alone is sound") {
    // V2 with R = identity on a single observation.
    ObservationModel m({Observation{5.0, Nonlinearity::monotone(exp_neg_fn(), -1, 1), gamma_potential(2.0, 1.0)}});
    BoundReport t = transform_bound(m, [](double v) { return v; });
    auto [x, v] = grid_min([&](double s) { return system_potential(m, s); }, -std::log(6.0) + 1e-9, 10.0);
    CHECK(t.gamma <= v + 1e-9);
}

TEST_CASE("tangent bound") {
    auto m = example1_likelihood();
    BoundReport t = tangent_bound(m);
    CHECK(std::abs(t.gamma - 1.61) <= 0.01);
    CHECK(t.gamma <= bm1_bound(m).gamma);

    // Symmetric quadratic potential on a symmetric interval.
    ObservationModel sym({Observation{1.0, Nonlinearity::identity(), quadratic_potential()},
                          Observation{-1.0, Nonlinearity::identity(), quadratic_potential()}});
    RegionBound s = convex_tangent_bound(sym, 0);
    // Tangents 4x and -4x at the interval ends meet at the origin.
    CHECK(std::abs(s.minimizer) < 1e-6);
    CHECK(std::abs(s.gamma) < 1e-5);
}

TEST_CASE("quad and lp bounds reject incompatible potentials") {
    auto m = example1_likelihood();
    CHECK_THROWS_AS(quad_bound(m), ContractError);
    CHECK_THROWS_AS(lp_bound(m), ContractError);
}
