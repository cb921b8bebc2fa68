#pragma once

#include <cmath>
#include <vector>

#include "garsamp/model.hpp"

namespace fixtures {

using namespace garsamp;

inline JetFn exp_fn() {
    return [](double x) { double e = std::exp(x); return Jet{e, e, e}; };
}

inline JetFn exp_neg_fn() {
    return [](double x) { double e = std::exp(-x); return Jet{e, -e, e}; };
}

inline JetFn square_fn(double h = 0.0) {
    return [h](double x) { return Jet{(x - h) * (x - h), 2 * (x - h), 2.0}; };
}

inline JetFn affine_fn(double a, double b) {
    return [a, b](double x) { return Jet{a * x + b, a, 0.0}; };
}

inline Nonlinearity parabola(double h = 0.0) {
    return Nonlinearity(square_fn(h), Interval{}, {h}, {{-1, 1}, {1, 1}}, "parabola");
}

// y = [2, 5] after the gamma recentering; V1 = t^2, V2 gamma(2, 1).
inline ObservationModel example1_likelihood() {
    return ObservationModel({Observation{2.0, Nonlinearity::monotone(exp_fn(), 1, 1, "exp"), quadratic_potential(1.0)},
                             Observation{5.0, Nonlinearity::monotone(exp_neg_fn(), -1, 1, "exp-"),
                                         gamma_potential(2.0, 1.0)}});
}

inline ObservationModel example1_posterior() {
    return example1_likelihood().with_prior(gaussian_prior(0.0, std::sqrt(2.0)));
}

inline JetFn exp_abs_fn() {
    return [](double x) {
        double e = std::exp(std::abs(x));
        double s = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
        return Jet{e, s * e, e};
    };
}

// cosh(y - x^2) and alpha (eta - exp|x|)^2.
inline ObservationModel example2_model(double alpha = 0.2, double y = 5.0, double eta = 10.0) {
    Nonlinearity ea(exp_abs_fn(), Interval{}, {0.0}, {{-1, 1}, {1, 1}}, "exp-abs");
    return ObservationModel({Observation{y, parabola(), cosh_potential(1.0)},
                             Observation{eta, ea, quadratic_potential(alpha)}});
}

inline std::vector<double> grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = lo + (hi - lo) * k / static_cast<double>(n - 1);
    return g;
}

// Brute-force minimum over a grid.
template <class F>
std::pair<double, double> grid_min(F f, double lo, double hi, std::size_t n = 100000) {
    double bx = lo, bv = f(lo);
    for (double x : grid(lo, hi, n)) {
        double v = f(x);
        if (v < bv) {
            bv = v;
            bx = x;
        }
    }
    return {bx, bv};
}

}  // namespace fixtures
