#include "garsamp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace garsamp {

GridOracle::GridOracle(const std::function<double(double)>& potential, double lo, double hi,
                       std::size_t points) {
    if (points < 10000) throw ContractError("grid oracle needs at least 10^4 points");
    if (!(hi > lo)) throw ContractError("grid oracle needs lo < hi");
    h_ = (hi - lo) / static_cast<double>(points - 1);
    x_.resize(points);
    v_.resize(points);
    vmin_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points; ++k) {
        x_[k] = k + 1 == points ? hi : lo + h_ * static_cast<double>(k);
        v_[k] = potential(x_[k]);
        if (!std::isfinite(v_[k]))
            throw NumericError("non-finite potential on the oracle grid", x_[k], x_[k]);
        if (v_[k] < vmin_) {
            vmin_ = v_[k];
            xmin_ = x_[k];
        }
    }
    std::vector<double> w(points);
    for (std::size_t k = 0; k < points; ++k) w[k] = std::exp(-(v_[k] - vmin_));
    cdf_.assign(points, 0.0);
    for (std::size_t k = 1; k < points; ++k) cdf_[k] = cdf_[k - 1] + 0.5 * h_ * (w[k - 1] + w[k]);
    double mass = cdf_.back();
    log_mass_ = -vmin_ + std::log(mass);
    pdf_.resize(points);
    for (std::size_t k = 0; k < points; ++k) {
        pdf_[k] = w[k] / mass;
        cdf_[k] /= mass;
    }
    cdf_.back() = 1.0;
}

double GridOracle::pdf(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    double t = (x - x_.front()) / h_;
    std::size_t k = std::min(static_cast<std::size_t>(t), x_.size() - 2);
    double f = t - static_cast<double>(k);
    return pdf_[k] * (1 - f) + pdf_[k + 1] * f;
}

double GridOracle::cdf(double x) const {
    if (x <= x_.front()) return 0.0;
    if (x >= x_.back()) return 1.0;
    double t = (x - x_.front()) / h_;
    std::size_t k = std::min(static_cast<std::size_t>(t), x_.size() - 2);
    double f = t - static_cast<double>(k);
    return cdf_[k] * (1 - f) + cdf_[k + 1] * f;
}

double GridOracle::quantile(double u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x_.front();
    if (it == cdf_.end()) return x_.back();
    std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    double c0 = cdf_[k - 1], c1 = cdf_[k];
    double f = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return x_[k - 1] + f * h_;
}

std::size_t GridOracle::local_maxima() const {
    std::size_t count = 0;
    for (std::size_t k = 1; k + 1 < pdf_.size(); ++k) {
        if (!(pdf_[k] > pdf_[k - 1])) continue;
        // Plateaus count once.
        std::size_t j = k;
        while (j + 1 < pdf_.size() && pdf_[j + 1] == pdf_[k]) ++j;
        if (j + 1 < pdf_.size() && pdf_[j + 1] < pdf_[k]) ++count;
        k = j;
    }
    return count;
}

GridOracle grid_oracle(const ObservationModel& m, double lo, double hi, std::size_t points) {
    GridOracle o([&m](double x) { return system_potential(m, x); }, lo, hi, points);
    double peak = *std::max_element(o.pdf_values().begin(), o.pdf_values().end());
    if (o.pdf_values().front() > 1e-7 * peak || o.pdf_values().back() > 1e-7 * peak)
        throw ContractError("oracle domain does not cover the target mass");
    return o;
}

double ks_statistic(std::span<const double> samples, const GridOracle& oracle) {
    if (samples.size() < 100) throw ContractError("ks_statistic needs at least 100 samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double f = oracle.cdf(s[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    double t = std::sqrt(static_cast<double>(n)) * d;
    if (t < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) sum += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * t * t);
    return std::clamp(sum, 0.0, 1.0);
}

namespace {

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
    if (x <= 0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 1000; ++n) {
            ap += 1;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    const double tiny = 1e-300;
    double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi_square_pvalue(double stat, double dof) { return gamma_q(0.5 * dof, 0.5 * stat); }

}  // namespace garsamp
