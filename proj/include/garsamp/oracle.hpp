#pragma once

#include <functional>
#include <span>
#include <vector>

#include "garsamp/model.hpp"

namespace garsamp {

// Trapezoid-rule discretization of exp(-V) on a uniform grid.
class GridOracle {
public:
    GridOracle(const std::function<double(double)>& potential, double lo, double hi,
               std::size_t points);

    const std::vector<double>& grid() const { return x_; }
    const std::vector<double>& potential() const { return v_; }
    const std::vector<double>& pdf_values() const { return pdf_; }
    const std::vector<double>& cdf_values() const { return cdf_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double min_potential() const { return vmin_; }
    double argmin() const { return xmin_; }
    // log of the integral of exp(-V) over the grid.
    double log_mass() const { return log_mass_; }
    // Interior strict local maxima of the pdf.
    std::size_t local_maxima() const;

private:
    std::vector<double> x_, v_, pdf_, cdf_;
    double vmin_ = 0.0, xmin_ = 0.0, log_mass_ = 0.0, h_ = 0.0;
};

// Oracle of the system potential. Checks that the density at both domain
// ends is below 1e-7 of its peak.
GridOracle grid_oracle(const ObservationModel& m, double lo, double hi, std::size_t points);

// sup |empirical CDF - oracle CDF|; needs at least 100 samples.
double ks_statistic(std::span<const double> samples, const GridOracle& oracle);

// Two-sided Kolmogorov distribution tail probability P(sqrt(n) D > t).
double ks_pvalue(double d, std::size_t n);

// Chi-square upper tail probability.
double chi_square_pvalue(double stat, double dof);

}  // namespace garsamp
