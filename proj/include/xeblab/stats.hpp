#pragma once

#include <functional>
#include <span>
#include <vector>

namespace xeblab {

double mean(std::span<const double> xs);
// Population variance (divide by count).
double population_variance(std::span<const double> xs);
// Sample variance (divide by count-1); requires >= 2 values.
double sample_variance(std::span<const double> xs);

// Pearson correlation of two equal-length vectors.
double pearson(std::span<const double> a, std::span<const double> b);

// Kolmogorov-Smirnov distance between the empirical law of `values` and the
// continuous CDF `cdf`. Sorts a copy.
double ks_distance(std::vector<double> values, const std::function<double(double)>& cdf);

// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);
// Survival function of the chi-squared distribution with `dof` degrees of
// freedom, P(X > x).
double chi_squared_survival(double x, int dof);

}  // namespace xeblab
