#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace jsde {

/// Pairwise summation whose left split is always the largest power of two
/// below the length. This makes block sums over any power-of-two blocking
/// bit-identical to the full sum of the blocks, which the noise module's
/// coarsening contract relies on.
double pairwise_sum(std::span<const double> values);

double normal_cdf(double x);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sided Kolmogorov-Smirnov test of a sample against N(0, 1), with the
/// asymptotic Kolmogorov distribution for the p-value.
KsResult ks_test_standard_normal(std::vector<double> sample);

/// Chi-square goodness-of-fit p-value of observed counts against
/// Poisson(mean). Tail bins with expected count below 5 are merged.
double poisson_gof_pvalue(const std::vector<std::uint64_t>& counts, double mean);

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace jsde
