#include "jsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace jsde {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n == 1) return values[0];
    if (n == 2) return values[0] + values[1];
    std::size_t split = 1;
    while (split * 2 < n) split *= 2;  // largest power of two strictly below n
    return pairwise_sum(values.first(split)) + pairwise_sum(values.subspan(split));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

namespace {

// Kolmogorov distribution tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
double kolmogorov_tail(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test_standard_normal(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("ks test: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = normal_cdf(sample[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(cdf - lo, hi - cdf));
    }
    KsResult result;
    result.statistic = d;
    const double sqrt_n = std::sqrt(n);
    result.p_value = kolmogorov_tail(d * (sqrt_n + 0.12 + 0.11 / sqrt_n));
    return result;
}

double poisson_gof_pvalue(const std::vector<std::uint64_t>& counts, double mean) {
    if (counts.empty()) throw std::invalid_argument("gof: empty counts");
    const double n = static_cast<double>(counts.size());

    // observed histogram
    std::uint64_t max_count = 0;
    for (auto c : counts) max_count = std::max(max_count, c);
    std::vector<double> observed(max_count + 1, 0.0);
    for (auto c : counts) observed[c] += 1.0;

    // expected Poisson bin masses, recursively: p_0 = e^-m, p_{k+1} = p_k m/(k+1)
    std::vector<double> expected;
    double pk = std::exp(-mean);
    double cumulative = pk;
    expected.push_back(n * pk);
    for (std::uint64_t k = 0; k < max_count; ++k) {
        pk *= mean / static_cast<double>(k + 1);
        cumulative += pk;
        expected.push_back(n * pk);
    }
    // final open bin holds the rest of the mass
    observed.push_back(0.0);
    expected.push_back(n * std::max(0.0, 1.0 - cumulative));

    // merge right-to-left until every bin expects at least 5
    std::vector<double> obs_m, exp_m;
    double obs_acc = 0.0, exp_acc = 0.0;
    for (std::size_t i = observed.size(); i-- > 0;) {
        obs_acc += observed[i];
        exp_acc += expected[i];
        if (exp_acc >= 5.0) {
            obs_m.push_back(obs_acc);
            exp_m.push_back(exp_acc);
            obs_acc = exp_acc = 0.0;
        }
    }
    if (exp_acc > 0.0) {
        if (obs_m.empty()) {
            obs_m.push_back(obs_acc);
            exp_m.push_back(exp_acc);
        } else {
            obs_m.back() += obs_acc;
            exp_m.back() += exp_acc;
        }
    }
    if (obs_m.size() < 2) return 1.0;  // everything in one bin; nothing to test

    double stat = 0.0;
    for (std::size_t i = 0; i < obs_m.size(); ++i) {
        const double diff = obs_m[i] - exp_m[i];
        stat += diff * diff / exp_m[i];
    }
    const double dof = static_cast<double>(obs_m.size() - 1);
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("ls_slope: need at least two matched points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissae");
    return sxy / sxx;
}

}  // namespace jsde
