// Small numerical statistics toolkit: normal and gamma distribution
// functions, Poisson tails, empirical quantiles, and the Kolmogorov-Smirnov
// statistic. Everything is deterministic scalar math.
#pragma once

#include <vector>

namespace eboc {

double normal_cdf(double x);
// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9
// absolute error), for QQ reference quantiles.
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// P(X <= k) for X ~ Poisson(mean).
double poisson_cdf(long long k, double mean);
// Smallest integer k with P(X <= k) >= p.
long long poisson_quantile(double p, double mean);
double poisson_pmf(long long k, double mean);

// Empirical quantile with the lower (floor) convention: the ceil(p*m)-th
// smallest sample value, clamped to the first one for p = 0.
double empirical_quantile(std::vector<double> sample, double p);

// sup_x |ecdf(x) - normal_cdf(x)| against the standard normal.
double ks_statistic_normal(std::vector<double> sample);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& sample);

} // namespace eboc
