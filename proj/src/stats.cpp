#include "eboc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eboc {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) {
        throw std::domain_error("normal_quantile: p must be in (0,1)");
    }
    // Acklam's piecewise rational approximation with one Halley refinement.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a must be positive");
    if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // series expansion
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for the upper tail (Lentz)
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

double poisson_cdf(long long k, double mean) {
    if (k < 0) return 0.0;
    if (mean == 0.0) return 1.0;
    return 1.0 - gamma_p(static_cast<double>(k) + 1.0, mean);
}

long long poisson_quantile(double p, double mean) {
    if (p <= 0.0) return 0;
    long long k = 0;
    while (poisson_cdf(k, mean) < p) {
        ++k;
        if (k > 100000000LL) throw std::runtime_error("poisson_quantile: did not converge");
    }
    return k;
}

double poisson_pmf(long long k, double mean) {
    if (k < 0) return 0.0;
    return std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

double empirical_quantile(std::vector<double> sample, double p) {
    if (sample.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    long long idx = static_cast<long long>(std::ceil(p * m)) - 1;
    if (idx < 0) idx = 0;
    if (idx >= static_cast<long long>(sample.size())) idx = static_cast<long long>(sample.size()) - 1;
    return sample[static_cast<std::size_t>(idx)];
}

double ks_statistic_normal(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic_normal: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = normal_cdf(sample[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        sup = std::max(sup, std::max(std::fabs(f - lo), std::fabs(f - hi)));
    }
    return sup;
}

MeanStderr mean_stderr(const std::vector<double>& sample) {
    if (sample.empty()) throw std::invalid_argument("mean_stderr: empty sample");
    double sum = 0.0;
    for (double v : sample) sum += v;
    const double mean = sum / static_cast<double>(sample.size());
    if (sample.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(sample.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(sample.size()))};
}

} // namespace eboc
