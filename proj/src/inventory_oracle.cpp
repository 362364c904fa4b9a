#include "eboc/inventory_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <vector>

#include "eboc/stats.hpp"

namespace eboc {

namespace {

void require_kind(const InventoryParams& params, DemandKind kind, const char* op) {
    if (params.demand.kind != kind) {
        throw std::invalid_argument(std::string(op) + ": wrong demand kind for this oracle");
    }
}

// P(D >= j) for Poisson demand.
double poisson_upper_tail(int j, double mean) {
    if (j <= 0) return 1.0;
    return 1.0 - poisson_cdf(j - 1, mean);
}

// Stationary closed-form constant: V(x) = -c x + constant for x <= level.
double stationary_constant(const InventoryParams& params, double demand_mean, double level,
                           double expected_psi) {
    return (params.gamma * params.c * demand_mean + (1.0 - params.gamma) * params.c * level +
            expected_psi) /
           (1.0 - params.gamma);
}

double psi_expectation_poisson(const InventoryParams& params, double theta, double y) {
    const double shortage = shortage_expectation_poisson(theta, y);
    const double holding = y - theta + shortage;
    return params.b * shortage + params.h * holding;
}

// Smallest k >= 0 with NB(r = alpha, success beta/(beta+1)) CDF >= p; the
// negative binomial is the Gamma-Poisson predictive law.
double negative_binomial_quantile(double alpha, double beta, double p) {
    const double q = beta / (beta + 1.0); // success probability
    double pmf = std::exp(alpha * std::log(q));
    double cdf = pmf;
    int k = 0;
    while (cdf < p && k < 100000000) {
        pmf *= (static_cast<double>(k) + alpha) / (static_cast<double>(k) + 1.0) * (1.0 - q);
        cdf += pmf;
        ++k;
    }
    return static_cast<double>(k);
}

double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals) {
    if (hi <= lo) return 0.0;
    const double step = (hi - lo) / intervals;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) {
        sum += f(lo + i * step) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * step / 3.0;
}

} // namespace

InventoryParams make_inventory_params(double c, double h, double b, double gamma,
                                      DemandModel demand) {
    if (!(b > c && c > 0.0 && h > 0.0)) {
        throw std::invalid_argument("make_inventory_params: need b > c > 0 and h > 0");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("make_inventory_params: gamma must lie in (0,1)");
    }
    return {c, h, b, gamma, std::move(demand)};
}

double kappa(const InventoryParams& params) {
    return (params.b - (1.0 - params.gamma) * params.c) / (params.b + params.h);
}

double base_stock_level(const InventoryParams& params) {
    const double frac = kappa(params);
    switch (params.demand.kind) {
        case DemandKind::Exponential:
            return -params.demand.theta * std::log(1.0 - frac);
        case DemandKind::Poisson:
            return static_cast<double>(poisson_quantile(frac, params.demand.theta));
        case DemandKind::Predictive: {
            const PosteriorState& post = params.demand.posterior;
            if (post.family == ConjugateFamily::GammaExponential) {
                // Predictive is Lomax(alpha, beta).
                return post.beta * (std::pow(1.0 - frac, -1.0 / post.alpha) - 1.0);
            }
            return negative_binomial_quantile(post.alpha, post.beta, frac);
        }
    }
    throw std::logic_error("base_stock_level: unreachable");
}

double shortage_expectation_exponential(double theta, double y) {
    if (y <= 0.0) return theta - y;
    return theta * std::exp(-y / theta);
}

double shortage_expectation_poisson(double theta, double y) {
    if (y < 0.0) return theta - y;
    const int m = static_cast<int>(std::floor(y));
    return theta * poisson_upper_tail(m, theta) - y * poisson_upper_tail(m + 1, theta);
}

double newsvendor_cost(const InventoryParams& params, double y, double d) {
    return params.b * std::max(d - y, 0.0) + params.h * std::max(y - d, 0.0);
}

double true_value_exponential(const InventoryParams& params, double x) {
    require_kind(params, DemandKind::Exponential, "true_value_exponential");
    const double theta = params.demand.theta;
    const double level = base_stock_level(params);
    if (x > level) {
        throw std::domain_error("true_value_exponential: defined for x <= base stock only");
    }
    const double shortage = shortage_expectation_exponential(theta, level);
    const double holding = level - theta + shortage;
    const double expected_psi = params.b * shortage + params.h * holding;
    return -params.c * x + stationary_constant(params, theta, level, expected_psi);
}

ValueEstimate true_value_exponential_mc(const InventoryParams& params, double x, int mc_samples,
                                        Rng& rng) {
    require_kind(params, DemandKind::Exponential, "true_value_exponential_mc");
    if (mc_samples < 2) {
        throw std::invalid_argument("true_value_exponential_mc: need at least 2 samples");
    }
    const double theta = params.demand.theta;
    const double level = base_stock_level(params);
    if (x > level) {
        throw std::domain_error("true_value_exponential_mc: defined for x <= base stock only");
    }
    std::vector<double> g(static_cast<std::size_t>(mc_samples));
    for (auto& v : g) {
        const double d = rng.exponential(theta);
        v = params.gamma * params.c * d + (1.0 - params.gamma) * params.c * level +
            newsvendor_cost(params, level, d);
    }
    const MeanStderr ms = mean_stderr(g);
    const double scale = 1.0 / (1.0 - params.gamma);
    return {-params.c * x + scale * ms.mean, scale * ms.stderr_};
}

double poisson_value(const InventoryParams& params, double x, double level) {
    require_kind(params, DemandKind::Poisson, "poisson_value");
    const double theta = params.demand.theta;
    const double gamma = params.gamma;
    auto closed = [&](double state) {
        return -params.c * state +
               stationary_constant(params, theta, level,
                                   psi_expectation_poisson(params, theta, level));
    };
    if (x <= level) return closed(x);

    constexpr int kDemandCap = 30;
    double pmf[kDemandCap + 1];
    pmf[0] = std::exp(-theta);
    for (int k = 1; k <= kDemandCap; ++k) pmf[k] = pmf[k - 1] * theta / k;

    // Above the level nothing is ordered and the state walks down the unit
    // lattice; fill values bottom-up so each step only looks backwards.
    const int depth = static_cast<int>(std::ceil(x - level));
    std::vector<double> val(static_cast<std::size_t>(depth + kDemandCap + 1));
    for (int j = depth + kDemandCap; j >= 0; --j) {
        const double state = x - j;
        if (state <= level) {
            val[static_cast<std::size_t>(j)] = closed(state);
            continue;
        }
        double expect = 0.0;
        for (int k = 1; k <= kDemandCap; ++k) {
            expect += pmf[k] * val[static_cast<std::size_t>(j + k)];
        }
        val[static_cast<std::size_t>(j)] =
            (psi_expectation_poisson(params, theta, state) + gamma * expect) /
            (1.0 - gamma * pmf[0]);
    }
    return val[0];
}

double score_expectation(const InventoryParams& params) {
    require_kind(params, DemandKind::Exponential, "score_expectation");
    const double theta = params.demand.theta;
    const double level = base_stock_level(params);
    const std::function<double(double)> integrand = [&](double d) {
        const double g = params.gamma * params.c * d + newsvendor_cost(params, level, d);
        const double score = -1.0 / theta + d / (theta * theta);
        const double density = std::exp(-d / theta) / theta;
        return g * score * density;
    };
    // Split at the base-stock kink so Simpson sees smooth pieces.
    const double cutoff = level + 60.0 * theta;
    return simpson(integrand, 0.0, level, 4000) + simpson(integrand, level, cutoff, 8000);
}

double asymptotic_sigma(const InventoryParams& params) {
    const double theta = params.demand.theta;
    return theta * std::fabs(score_expectation(params)) / (1.0 - params.gamma);
}

EpisodicValue episodic_value_mc(const InventoryParams& params, const PosteriorState& posterior,
                                int draws, Rng& rng) {
    if (draws < 1) throw std::invalid_argument("episodic_value_mc: draws must be >= 1");
    std::vector<double> sample(static_cast<std::size_t>(draws));
    for (auto& d : sample) d = sample_predictive(posterior, rng);
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    EpisodicValue out;
    out.level = empirical_quantile(sorted, kappa(params));
    double mean = 0.0;
    for (double d : sample) {
        mean += params.gamma * params.c * d + (1.0 - params.gamma) * params.c * out.level +
                newsvendor_cost(params, out.level, d);
    }
    mean /= static_cast<double>(draws);
    out.constant = mean / (1.0 - params.gamma);
    return out;
}

std::string value_table_csv(const InventoryParams& params, double lo, double hi, int points) {
    if (points < 2 || hi <= lo) {
        throw std::invalid_argument("value_table_csv: need points >= 2 and hi > lo");
    }
    std::string out = "x,value\n";
    const double level = base_stock_level(params);
    char row[64];
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        double v;
        if (params.demand.kind == DemandKind::Poisson) {
            v = poisson_value(params, x, level);
        } else if (x <= level) {
            v = true_value_exponential(params, x);
        } else {
            continue; // no closed form above the base stock
        }
        std::snprintf(row, sizeof(row), "%.12g,%.12g\n", x, v);
        out += row;
    }
    return out;
}

} // namespace eboc
