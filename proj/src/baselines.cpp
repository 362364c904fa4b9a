#include "eboc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "eboc/stats.hpp"

namespace eboc {

const char* policy_source_name(PolicySource source) {
    switch (source) {
        case PolicySource::LazyPSRL: return "lazy_psrl";
        case PolicySource::EbocQuantile: return "eboc_quantile";
        case PolicySource::DRSC: return "drsc";
        case PolicySource::TrueOptimal: return "true_optimal";
    }
    return "unknown";
}

PolicyLevel lazy_psrl_policy(const PosteriorState& posterior, const InventoryParams& params,
                             Rng& rng) {
    if (posterior.family != ConjugateFamily::GammaPoisson) {
        throw std::invalid_argument("lazy_psrl_policy: needs a Gamma-Poisson posterior");
    }
    const double theta = sample_theta(posterior, rng, 1).front();
    const double level = static_cast<double>(poisson_quantile(kappa(params), theta));
    return {level, PolicySource::LazyPSRL};
}

bool lazy_psrl_should_recompute(const PosteriorState& current,
                                const PosteriorState& at_last_recompute) {
    if (current.family != at_last_recompute.family) {
        throw std::invalid_argument("lazy_psrl_should_recompute: posterior families differ");
    }
    return posterior_variance(current) <= 0.5 * posterior_variance(at_last_recompute);
}

PolicyLevel eboc_quantile_policy(const PosteriorState& posterior, const InventoryParams& params,
                                 int n_theta, int mc, Rng& rng) {
    if (n_theta < 1 || mc < 1) {
        throw std::invalid_argument("eboc_quantile_policy: n_theta and mc must be >= 1");
    }
    if (posterior.family != ConjugateFamily::GammaPoisson) {
        throw std::invalid_argument("eboc_quantile_policy: needs a Gamma-Poisson posterior");
    }
    const std::vector<double> thetas = sample_theta(posterior, rng, n_theta);
    std::vector<double> realizations(static_cast<std::size_t>(mc));
    for (auto& y : realizations) {
        long long total = 0;
        for (double theta : thetas) total += rng.poisson(theta);
        y = static_cast<double>(total) / static_cast<double>(n_theta);
    }
    std::sort(realizations.begin(), realizations.end());
    return {empirical_quantile(realizations, kappa(params)), PolicySource::EbocQuantile};
}

PolicyLevel drsc_policy(double theta_hat, int t, const InventoryParams& params) {
    if (t < 1) throw std::invalid_argument("drsc_policy: t must be >= 1");
    const double radius = 0.5 / std::sqrt(static_cast<double>(t));
    const double level = kappa(params) < 0.5 ? theta_hat - radius : theta_hat + radius;
    return {std::max(level, 0.0), PolicySource::DRSC};
}

double regret(const PolicyLevel& policy, double x_t, double theta_star,
              const InventoryParams& params) {
    InventoryParams truth = params;
    truth.demand = {DemandKind::Poisson, theta_star, {}};
    const double optimal_level = base_stock_level(truth);
    const double gap =
        poisson_value(truth, x_t, policy.level) - poisson_value(truth, x_t, optimal_level);
    if (gap < -1e-6) {
        throw std::runtime_error("regret: exercised level beat the optimal level beyond slack");
    }
    return gap;
}

} // namespace eboc
