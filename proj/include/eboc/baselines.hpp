// Comparison policies for the Poisson inventory benchmark: posterior-
// sampling control with lazy recomputation, the multi-sample posterior
// quantile policy, a distributionally robust level with a shrinking
// ambiguity radius, and the regret functional that scores them.
#pragma once

#include "eboc/bayes.hpp"
#include "eboc/inventory_oracle.hpp"
#include "eboc/rng.hpp"

namespace eboc {

enum class PolicySource { LazyPSRL, EbocQuantile, DRSC, TrueOptimal };

const char* policy_source_name(PolicySource source);

// Order-up-to level and where it came from.
struct PolicyLevel {
    double level = 0.0;
    PolicySource source = PolicySource::TrueOptimal;
};

// Draw a single theta from a Gamma-Poisson posterior and return the
// Poisson(theta) base-stock level at the params fractile.
PolicyLevel lazy_psrl_policy(const PosteriorState& posterior, const InventoryParams& params,
                             Rng& rng);

// True iff the posterior variance has at least halved (inclusive) since the
// last recomputation.
bool lazy_psrl_should_recompute(const PosteriorState& current,
                                const PosteriorState& at_last_recompute);

// Sample n_theta values of theta, simulate mc realizations of the mean of
// one Poisson draw per theta, and return the empirical kappa-quantile
// (lower interpolation) of those realizations.
PolicyLevel eboc_quantile_policy(const PosteriorState& posterior, const InventoryParams& params,
                                 int n_theta, int mc, Rng& rng);

// Robust level theta_hat -/+ 1/(2 sqrt(t)) depending on the side of the
// fractile, clamped at zero.
PolicyLevel drsc_policy(double theta_hat, int t, const InventoryParams& params);

// Discounted-cost gap at state x_t between the exercised order-up-to level
// and the optimal one, both under Poisson(theta_star). Nonnegative up to
// numerical slack; a value below -1e-6 throws.
double regret(const PolicyLevel& policy, double x_t, double theta_star,
              const InventoryParams& params);

} // namespace eboc
