// Analytic ground truth for the single-product inventory benchmark:
// newsvendor fractile, base-stock levels, discounted value functions under
// exponential and Poisson demand, the posterior-predictive episodic variant,
// and the asymptotic-variance constant used by the normality diagnostics.
#pragma once

#include <string>

#include "eboc/bayes.hpp"
#include "eboc/rng.hpp"

namespace eboc {

enum class DemandKind { Exponential, Poisson, Predictive };

struct DemandModel {
    DemandKind kind = DemandKind::Exponential;
    double theta = 1.0;       // mean, for Exponential and Poisson
    PosteriorState posterior; // for Predictive
};

// Per-unit ordering cost c, holding cost h, backorder penalty b, discount
// gamma, and the demand distribution. Requires b > c > 0, h > 0,
// gamma in (0,1).
struct InventoryParams {
    double c = 1.0;
    double h = 2.0;
    double b = 3.0;
    double gamma = 0.6;
    DemandModel demand;
};

InventoryParams make_inventory_params(double c, double h, double b, double gamma,
                                      DemandModel demand);

// Newsvendor fractile (b - (1-gamma)c) / (b + h).
double kappa(const InventoryParams& params);

// Demand-CDF quantile at the fractile: closed form for exponential demand,
// smallest integer with CDF >= kappa for Poisson, exact predictive quantile
// (Lomax or negative binomial) for the Predictive kind.
double base_stock_level(const InventoryParams& params);

// Partial expectations E[(D - y)_+] for each demand family; the Poisson
// version accepts real y.
double shortage_expectation_exponential(double theta, double y);
double shortage_expectation_poisson(double theta, double y);

// Single-period cost b[d - y]_+ + h[y - d]_+.
double newsvendor_cost(const InventoryParams& params, double y, double d);

// Discounted value of the optimal policy at x <= base stock, exponential
// demand, by closed-form partial expectations. Throws std::domain_error
// above the base-stock level where the value is no longer affine.
double true_value_exponential(const InventoryParams& params, double x);

struct ValueEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

// Same quantity with the expectation replaced by a Monte Carlo average over
// mc_samples demand draws; reports the standard error of the estimate.
ValueEstimate true_value_exponential_mc(const InventoryParams& params, double x, int mc_samples,
                                        Rng& rng);

// Discounted value of the order-up-to policy at `level` under Poisson
// demand, for real states and levels. Below the level the stationary closed
// form applies; above it the no-order recursion is unrolled down the unit
// lattice with the demand sum truncated at 30.
double poisson_value(const InventoryParams& params, double x, double level);

// Inner expectation E[(gamma c D + psi(x*, D)) * score(D)] for exponential
// demand with mean theta, by composite Simpson quadrature split at the
// base-stock kink.
double score_expectation(const InventoryParams& params);

// Scale constant for sqrt(N)(V_N - V): (1-gamma)^{-1} sqrt(I^{-1} E[..]^2)
// with Fisher information I = theta^{-2} for the mean parametrization.
double asymptotic_sigma(const InventoryParams& params);

// Base-stock value function under the posterior predictive, estimated from
// `draws` Monte Carlo samples: level is the empirical kappa-quantile (lower
// interpolation) and V(x) = -c x + constant on x <= level, with the
// constant averaged over the same sample.
struct EpisodicValue {
    double level = 0.0;
    double constant = 0.0;
};

EpisodicValue episodic_value_mc(const InventoryParams& params, const PosteriorState& posterior,
                                int draws, Rng& rng);

// (x, V) table for plotting.
std::string value_table_csv(const InventoryParams& params, double lo, double hi, int points);

} // namespace eboc
