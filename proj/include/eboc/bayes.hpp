// Conjugate Bayesian learning for the disturbance distribution.
//
// Two families are supported. GammaExponential keeps a Gamma(alpha, beta)
// posterior on the rate of an exponential disturbance; GammaPoisson keeps a
// Gamma(alpha, beta) posterior on the mean of a Poisson disturbance. A
// posterior is an immutable value; updates return new states.
#pragma once

#include "eboc/rng.hpp"

#include <string>
#include <vector>

namespace eboc {

enum class ConjugateFamily { GammaExponential, GammaPoisson };

std::string family_name(ConjugateFamily family);

struct PosteriorState {
    ConjugateFamily family = ConjugateFamily::GammaExponential;
    double alpha = 1.0; // Gamma shape
    double beta = 1.0;  // Gamma rate
    long long n_obs = 0;
    double data_sum = 0.0;
};

struct PosteriorSummary {
    double alpha = 0.0;
    double beta = 0.0;
    long long n_obs = 0;
};

// A discretization of the posterior-predictive distribution: M = k1*k2
// scenarios, recorded together with the theta draws behind them and one
// weight per scenario (all 1 at generation time; later reweighted by
// likelihood ratios).
struct ScenarioBatch {
    std::vector<double> scenarios;
    std::vector<double> thetas; // mean parameter of the generating distribution
    std::vector<double> weights;
    PosteriorSummary source;

    std::size_t size() const { return scenarios.size(); }
};

// Conjugate update; data must be nonnegative, and integral for GammaPoisson.
// The input state is untouched.
PosteriorState update_posterior(const PosteriorState& state, const std::vector<double>& data);

// k draws of theta, the mean parameter: 1/lambda with lambda ~ Gamma(alpha,
// beta) for GammaExponential, theta ~ Gamma(alpha, beta) for GammaPoisson.
std::vector<double> sample_theta(const PosteriorState& state, Rng& rng, int k);

// Nested predictive sample: k1 theta draws, k2 conditional disturbance draws
// per theta, M = k1*k2 scenarios in theta-major order.
ScenarioBatch sample_scenarios(const PosteriorState& state, Rng& rng, int k1, int k2);

// One disturbance draw from the posterior predictive (k1 = k2 = 1 shortcut).
double sample_predictive(const PosteriorState& state, Rng& rng);

// Gamma posterior density at the natural parameter (rate for
// GammaExponential, mean for GammaPoisson). Argument must be positive.
double posterior_pdf(const PosteriorState& state, double natural_param);
double log_posterior_pdf(const PosteriorState& state, double natural_param);

// p(. | new_state) / p(. | old_state) at the natural parameter, computed as
// exp of a log-density difference. Families must match.
double likelihood_ratio(const PosteriorState& old_state, const PosteriorState& new_state,
                        double natural_param);

// Same ratio evaluated at a theta draw (mean parameter). For
// GammaExponential this converts theta to the rate 1/theta; the change of
// variables cancels between numerator and denominator, so the value equals
// the ratio of theta-densities.
double likelihood_ratio_at_theta(const PosteriorState& old_state, const PosteriorState& new_state,
                                 double theta);

// Mean of the posterior predictive: beta/(alpha-1) for GammaExponential
// (requires alpha > 1), alpha/beta for GammaPoisson.
double predictive_mean(const PosteriorState& state);

// Gamma posterior variance alpha/beta^2 of the natural parameter.
double posterior_variance(const PosteriorState& state);

std::string to_json(const PosteriorState& state);
PosteriorState posterior_from_json(const std::string& text);

// Product of independent per-coordinate batches. Scenario j of the joint
// batch is the tuple of the j-th entries of the component batches; its weight
// is the product of the component weights. Built from per-coordinate
// posteriors with a shared (k1, k2), which makes the zipped tuples a valid
// nested sample of the joint predictive.
struct JointBatch {
    std::vector<ScenarioBatch> comps;

    std::size_t dims() const { return comps.size(); }
    std::size_t size() const { return comps.empty() ? 0 : comps.front().size(); }
    double weight(std::size_t j) const;
    std::vector<double> scenario(std::size_t j) const;
    std::vector<double> theta(std::size_t j) const;
};

JointBatch make_joint(ScenarioBatch batch);
JointBatch sample_joint_scenarios(const std::vector<PosteriorState>& states, Rng& rng, int k1,
                                  int k2);

// Joint likelihood ratios w_j = prod_i p_i(theta_ij | new) / p_i(theta_ij |
// old), accumulated in log space.
std::vector<double> joint_likelihood_ratios(const JointBatch& batch,
                                            const std::vector<PosteriorState>& old_states,
                                            const std::vector<PosteriorState>& new_states);

} // namespace eboc
