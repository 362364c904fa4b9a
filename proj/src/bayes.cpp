#include "eboc/bayes.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace eboc {

std::string family_name(ConjugateFamily family) {
    switch (family) {
        case ConjugateFamily::GammaExponential: return "GammaExponential";
        case ConjugateFamily::GammaPoisson: return "GammaPoisson";
    }
    return "unknown";
}

PosteriorState update_posterior(const PosteriorState& state, const std::vector<double>& data) {
    PosteriorState next = state;
    // Fold observations in one at a time so that updating with a split batch
    // performs the same float operations as updating with the whole batch.
    for (double v : data) {
        if (v < 0.0) {
            throw std::domain_error("update_posterior: negative observation for " +
                                    family_name(state.family) + " family");
        }
        if (state.family == ConjugateFamily::GammaPoisson && v != std::floor(v)) {
            throw std::domain_error(
                "update_posterior: non-integer observation for GammaPoisson family");
        }
        next.n_obs += 1;
        next.data_sum += v;
        if (state.family == ConjugateFamily::GammaExponential) {
            next.alpha += 1.0;
            next.beta += v;
        } else {
            next.alpha += v;
            next.beta += 1.0;
        }
    }
    return next;
}

std::vector<double> sample_theta(const PosteriorState& state, Rng& rng, int k) {
    if (k < 1) throw std::invalid_argument("sample_theta: k must be >= 1");
    std::vector<double> thetas(static_cast<std::size_t>(k));
    for (auto& theta : thetas) {
        const double g = rng.gamma(state.alpha, state.beta);
        theta = state.family == ConjugateFamily::GammaExponential ? 1.0 / g : g;
    }
    return thetas;
}

namespace {

double draw_conditional(ConjugateFamily family, double theta, Rng& rng) {
    if (family == ConjugateFamily::GammaExponential) return rng.exponential(theta);
    return static_cast<double>(rng.poisson(theta));
}

} // namespace

ScenarioBatch sample_scenarios(const PosteriorState& state, Rng& rng, int k1, int k2) {
    if (k1 < 1 || k2 < 1) throw std::invalid_argument("sample_scenarios: k1, k2 must be >= 1");
    ScenarioBatch batch;
    const std::size_t m = static_cast<std::size_t>(k1) * static_cast<std::size_t>(k2);
    batch.scenarios.reserve(m);
    batch.thetas.reserve(m);
    batch.weights.assign(m, 1.0);
    batch.source = {state.alpha, state.beta, state.n_obs};
    for (int i = 0; i < k1; ++i) {
        const double theta = sample_theta(state, rng, 1).front();
        for (int j = 0; j < k2; ++j) {
            batch.thetas.push_back(theta);
            batch.scenarios.push_back(draw_conditional(state.family, theta, rng));
        }
    }
    return batch;
}

double sample_predictive(const PosteriorState& state, Rng& rng) {
    const double theta = sample_theta(state, rng, 1).front();
    return draw_conditional(state.family, theta, rng);
}

double log_posterior_pdf(const PosteriorState& state, double natural_param) {
    if (natural_param <= 0.0) {
        throw std::domain_error("posterior_pdf: argument must be positive for " +
                                family_name(state.family) + " family");
    }
    return state.alpha * std::log(state.beta) + (state.alpha - 1.0) * std::log(natural_param) -
           state.beta * natural_param - std::lgamma(state.alpha);
}

double posterior_pdf(const PosteriorState& state, double natural_param) {
    return std::exp(log_posterior_pdf(state, natural_param));
}

double likelihood_ratio(const PosteriorState& old_state, const PosteriorState& new_state,
                        double natural_param) {
    if (old_state.family != new_state.family) {
        throw std::invalid_argument("likelihood_ratio: posterior families differ");
    }
    return std::exp(log_posterior_pdf(new_state, natural_param) -
                    log_posterior_pdf(old_state, natural_param));
}

double likelihood_ratio_at_theta(const PosteriorState& old_state, const PosteriorState& new_state,
                                 double theta) {
    const double natural =
        old_state.family == ConjugateFamily::GammaExponential ? 1.0 / theta : theta;
    return likelihood_ratio(old_state, new_state, natural);
}

double predictive_mean(const PosteriorState& state) {
    if (state.family == ConjugateFamily::GammaExponential) {
        if (state.alpha <= 1.0) {
            throw std::domain_error(
                "predictive_mean: undefined for GammaExponential with alpha <= 1");
        }
        return state.beta / (state.alpha - 1.0);
    }
    return state.alpha / state.beta;
}

double posterior_variance(const PosteriorState& state) {
    return state.alpha / (state.beta * state.beta);
}

std::string to_json(const PosteriorState& state) {
    nlohmann::json j{{"family", family_name(state.family)},
                     {"alpha", state.alpha},
                     {"beta", state.beta},
                     {"n_obs", state.n_obs},
                     {"data_sum", state.data_sum}};
    return j.dump();
}

PosteriorState posterior_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PosteriorState state;
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "GammaExponential") {
        state.family = ConjugateFamily::GammaExponential;
    } else if (fam == "GammaPoisson") {
        state.family = ConjugateFamily::GammaPoisson;
    } else {
        throw std::invalid_argument("posterior_from_json: unknown family " + fam);
    }
    state.alpha = j.at("alpha").get<double>();
    state.beta = j.at("beta").get<double>();
    state.n_obs = j.at("n_obs").get<long long>();
    state.data_sum = j.at("data_sum").get<double>();
    return state;
}

double JointBatch::weight(std::size_t j) const {
    double w = 1.0;
    for (const auto& comp : comps) w *= comp.weights[j];
    return w;
}

std::vector<double> JointBatch::scenario(std::size_t j) const {
    std::vector<double> xi(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) xi[i] = comps[i].scenarios[j];
    return xi;
}

std::vector<double> JointBatch::theta(std::size_t j) const {
    std::vector<double> th(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) th[i] = comps[i].thetas[j];
    return th;
}

JointBatch make_joint(ScenarioBatch batch) {
    JointBatch joint;
    joint.comps.push_back(std::move(batch));
    return joint;
}

JointBatch sample_joint_scenarios(const std::vector<PosteriorState>& states, Rng& rng, int k1,
                                  int k2) {
    JointBatch joint;
    joint.comps.reserve(states.size());
    for (const auto& state : states) joint.comps.push_back(sample_scenarios(state, rng, k1, k2));
    return joint;
}

std::vector<double> joint_likelihood_ratios(const JointBatch& batch,
                                            const std::vector<PosteriorState>& old_states,
                                            const std::vector<PosteriorState>& new_states) {
    if (batch.dims() != old_states.size() || batch.dims() != new_states.size()) {
        throw std::invalid_argument("joint_likelihood_ratios: dimension mismatch");
    }
    std::vector<double> weights(batch.size(), 0.0);
    for (std::size_t i = 0; i < batch.dims(); ++i) {
        const auto& comp = batch.comps[i];
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const double theta = comp.thetas[j];
            const double natural = old_states[i].family == ConjugateFamily::GammaExponential
                                       ? 1.0 / theta
                                       : theta;
            weights[j] += log_posterior_pdf(new_states[i], natural) -
                          log_posterior_pdf(old_states[i], natural);
        }
    }
    for (auto& w : weights) w = std::exp(w);
    return weights;
}

} // namespace eboc
