#include "doctest.h"

#include "eboc/bayes.hpp"
#include "eboc/rng.hpp"
#include "eboc/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace eboc;

namespace {

PosteriorState make_state(ConjugateFamily family, double alpha, double beta) {
    PosteriorState s;
    s.family = family;
    s.alpha = alpha;
    s.beta = beta;
    return s;
}

} // namespace

TEST_CASE("exponential-family update adds counts to alpha and data to beta") {
    PosteriorState prior = make_state(ConjugateFamily::GammaExponential, 1.0, 1.0);
    PosteriorState post = update_posterior(prior, {2.0, 3.0});
    CHECK(post.alpha == 3.0);
    CHECK(post.beta == 6.0);
    CHECK(post.n_obs == 2);
    CHECK(post.data_sum == 5.0);
    // input untouched
    CHECK(prior.alpha == 1.0);
    CHECK(prior.n_obs == 0);
}

TEST_CASE("empty update is the identity") {
    for (const auto family : {ConjugateFamily::GammaExponential, ConjugateFamily::GammaPoisson}) {
        PosteriorState prior = make_state(family, 2.5, 4.5);
        prior.n_obs = 3;
        prior.data_sum = 7.0;
        PosteriorState post = update_posterior(prior, {});
        CHECK(post.alpha == prior.alpha);
        CHECK(post.beta == prior.beta);
        CHECK(post.n_obs == prior.n_obs);
        CHECK(post.data_sum == prior.data_sum);
    }
}

TEST_CASE("poisson-family update adds data to alpha and counts to beta") {
    PosteriorState prior = make_state(ConjugateFamily::GammaPoisson, 1.0, 1.0);
    PosteriorState post = update_posterior(prior, {4.0, 6.0});
    CHECK(post.alpha == 11.0);
    CHECK(post.beta == 3.0);

    // Independent check: normalize f(data|theta) p(theta) on a theta grid and
    // compare moments with the claimed Gamma(11, 3).
    const double dt = 0.002;
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (double t = dt / 2; t < 40.0; t += dt) {
        const double logw = -t + 4.0 * std::log(t) - t + 6.0 * std::log(t) - t;
        const double w = std::exp(logw);
        z += w;
        m1 += w * t;
        m2 += w * t * t;
    }
    m1 /= z;
    m2 /= z;
    CHECK(m1 == doctest::Approx(11.0 / 3.0).epsilon(1e-6));
    CHECK(m2 - m1 * m1 == doctest::Approx(11.0 / 9.0).epsilon(1e-5));
}

TEST_CASE("updates reject values outside the support") {
    PosteriorState expo = make_state(ConjugateFamily::GammaExponential, 1.0, 1.0);
    CHECK_THROWS_AS(update_posterior(expo, {1.0, -0.5}), std::domain_error);
    PosteriorState pois = make_state(ConjugateFamily::GammaPoisson, 1.0, 1.0);
    CHECK_THROWS_AS(update_posterior(pois, {-1.0}), std::domain_error);
    CHECK_THROWS_AS(update_posterior(pois, {2.5}), std::domain_error);
}

TEST_CASE("split updates equal one combined update, parameter for parameter") {
    Rng rng(42);
    for (const auto family : {ConjugateFamily::GammaExponential, ConjugateFamily::GammaPoisson}) {
        PosteriorState base = make_state(family, 1.5, 2.5);
        std::vector<double> d1, d2, all;
        for (int i = 0; i < 37; ++i) {
            const double v = family == ConjugateFamily::GammaExponential
                                 ? rng.exponential(3.0)
                                 : static_cast<double>(rng.poisson(6.0));
            (i < 17 ? d1 : d2).push_back(v);
            all.push_back(v);
        }
        const PosteriorState split = update_posterior(update_posterior(base, d1), d2);
        const PosteriorState combined = update_posterior(base, all);
        CHECK(split.alpha == combined.alpha);
        CHECK(split.beta == combined.beta);
        CHECK(split.n_obs == combined.n_obs);
        CHECK(split.data_sum == combined.data_sum);
    }
}

TEST_CASE("theta draws are deterministic under a fixed seed") {
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 3.0, 6.0);
    Rng a(99);
    Rng b(99);
    const auto ta = sample_theta(s, a, 5);
    const auto tb = sample_theta(s, b, 5);
    REQUIRE(ta.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ta[i] == tb[i]);
}

TEST_CASE("exponential-family theta draws invert Gamma rate draws") {
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 3.0, 6.0);
    Rng rng(7);
    const auto thetas = sample_theta(s, rng, 100000);
    double rate_sum = 0.0;
    for (const double t : thetas) {
        REQUIRE(t > 0.0);
        rate_sum += 1.0 / t;
    }
    // lambda ~ Gamma(3, 6): mean 0.5, sd 0.289; 3 stderr ~ 0.0027
    CHECK(rate_sum / 100000.0 == doctest::Approx(0.5).epsilon(0.006));
}

TEST_CASE("gamma(1,1) posterior draws an exponential rate") {
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 1.0, 1.0);
    Rng rng(8);
    const auto thetas = sample_theta(s, rng, 100000);
    std::vector<double> transformed(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double lambda = 1.0 / thetas[i];
        const double u = std::min(1.0 - 1e-15, std::max(1e-15, 1.0 - std::exp(-lambda)));
        transformed[i] = normal_quantile(u);
    }
    CHECK(ks_statistic_normal(transformed) < 0.01);
}

TEST_CASE("nested scenario batches repeat each theta for its conditional draws") {
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 5.0, 40.0);
    Rng rng(10);
    const ScenarioBatch batch = sample_scenarios(s, rng, 5, 3);
    REQUIRE(batch.size() == 15);
    REQUIRE(batch.thetas.size() == 15);
    REQUIRE(batch.weights.size() == 15);
    for (std::size_t i = 0; i < 15; ++i) {
        CHECK(batch.weights[i] == 1.0);
        CHECK(batch.scenarios[i] >= 0.0);
        CHECK(batch.thetas[i] == batch.thetas[3 * (i / 3)]);
    }
    int distinct = 1;
    for (std::size_t g = 1; g < 5; ++g) {
        if (batch.thetas[3 * g] != batch.thetas[3 * (g - 1)]) ++distinct;
    }
    CHECK(distinct == 5);
    CHECK(batch.source.alpha == 5.0);
    CHECK(batch.source.beta == 40.0);
}

TEST_CASE("batch-mean variance depends on the product k1*k2 only") {
    // Holds when the conditional mean of the test function barely moves
    // across theta draws; a concentrated posterior keeps the within-group
    // correlation of the nested scheme negligible. With a diffuse posterior
    // the shared theta genuinely inflates the k2 > 1 variance.
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 400.0, 4000.0);
    auto variance_of_batch_mean = [&](int k1, int k2, std::uint64_t seed) {
        Rng root(seed);
        const int reps = 200;
        std::vector<double> means(reps);
        for (int r = 0; r < reps; ++r) {
            Rng rng = root.substream(static_cast<std::uint64_t>(r));
            const ScenarioBatch batch = sample_scenarios(s, rng, k1, k2);
            double sum = 0.0;
            // bounded test function of the scenario
            for (const double v : batch.scenarios) sum += std::min(v, 25.0);
            means[r] = sum / static_cast<double>(batch.size());
        }
        double m = 0.0;
        for (const double v : means) m += v;
        m /= reps;
        double var = 0.0;
        for (const double v : means) var += (v - m) * (v - m);
        return var / (reps - 1);
    };
    const double v_wide = variance_of_batch_mean(100, 1, 501);
    const double v_nested = variance_of_batch_mean(10, 10, 502);
    // Sample variances over 200 replications have relative sd ~ sqrt(2/199) ~
    // 10%; require agreement within 3 of those.
    CHECK(std::fabs(v_wide - v_nested) < 0.3 * std::max(v_wide, v_nested));
}

TEST_CASE("a sharply concentrated posterior pins its theta draws") {
    PosteriorState s = make_state(ConjugateFamily::GammaPoisson, 4e6, 8e5);
    Rng rng(11);
    for (const double t : sample_theta(s, rng, 1000)) {
        CHECK(t == doctest::Approx(5.0).epsilon(0.01));
    }
}

TEST_CASE("posterior density matches gamma-pdf arithmetic") {
    PosteriorState e11 = make_state(ConjugateFamily::GammaExponential, 1.0, 1.0);
    CHECK(posterior_pdf(e11, 0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    PosteriorState g36 = make_state(ConjugateFamily::GammaExponential, 3.0, 6.0);
    CHECK(posterior_pdf(g36, 1.0) == doctest::Approx(108.0 * std::exp(-6.0)).epsilon(1e-12));
    CHECK_THROWS_AS(posterior_pdf(g36, 0.0), std::domain_error);
    CHECK_THROWS_AS(posterior_pdf(g36, -1.0), std::domain_error);

    double z = 0.0;
    const double dt = 0.0005;
    for (double t = dt / 2; t < 15.0; t += dt) z += posterior_pdf(g36, t) * dt;
    CHECK(z == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("likelihood ratio of a posterior with itself is exactly one") {
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 317.0, 2900.5);
    for (const double x : {0.01, 0.1, 1.0, 10.0}) {
        CHECK(likelihood_ratio(s, s, x) == 1.0);
        CHECK(likelihood_ratio_at_theta(s, s, x) == 1.0);
    }
}

TEST_CASE("likelihood ratio matches direct density-ratio arithmetic") {
    PosteriorState oldp = make_state(ConjugateFamily::GammaExponential, 2.0, 4.0);
    PosteriorState newp = make_state(ConjugateFamily::GammaExponential, 3.0, 6.0);
    // (6^3/2!) * 1 * e^-6 / ((4^2/1!) * e^-4) = 6.75 e^-2 at rate 1
    CHECK(likelihood_ratio(oldp, newp, 1.0) ==
          doctest::Approx(6.75 * std::exp(-2.0)).epsilon(1e-12));
    // at theta = 2 the rate is 0.5
    CHECK(likelihood_ratio_at_theta(oldp, newp, 2.0) ==
          doctest::Approx(likelihood_ratio(oldp, newp, 0.5)).epsilon(1e-12));
    PosteriorState pois = make_state(ConjugateFamily::GammaPoisson, 2.0, 4.0);
    CHECK_THROWS_AS(likelihood_ratio(oldp, pois, 1.0), std::invalid_argument);
}

TEST_CASE("likelihood ratio integrates to one against the old posterior") {
    PosteriorState oldp = make_state(ConjugateFamily::GammaExponential, 2.0, 4.0);
    PosteriorState newp = make_state(ConjugateFamily::GammaExponential, 3.0, 6.0);
    double z = 0.0;
    const double dt = 0.0005;
    for (double t = dt / 2; t < 20.0; t += dt) {
        z += likelihood_ratio(oldp, newp, t) * posterior_pdf(oldp, t) * dt;
    }
    CHECK(z == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("log-space ratios survive posteriors with thousands of observations") {
    PosteriorState oldp = make_state(ConjugateFamily::GammaExponential, 5001.0, 50010.0);
    PosteriorState newp = make_state(ConjugateFamily::GammaExponential, 5002.0, 50021.3);
    const double r = likelihood_ratio(oldp, newp, 0.1);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
    CHECK(r == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("posterior mass concentrates at the data-generating rate") {
    PosteriorState s = make_state(ConjugateFamily::GammaExponential, 1.0, 1.0);
    Rng rng(13);
    std::vector<double> data(2000);
    for (auto& v : data) v = rng.exponential(10.0);
    s = update_posterior(s, data);
    // mass of the rate posterior within 0.1 +- 0.02, by quadrature
    double mass = 0.0;
    const double dt = 1e-5;
    for (double t = 0.08 + dt / 2; t < 0.12; t += dt) mass += posterior_pdf(s, t) * dt;
    CHECK(mass > 0.95);
}

TEST_CASE("predictive mean and posterior variance follow the conjugate formulas") {
    PosteriorState ge = make_state(ConjugateFamily::GammaExponential, 3.0, 6.0);
    CHECK(predictive_mean(ge) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(posterior_variance(ge) == doctest::Approx(3.0 / 36.0).epsilon(1e-12));
    PosteriorState shallow = make_state(ConjugateFamily::GammaExponential, 1.0, 1.0);
    CHECK_THROWS_AS(predictive_mean(shallow), std::domain_error);
    PosteriorState gp = make_state(ConjugateFamily::GammaPoisson, 11.0, 3.0);
    CHECK(predictive_mean(gp) == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
    CHECK(posterior_variance(gp) == doctest::Approx(11.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("predictive draws average to the predictive mean") {
    PosteriorState gp = make_state(ConjugateFamily::GammaPoisson, 20.0, 4.0);
    Rng rng(14);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += sample_predictive(gp, rng);
    // predictive variance = alpha/beta + alpha/beta^2 = 6.25; 3 stderr ~ 0.024
    CHECK(sum / n == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("posterior snapshots round-trip through JSON") {
    PosteriorState s = make_state(ConjugateFamily::GammaPoisson, 11.0, 3.0);
    s.n_obs = 2;
    s.data_sum = 10.0;
    const PosteriorState back = posterior_from_json(to_json(s));
    CHECK(back.family == s.family);
    CHECK(back.alpha == s.alpha);
    CHECK(back.beta == s.beta);
    CHECK(back.n_obs == s.n_obs);
    CHECK(back.data_sum == s.data_sum);
    CHECK_THROWS(posterior_from_json("{\"family\":\"unknown\"}"));
}

TEST_CASE("joint batches zip per-coordinate scenarios and multiply weights") {
    std::vector<PosteriorState> chains = {
        make_state(ConjugateFamily::GammaExponential, 4.0, 30.0),
        make_state(ConjugateFamily::GammaExponential, 6.0, 70.0),
    };
    Rng rng(15);
    JointBatch joint = sample_joint_scenarios(chains, rng, 4, 2);
    REQUIRE(joint.dims() == 2);
    REQUIRE(joint.size() == 8);
    for (std::size_t j = 0; j < joint.size(); ++j) {
        const auto xi = joint.scenario(j);
        REQUIRE(xi.size() == 2);
        CHECK(xi[0] == joint.comps[0].scenarios[j]);
        CHECK(xi[1] == joint.comps[1].scenarios[j]);
        CHECK(joint.weight(j) == joint.comps[0].weights[j] * joint.comps[1].weights[j]);
    }

    // Reweighting the second coordinate multiplies into the joint weight.
    joint.comps[1].weights[3] = 0.25;
    CHECK(joint.weight(3) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("joint likelihood ratios multiply per-coordinate theta ratios") {
    std::vector<PosteriorState> oldp = {
        make_state(ConjugateFamily::GammaExponential, 2.0, 4.0),
        make_state(ConjugateFamily::GammaExponential, 5.0, 9.0),
    };
    std::vector<PosteriorState> newp = {
        make_state(ConjugateFamily::GammaExponential, 3.0, 6.0),
        make_state(ConjugateFamily::GammaExponential, 6.0, 11.0),
    };
    Rng rng(16);
    const JointBatch joint = sample_joint_scenarios(oldp, rng, 6, 1);
    const auto ratios = joint_likelihood_ratios(joint, oldp, newp);
    REQUIRE(ratios.size() == joint.size());
    for (std::size_t j = 0; j < joint.size(); ++j) {
        const double expect = likelihood_ratio_at_theta(oldp[0], newp[0], joint.comps[0].thetas[j]) *
                              likelihood_ratio_at_theta(oldp[1], newp[1], joint.comps[1].thetas[j]);
        CHECK(ratios[j] == doctest::Approx(expect).epsilon(1e-10));
    }
}
