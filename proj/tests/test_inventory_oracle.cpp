#include "doctest.h"

#include "eboc/bayes.hpp"
#include "eboc/inventory_oracle.hpp"
#include "eboc/rng.hpp"
#include "oracles.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace eboc;

namespace {

InventoryParams exp_params(double gamma = 0.6, double theta = 10.0) {
    return make_inventory_params(1.0, 2.0, 3.0, gamma, {DemandKind::Exponential, theta, {}});
}

InventoryParams poisson_params(double gamma = 0.9, double theta = 5.0) {
    return make_inventory_params(1.0, 2.0, 3.0, gamma, {DemandKind::Poisson, theta, {}});
}

double poisson_pmf(int k, double mean) {
    return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

} // namespace

TEST_CASE("the fractile blends ordering cost into the newsvendor ratio") {
    CHECK(kappa(exp_params(0.6)) == doctest::Approx(0.52).epsilon(1e-12));
    CHECK(kappa(exp_params(0.9)) == doctest::Approx(0.58).epsilon(1e-12));
    // As discounting vanishes the ratio approaches the classical b/(b+h).
    CHECK(kappa(exp_params(0.999999)) == doctest::Approx(0.6).epsilon(1e-6));
    CHECK_THROWS_AS(make_inventory_params(1.0, 2.0, 0.5, 0.6, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_inventory_params(-1.0, 2.0, 3.0, 0.6, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_inventory_params(1.0, 0.0, 3.0, 0.6, {}), std::invalid_argument);
    CHECK_THROWS_AS(
        make_inventory_params(1.0, 2.0, 3.0, 1.0, {DemandKind::Exponential, 10.0, {}}),
        std::invalid_argument);
}

TEST_CASE("exponential base stock hits the fractile quantile exactly") {
    const double level = base_stock_level(exp_params(0.6));
    CHECK(level == doctest::Approx(-10.0 * std::log(0.48)).epsilon(1e-13));
    // CDF at the level recovers the fractile.
    CHECK(1.0 - std::exp(-level / 10.0) == doctest::Approx(0.52).epsilon(1e-13));
}

TEST_CASE("poisson base stock is the smallest lattice point past the fractile") {
    const InventoryParams p = poisson_params();
    const double level = base_stock_level(p);
    CHECK(level == 5.0);
    double cdf4 = 0.0;
    for (int k = 0; k <= 4; ++k) cdf4 += poisson_pmf(k, 5.0);
    CHECK(cdf4 < 0.58);
    CHECK(cdf4 + poisson_pmf(5, 5.0) >= 0.58);
}

TEST_CASE("predictive base stock matches the closed heavy-tailed quantile") {
    PosteriorState post;
    post.family = ConjugateFamily::GammaExponential;
    post.alpha = 21.0;
    post.beta = 200.0;
    InventoryParams p =
        make_inventory_params(1.0, 2.0, 3.0, 0.6, {DemandKind::Predictive, 0.0, post});
    const double frac = 0.52;
    const double expect = post.beta * (std::pow(1.0 - frac, -1.0 / post.alpha) - 1.0);
    CHECK(base_stock_level(p) == doctest::Approx(expect).epsilon(1e-12));

    // Discrete predictive family: count the mass directly.
    PosteriorState gp;
    gp.family = ConjugateFamily::GammaPoisson;
    gp.alpha = 20.0;
    gp.beta = 4.0;
    InventoryParams q =
        make_inventory_params(1.0, 2.0, 3.0, 0.9, {DemandKind::Predictive, 0.0, gp});
    const double r = gp.alpha;
    const double prob = gp.beta / (gp.beta + 1.0);
    double cdf = 0.0;
    int quant = -1;
    for (int k = 0; k < 200 && quant < 0; ++k) {
        cdf += std::exp(std::lgamma(r + k) - std::lgamma(r) - std::lgamma(k + 1.0) +
                        r * std::log(prob) + k * std::log(1.0 - prob));
        if (cdf >= 0.58) quant = k;
    }
    REQUIRE(quant >= 0);
    CHECK(base_stock_level(q) == doctest::Approx(static_cast<double>(quant)).epsilon(1e-12));
}

TEST_CASE("shortage expectations match direct integration") {
    CHECK(shortage_expectation_exponential(10.0, 7.0) ==
          doctest::Approx(10.0 * std::exp(-0.7)).epsilon(1e-13));
    CHECK(shortage_expectation_exponential(10.0, 0.0) == doctest::Approx(10.0).epsilon(1e-13));
    CHECK(shortage_expectation_exponential(10.0, -4.0) == doctest::Approx(14.0).epsilon(1e-13));

    for (const double y : {-2.0, 0.0, 3.7, 5.0, 11.2}) {
        double direct = 0.0;
        for (int k = 0; k <= 200; ++k) {
            if (k > y) direct += (k - y) * poisson_pmf(k, 5.0);
        }
        CHECK(shortage_expectation_poisson(5.0, y) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("single-period cost charges shortages and leftovers at their rates") {
    const InventoryParams p = exp_params();
    CHECK(newsvendor_cost(p, 5.0, 9.0) == doctest::Approx(12.0).epsilon(1e-13));
    CHECK(newsvendor_cost(p, 5.0, 2.0) == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(newsvendor_cost(p, 5.0, 5.0) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("exponential value function assembles from partial expectations") {
    const InventoryParams p = exp_params();
    const double S = -10.0 * std::log(0.48);
    const double shortage = 10.0 * 0.48;
    const double holding = S - 10.0 + shortage;
    const double expected_psi = 3.0 * shortage + 2.0 * holding;
    const double constant = (0.6 * 1.0 * 10.0 + 0.4 * 1.0 * S + expected_psi) / 0.4;
    CHECK(true_value_exponential(p, 0.0) == doctest::Approx(constant).epsilon(1e-12));
    CHECK(true_value_exponential(p, 0.0) == doctest::Approx(69.0381513).epsilon(1e-7));
    // Below the base stock the value is affine with slope -c.
    CHECK(true_value_exponential(p, 3.0) == doctest::Approx(constant - 3.0).epsilon(1e-12));
    CHECK(true_value_exponential(p, -20.0) == doctest::Approx(constant + 20.0).epsilon(1e-12));
    CHECK_THROWS_AS(true_value_exponential(p, S + 0.1), std::domain_error);
}

TEST_CASE("monte carlo value estimate brackets the closed form") {
    const InventoryParams p = exp_params();
    Rng rng(201);
    const ValueEstimate est = true_value_exponential_mc(p, 0.0, 20000, rng);
    CHECK(est.stderr_ > 0.0);
    CHECK(std::fabs(est.value - true_value_exponential(p, 0.0)) <= 3.0 * est.stderr_);
    CHECK_THROWS_AS(true_value_exponential_mc(p, 0.0, 1, rng), std::invalid_argument);
}

TEST_CASE("poisson value satisfies its own no-order recursion at the boundary") {
    const InventoryParams p = poisson_params();
    const double level = base_stock_level(p);
    // At the level no order is placed, so the stationary value must equal
    // one period of cost plus the discounted average over the lattice.
    for (const double x : {level, level + 0.5, level + 1.7}) {
        double rhs = 0.0;
        for (int d = 0; d <= 30; ++d) {
            rhs += poisson_pmf(d, 5.0) *
                   (newsvendor_cost(p, x, d) + p.gamma * poisson_value(p, x - d, level));
        }
        CHECK(poisson_value(p, x, level) == doctest::Approx(rhs).epsilon(1e-9));
    }
    // Below the level the affine slope is -c.
    CHECK(poisson_value(p, 1.0, level) - poisson_value(p, 0.0, level) ==
          doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("the fractile level wins a scan over nearby integer levels") {
    const InventoryParams p = poisson_params();
    const double best = poisson_value(p, 0.0, 5.0);
    for (const double level : {2.0, 3.0, 4.0, 6.0, 7.0, 8.0}) {
        CHECK(poisson_value(p, 0.0, level) > best - 1e-10);
    }
}

TEST_CASE("simulated order-up-to cost agrees with the poisson closed form") {
    const InventoryParams p = poisson_params();
    Rng rng(202);
    const ValueEstimate mc = oracles::simulate_order_up_to_poisson(p, 0.0, 5.0, 90, 1500, rng);
    const double closed = poisson_value(p, 0.0, 5.0);
    // 0.9^90 leaves a truncation bias well under 0.05 here.
    CHECK(std::fabs(mc.value - closed) <= 3.0 * mc.stderr_ + 0.05);
}

TEST_CASE("score-weighted expectation matches quadrature and frozen constants") {
    const InventoryParams unit = exp_params(0.6, 1.0);
    const double lib = score_expectation(unit);
    CHECK(lib == doctest::Approx(2.7615265).epsilon(1e-6));

    // Independent composite-Simpson quadrature of
    //   (gamma c D + psi(S, D)) (D - theta) / theta^2 * exp(-D/theta)/theta
    // split at the base-stock kink.
    const double theta = 1.0;
    const double S = base_stock_level(unit);
    auto integrand = [&](double d) {
        const double g = unit.gamma * unit.c * d + newsvendor_cost(unit, S, d);
        const double score = (d - theta) / (theta * theta);
        return g * score * std::exp(-d / theta) / theta;
    };
    auto simpson = [&](double lo, double hi, int n) {
        double acc = integrand(lo) + integrand(hi);
        for (int i = 1; i < n; ++i) {
            acc += integrand(lo + (hi - lo) * i / n) * (i % 2 ? 4.0 : 2.0);
        }
        return acc * (hi - lo) / (3.0 * n);
    };
    const double quad = simpson(0.0, S, 20000) + simpson(S, 60.0 * theta, 20000);
    CHECK(lib == doctest::Approx(quad).epsilon(1e-6));

    // The expectation is scale free in theta; the sigma constant is linear.
    CHECK(score_expectation(exp_params(0.6, 3.0)) == doctest::Approx(lib).epsilon(1e-6));
    CHECK(asymptotic_sigma(unit) == doctest::Approx(6.903815).epsilon(1e-6));
    CHECK(asymptotic_sigma(exp_params(0.6, 2.0)) ==
          doctest::Approx(2.0 * asymptotic_sigma(unit)).epsilon(1e-9));
}

TEST_CASE("episodic value collapses to the fixed-parameter one as data accumulates") {
    PosteriorState post;
    post.family = ConjugateFamily::GammaExponential;
    post.alpha = 40000.0;
    post.beta = 400000.0; // rate concentrated at 0.1, mean demand 10
    const InventoryParams p =
        make_inventory_params(1.0, 2.0, 3.0, 0.6, {DemandKind::Predictive, 0.0, post});
    Rng rng(203);
    const EpisodicValue ev = episodic_value_mc(p, post, 200000, rng);
    CHECK(std::fabs(ev.level - (-10.0 * std::log(0.48))) < 0.15);
    CHECK(std::fabs(ev.constant - 69.0381513) < 1.5);
    // The empirical level estimates the exact predictive quantile.
    CHECK(std::fabs(ev.level - base_stock_level(p)) < 0.15);
    CHECK_THROWS_AS(episodic_value_mc(p, post, 0, rng), std::invalid_argument);
}

TEST_CASE("the value table prints one affine row per grid point") {
    const InventoryParams p = exp_params();
    const std::string csv = value_table_csv(p, -5.0, 5.0, 21);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "x,value");
    int rows = 0;
    double first_x = 0.0, first_v = 0.0;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string xs, vs;
        REQUIRE(std::getline(row, xs, ','));
        REQUIRE(std::getline(row, vs));
        if (rows == 0) {
            first_x = std::stod(xs);
            first_v = std::stod(vs);
        }
        ++rows;
    }
    CHECK(rows == 21);
    CHECK(first_x == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(first_v == doctest::Approx(true_value_exponential(p, -5.0)).epsilon(1e-4));
    CHECK_THROWS_AS(value_table_csv(p, 0.0, 1.0, 1), std::invalid_argument);
}
