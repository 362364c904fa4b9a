#include "doctest.h"

#include "eboc/experiments.hpp"
#include "eboc/rng.hpp"
#include "eboc/stats.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace eboc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("exp_smoke_out") / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("power-law regression recovers synthetic exponents") {
    std::vector<double> n, gap;
    for (int i = 1; i <= 20; ++i) {
        n.push_back(static_cast<double>(i));
        gap.push_back(2.5 * std::pow(static_cast<double>(i), -0.5));
    }
    const PowerLawFit fit = fit_power_law(n, gap);
    CHECK(fit.a == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(fit.b_exp == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(fit.rss < 1e-18);

    // Nonpositive gaps drop out without disturbing the fit.
    std::vector<double> n2 = {1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> g2 = {3.0, 1.5, 0.0, 0.75, 0.6};
    const PowerLawFit fit2 = fit_power_law(n2, g2);
    CHECK(fit2.b_exp == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(fit2.a == doctest::Approx(3.0).epsilon(1e-9));

    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, -1.0}), std::runtime_error);
    CHECK_THROWS_AS(fit_power_law({2.0, 2.0}, {1.0, 0.5}), std::runtime_error);
}

TEST_CASE("config parsing enforces kinds, keys, and ranges") {
    CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(config_from_json("[1,2]"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{}"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"bogus"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"convergence","frobnicate":1})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"convergence","episodes":"ten"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"convergence","gamma":1.5})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"convergence","b":0.5})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"convergence","workers":0})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"kind":"compare","dims":0})"), ConfigError);

    const ExperimentConfig base = config_from_json(R"({"kind":"convergence"})");
    CHECK(base.theta_star == 10.0);
    CHECK(base.episodes == 50);
    CHECK(base.replications == 200);

    const ExperimentConfig norm = config_from_json(R"({"kind":"normality"})");
    CHECK(norm.theta_star == 1.0);
    CHECK(norm.batch == 100);
    CHECK(norm.replications == 1000);

    const ExperimentConfig cmp = config_from_json(R"({"kind":"compare"})");
    CHECK(cmp.gamma == 0.9);
    CHECK(cmp.theta_star == 5.0);
    CHECK(cmp.iters == 100);
    CHECK(cmp.initial_data == 10);

    const ExperimentConfig over =
        config_from_json(R"({"kind":"sddp_gap","episodes":3,"seed":123,"out_dir":"zzz"})");
    CHECK(over.episodes == 3);
    CHECK(over.seed == 123);
    CHECK(over.out_dir == "zzz");
    CHECK(over.horizon == 20);
    CHECK(over.initial_data == 20);
}

TEST_CASE("configs load from files with the same validation") {
    const fs::path dir = fresh_dir("configs");
    fs::create_directories(dir);
    const fs::path good = dir / "good.json";
    std::ofstream(good) << R"({"kind":"normality","replications":11})";
    const ExperimentConfig cfg = load_config(good.string());
    CHECK(cfg.kind == "normality");
    CHECK(cfg.replications == 11);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ConfigError);
}

TEST_CASE("drivers reject configs of the wrong kind") {
    const ExperimentConfig conv = config_from_json(R"({"kind":"convergence"})");
    CHECK_THROWS_AS(run_normality(conv), ConfigError);
    CHECK_THROWS_AS(run_sddp_gap(conv), ConfigError);
    CHECK_THROWS_AS(run_compare(conv), ConfigError);
    const ExperimentConfig norm = config_from_json(R"({"kind":"normality"})");
    CHECK_THROWS_AS(run_convergence(norm), ConfigError);
}

TEST_CASE("short learning runs shrink the value gap at a negative rate") {
    const fs::path dir_a = fresh_dir("conv_a");
    const fs::path dir_b = fresh_dir("conv_b");
    std::ostringstream js;
    js << R"({"kind":"convergence","episodes":6,"batch":40,"replications":8,)"
       << R"("mc_draws":4000,"seed":5150,"out_dir":")" << dir_a.generic_string() << R"("})";
    ExperimentConfig cfg = config_from_json(js.str());
    const ConvergenceResult res = run_convergence(cfg);
    REQUIRE(res.mean_gap.size() == 6);
    REQUIRE(res.gap_stderr.size() == 6);
    for (double g : res.mean_gap) CHECK(g >= 0.0);
    for (double s : res.gap_stderr) CHECK(s > 0.0);
    CHECK(res.fit.b_exp < 0.0);
    CHECK(fs::exists(dir_a / "convergence_gaps.csv"));
    CHECK(fs::exists(dir_a / "convergence_fit.csv"));
    CHECK(fs::exists(dir_a / "convergence_gaps.dat"));

    // Byte-identical outputs on a rerun with the same seed.
    cfg.out_dir = dir_b.generic_string();
    const ConvergenceResult res2 = run_convergence(cfg);
    for (std::size_t e = 0; e < res.mean_gap.size(); ++e) {
        CHECK(res.mean_gap[e] == res2.mean_gap[e]);
    }
    CHECK(slurp(dir_a / "convergence_gaps.csv") == slurp(dir_b / "convergence_gaps.csv"));
    CHECK(slurp(dir_a / "convergence_fit.csv") == slurp(dir_b / "convergence_fit.csv"));
}

TEST_CASE("replication streams make worker count irrelevant") {
    ExperimentConfig cfg = config_from_json(
        R"({"kind":"convergence","episodes":3,"batch":30,"replications":6,"mc_draws":2000})");
    const ConvergenceResult one = run_convergence(cfg);
    cfg.workers = 2;
    const ConvergenceResult two = run_convergence(cfg);
    REQUIRE(one.mean_gap.size() == two.mean_gap.size());
    for (std::size_t e = 0; e < one.mean_gap.size(); ++e) {
        CHECK(one.mean_gap[e] == two.mean_gap[e]);
    }
}

TEST_CASE("normalized value deviations look standard normal") {
    const fs::path dir = fresh_dir("norm");
    std::ostringstream js;
    js << R"({"kind":"normality","replications":60,"batch":50,"mc_draws":3000,)"
       << R"("seed":808,"out_dir":")" << dir.generic_string() << R"("})";
    const ExperimentConfig cfg = config_from_json(js.str());
    const NormalityResult res = run_normality(cfg);
    REQUIRE(res.samples.size() == 60);
    CHECK(res.sigma_c == doctest::Approx(6.903815).epsilon(1e-6));
    CHECK(res.ks > 0.0);
    CHECK(res.ks < 0.3);
    for (const char* stem : {"normality_samples", "normality_qq", "normality_hist",
                             "normality_summary"}) {
        CHECK(fs::exists(dir / (std::string(stem) + ".csv")));
    }
    // The first data row of the QQ table is the lowest order statistic.
    std::istringstream qq(slurp(dir / "normality_qq.csv"));
    std::string line;
    REQUIRE(std::getline(qq, line));
    CHECK(line == "p,theoretical,empirical");
    REQUIRE(std::getline(qq, line));
    CHECK(line.find(',') != std::string::npos);
}

TEST_CASE("the diagnostic statistic separates normal from shrunken samples") {
    Rng rng(909);
    std::vector<double> good(4000), narrow(4000);
    for (std::size_t i = 0; i < good.size(); ++i) {
        good[i] = rng.normal();
        narrow[i] = 0.5 * rng.normal();
    }
    CHECK(ks_statistic_normal(good) < 0.03);
    CHECK(ks_statistic_normal(narrow) > 0.1);
}

TEST_CASE("warm restarts enter later episodes with a smaller gap than cold ones") {
    const fs::path dir = fresh_dir("gap");
    std::ostringstream js;
    js << R"({"kind":"sddp_gap","episodes":2,"iters":6,"k1":15,"horizon":10,)"
       << R"("initial_data":25,"mu_samples":150,"burn_in":50,"mc_draws":4000,)"
       << R"("seed":4242,"out_dir":")" << dir.generic_string() << R"("})";
    const ExperimentConfig cfg = config_from_json(js.str());
    const SddpGapResult res = run_sddp_gap(cfg);

    for (const GapTrace* trace : {&res.warm, &res.cold}) {
        REQUIRE(trace->gap.size() == 2);
        REQUIRE(trace->reused_fraction.size() == 2);
        CHECK(trace->reused_fraction[0] == 0.0);
        for (const auto& episode : trace->gap) {
            REQUIRE(episode.size() == 6);
            for (std::size_t k = 1; k < episode.size(); ++k) {
                CHECK(episode[k] <= episode[k - 1] + 1e-9);
            }
        }
    }
    CHECK(res.cold.reused_fraction[1] == 0.0);
    CHECK(res.warm.reused_fraction[1] > 0.0);
    CHECK(res.warm.reused_fraction[1] <= 1.0);
    // The carried cuts mean episode two starts far closer to the target.
    CHECK(res.warm.gap[1].front() < 0.5 * res.cold.gap[1].front());
    CHECK(fs::exists(dir / "sddp_gap_trace.csv"));
    CHECK(fs::exists(dir / "sddp_gap_reuse.csv"));
}

TEST_CASE("a well-informed comparison run produces small nonnegative regret") {
    const fs::path dir = fresh_dir("cmp");
    std::ostringstream js;
    js << R"({"kind":"compare","replications":6,"iters":12,"horizon":3,)"
       << R"("quantile_mc":300,"initial_data":400,"seed":616,"out_dir":")"
       << dir.generic_string() << R"("})";
    const ExperimentConfig cfg = config_from_json(js.str());
    const CompareResult res = run_compare(cfg);

    REQUIRE(res.curves.size() == 4);
    for (const char* label : {"eboc_n5", "eboc_n2", "lazy_psrl", "drsc"}) {
        REQUIRE(res.curves.count(label) == 1);
        const RegretCurve& curve = res.curves.at(label);
        REQUIRE(curve.mean.size() == 12);
        REQUIRE(curve.ci_half.size() == 12);
        for (std::size_t t = 0; t < curve.mean.size(); ++t) {
            CHECK(curve.mean[t] >= 0.0);
            CHECK(curve.ci_half[t] >= 0.0);
            CHECK(std::isfinite(curve.mean[t]));
        }
        const auto& raw = res.per_replication.at(label);
        REQUIRE(raw.size() == 6);
        REQUIRE(raw.front().size() == 12);
    }
    // With 400 prior observations the posterior is nearly a point mass, so
    // sampling-based policies sit at or next to the true base stock.
    CHECK(res.curves.at("lazy_psrl").mean.back() < 3.0);
    CHECK(res.curves.at("eboc_n5").mean.back() < 3.0);

    CHECK(fs::exists(dir / "compare_trace.csv"));
    CHECK(fs::exists(dir / "compare_summary.csv"));
    std::istringstream trace(slurp(dir / "compare_trace.csv"));
    int lines = 0;
    std::string line;
    while (std::getline(trace, line)) ++lines;
    CHECK(lines == 1 + 6 * 12 * 4);

    // The comparison is replication-deterministic too.
    ExperimentConfig again = cfg;
    again.out_dir.clear();
    again.workers = 2;
    const CompareResult res2 = run_compare(again);
    const auto& a = res.per_replication.at("eboc_n5");
    const auto& b = res2.per_replication.at("eboc_n5");
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t t = 0; t < a[r].size(); ++t) {
            CHECK(a[r][t] == b[r][t]);
        }
    }
}
