// Batch experiment drivers: convergence-rate regression for the episodic
// value functions, asymptotic-normality diagnostics, warm- versus cold-start
// gap traces for the cutting-plane solver, and the four-way regret
// comparison. Each driver is a pure function of (config, seed) and emits
// deterministic CSV files when an output directory is set.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "eboc/inventory_oracle.hpp"
#include "eboc/sddp.hpp"

namespace eboc {

// Bad or missing configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string kind; // convergence | normality | sddp_gap | compare
    // Per-unit costs and discount for the inventory benchmark.
    double c = 1.0;
    double h = 2.0;
    double b = 3.0;
    double gamma = 0.6;
    // True demand mean; multi-product runs use theta_star + 0.5 * i for
    // product i.
    double theta_star = 10.0;
    int dims = 1;
    int episodes = 50;
    int batch = 20;       // observations absorbed per episode (analytic track)
    int iters = 30;       // solver iterations per episode, or compare steps
    int horizon = 5;      // exercised steps per episode / recompute period
    int k1 = 100;         // theta draws per scenario batch
    int k2 = 1;           // conditional draws per theta
    int replications = 200;
    int mc_draws = 100000; // predictive Monte Carlo sample size
    int mu_samples = 2000; // recorded states for the stationary average
    int burn_in = 200;
    int quantile_mc = 100; // realizations inside the quantile policy
    double prior_alpha = 1.0;
    double prior_beta = 1.0;
    int initial_data = 0; // observations folded in before the first episode
    // Comparison recompute cadence: "constant" re-plans every `horizon`
    // steps, "lazy" re-plans when the posterior variance has halved since
    // the last re-plan. Applies to every compared algorithm.
    std::string schedule = "constant";
    std::uint64_t seed = 20260801;
    int workers = 1;
    std::string out_dir; // empty: compute only, write nothing
};

// Parse a JSON config. Missing fields fall back to kind-specific defaults;
// unknown keys and out-of-range values raise ConfigError.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct PowerLawFit {
    double a = 0.0;
    double b_exp = 0.0;
    double rss = 0.0; // residual sum of squares in log-log space
};

// Least squares of log(gap) on log(n). Nonpositive gaps are skipped;
// needs at least two usable points.
PowerLawFit fit_power_law(const std::vector<double>& n, const std::vector<double>& gap);

struct ConvergenceResult {
    std::vector<double> mean_gap; // per episode, averaged over replications
    std::vector<double> gap_stderr;
    PowerLawFit fit;
    int excluded = 0; // nonpositive gaps dropped from the fit
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);

struct NormalityResult {
    std::vector<double> samples; // normalized deviations, one per replication
    double sigma_c = 0.0;
    double ks = 0.0;
};

NormalityResult run_normality(const ExperimentConfig& cfg);

struct GapTrace {
    std::vector<std::vector<double>> gap; // [episode][iteration]
    std::vector<double> reused_fraction;  // per episode, 0 for the first
};

struct SddpGapResult {
    GapTrace warm;
    GapTrace cold;
};

SddpGapResult run_sddp_gap(const ExperimentConfig& cfg);

struct RegretCurve {
    std::vector<double> mean;    // per iteration
    std::vector<double> ci_half; // 1.96 * stderr
};

struct CompareResult {
    // Keyed by algorithm label: eboc_n5, eboc_n2, lazy_psrl, drsc.
    std::map<std::string, RegretCurve> curves;
    // Raw per-replication regret traces [replication][iteration], for
    // paired statistics.
    std::map<std::string, std::vector<std::vector<double>>> per_replication;
};

CompareResult run_compare(const ExperimentConfig& cfg);

} // namespace eboc
