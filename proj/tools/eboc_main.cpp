// Experiment launcher: picks one of the batch experiments, loads its JSON
// config, applies command-line overrides, runs it, and prints a short
// summary. Results land as CSV files in the configured output directory.
//
// Exit codes: 0 success, 2 configuration problem, 3 numerical contract
// violation or any other runtime failure.
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eboc/experiments.hpp"

namespace {

void print_convergence(const eboc::ConvergenceResult& res) {
    std::printf("episodes: %zu\n", res.mean_gap.size());
    std::printf("power-law fit: a=%.6g b=%.6g rss=%.6g excluded=%d\n", res.fit.a, res.fit.b_exp,
                res.fit.rss, res.excluded);
    std::printf("first gap %.6g, last gap %.6g\n", res.mean_gap.front(), res.mean_gap.back());
}

void print_normality(const eboc::NormalityResult& res) {
    std::printf("replications: %zu\n", res.samples.size());
    std::printf("sigma_c=%.6g ks=%.6g\n", res.sigma_c, res.ks);
}

void print_gap_trace(const char* label, const eboc::GapTrace& trace) {
    for (std::size_t e = 0; e < trace.gap.size(); ++e) {
        const auto& g = trace.gap[e];
        std::printf("%s episode %zu: initial gap %.6g, final gap %.6g, reused %.3f\n", label,
                    e + 1, g.front(), g.back(), trace.reused_fraction[e]);
    }
}

void print_compare(const eboc::CompareResult& res) {
    for (const auto& [label, curve] : res.curves) {
        const std::size_t n = curve.mean.size();
        const std::size_t tail = n >= 20 ? 20 : n;
        double late = 0.0;
        for (std::size_t t = n - tail; t < n; ++t) late += curve.mean[t];
        late /= static_cast<double>(tail);
        std::printf("%s: first regret %.6g, mean over last %zu iters %.6g\n", label.c_str(),
                    curve.mean.front(), tail, late);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Episodic Bayesian optimal control experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir;

    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"convergence", "episodic value-function convergence rate (analytic track)"},
        {"normality", "asymptotic-normality diagnostics for the episodic values"},
        {"sddp_gap", "warm- vs cold-start cutting-plane gap traces"},
        {"compare", "regret comparison of the quantile, sampling, and robust policies"},
    };
    for (const auto& [name, description] : kinds) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "JSON experiment config")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--workers", workers, "override the worker count");
        sub->add_option("--out", out_dir, "override the output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        eboc::ExperimentConfig cfg = eboc::load_config(config_path);
        if (cfg.kind != sub->get_name()) {
            throw eboc::ConfigError("config kind '" + cfg.kind + "' does not match experiment '" +
                                    sub->get_name() + "'");
        }
        if (sub->count("--seed") > 0) cfg.seed = seed;
        if (sub->count("--workers") > 0) cfg.workers = workers;
        if (sub->count("--out") > 0) cfg.out_dir = out_dir;
        if (cfg.workers < 1) throw eboc::ConfigError("workers must be >= 1");

        if (cfg.kind == "convergence") {
            print_convergence(eboc::run_convergence(cfg));
        } else if (cfg.kind == "normality") {
            print_normality(eboc::run_normality(cfg));
        } else if (cfg.kind == "sddp_gap") {
            const eboc::SddpGapResult res = eboc::run_sddp_gap(cfg);
            print_gap_trace("warm", res.warm);
            print_gap_trace("cold", res.cold);
        } else {
            print_compare(eboc::run_compare(cfg));
        }
        if (!cfg.out_dir.empty()) std::printf("wrote CSV files to %s\n", cfg.out_dir.c_str());
        return 0;
    } catch (const eboc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
