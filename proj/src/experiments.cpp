#include "eboc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "eboc/baselines.hpp"
#include "eboc/control.hpp"
#include "eboc/stats.hpp"

namespace eboc {

namespace {

// Deterministic worker pool: replication i always runs body(i) on its own
// derived RNG stream, so scheduling cannot change any result.
void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
}

// CSV next to a gnuplot-friendly twin: '#'-commented header, spaces for
// commas, same rows.
void emit_table(const std::string& dir, const std::string& stem, const std::string& csv) {
    if (dir.empty()) return;
    write_file(dir, stem + ".csv", csv);
    std::string dat = csv;
    std::replace(dat.begin(), dat.end(), ',', ' ');
    write_file(dir, stem + ".dat", "# " + dat);
}

PosteriorState make_prior(ConjugateFamily family, double alpha, double beta) {
    PosteriorState state;
    state.family = family;
    state.alpha = alpha;
    state.beta = beta;
    return state;
}

ExperimentConfig defaults_for(const std::string& kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    if (kind == "convergence") {
        // struct defaults
    } else if (kind == "normality") {
        cfg.theta_star = 1.0;
        cfg.batch = 100;
        cfg.replications = 1000;
    } else if (kind == "sddp_gap") {
        cfg.episodes = 5;
        cfg.iters = 30;
        cfg.horizon = 20;
        cfg.initial_data = 20;
        cfg.replications = 1;
    } else if (kind == "compare") {
        cfg.gamma = 0.9;
        cfg.theta_star = 5.0;
        cfg.iters = 100;
        cfg.horizon = 5;
        cfg.replications = 500;
        cfg.initial_data = 10;
    } else {
        throw ConfigError("unknown experiment kind: " + kind);
    }
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (!(cfg.b > cfg.c && cfg.c > 0.0 && cfg.h > 0.0)) {
        throw ConfigError("costs must satisfy b > c > 0 and h > 0");
    }
    if (cfg.theta_star <= 0.0) throw ConfigError("theta_star must be positive");
    if (cfg.dims < 1) throw ConfigError("dims must be >= 1");
    if (cfg.episodes < 1 || cfg.iters < 1 || cfg.horizon < 1) {
        throw ConfigError("episodes, iters, horizon must be >= 1");
    }
    if (cfg.k1 < 1 || cfg.k2 < 1) throw ConfigError("k1 and k2 must be >= 1");
    if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
    if (cfg.batch < 1 || cfg.mc_draws < 2 || cfg.mu_samples < 1 || cfg.burn_in < 0) {
        throw ConfigError("batch, mc_draws, mu_samples, burn_in out of range");
    }
    if (cfg.quantile_mc < 1) throw ConfigError("quantile_mc must be >= 1");
    if (cfg.prior_alpha <= 0.0 || cfg.prior_beta <= 0.0) {
        throw ConfigError("prior parameters must be positive");
    }
    if (cfg.initial_data < 0) throw ConfigError("initial_data must be >= 0");
    if (cfg.schedule != "constant" && cfg.schedule != "lazy") {
        throw ConfigError("schedule must be 'constant' or 'lazy'");
    }
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
}

} // namespace

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("kind")) throw ConfigError("config needs a 'kind' field");
    ExperimentConfig cfg = defaults_for(j.at("kind").get<std::string>());
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "kind") {
                continue;
            } else if (key == "c") {
                cfg.c = value.get<double>();
            } else if (key == "h") {
                cfg.h = value.get<double>();
            } else if (key == "b") {
                cfg.b = value.get<double>();
            } else if (key == "gamma") {
                cfg.gamma = value.get<double>();
            } else if (key == "theta_star") {
                cfg.theta_star = value.get<double>();
            } else if (key == "dims") {
                cfg.dims = value.get<int>();
            } else if (key == "episodes") {
                cfg.episodes = value.get<int>();
            } else if (key == "batch") {
                cfg.batch = value.get<int>();
            } else if (key == "iters") {
                cfg.iters = value.get<int>();
            } else if (key == "horizon") {
                cfg.horizon = value.get<int>();
            } else if (key == "k1") {
                cfg.k1 = value.get<int>();
            } else if (key == "k2") {
                cfg.k2 = value.get<int>();
            } else if (key == "replications") {
                cfg.replications = value.get<int>();
            } else if (key == "mc_draws") {
                cfg.mc_draws = value.get<int>();
            } else if (key == "mu_samples") {
                cfg.mu_samples = value.get<int>();
            } else if (key == "burn_in") {
                cfg.burn_in = value.get<int>();
            } else if (key == "quantile_mc") {
                cfg.quantile_mc = value.get<int>();
            } else if (key == "prior_alpha") {
                cfg.prior_alpha = value.get<double>();
            } else if (key == "prior_beta") {
                cfg.prior_beta = value.get<double>();
            } else if (key == "initial_data") {
                cfg.initial_data = value.get<int>();
            } else if (key == "schedule") {
                cfg.schedule = value.get<std::string>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "workers") {
                cfg.workers = value.get<int>();
            } else if (key == "out_dir") {
                cfg.out_dir = value.get<std::string>();
            } else {
                throw ConfigError("unknown config key: " + key);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("bad value for '" + key + "': " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

PowerLawFit fit_power_law(const std::vector<double>& n, const std::vector<double>& gap) {
    if (n.size() != gap.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (gap[i] > 0.0 && n[i] > 0.0) {
            xs.push_back(std::log(n[i]));
            ys.push_back(std::log(gap[i]));
        }
    }
    if (xs.size() < 2) throw std::runtime_error("fit_power_law: fewer than two positive gaps");
    double xbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= static_cast<double>(xs.size());
    ybar /= static_cast<double>(xs.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx == 0.0) throw std::runtime_error("fit_power_law: degenerate abscissae");
    PowerLawFit fit;
    fit.b_exp = sxy / sxx;
    const double intercept = ybar - fit.b_exp * xbar;
    fit.a = std::exp(intercept);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double resid = ys[i] - (intercept + fit.b_exp * xs[i]);
        fit.rss += resid * resid;
    }
    return fit;
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
    if (cfg.kind != "convergence") throw ConfigError("run_convergence: wrong config kind");
    const InventoryParams params = make_inventory_params(
        cfg.c, cfg.h, cfg.b, cfg.gamma, {DemandKind::Exponential, cfg.theta_star, {}});
    const double true_constant = true_value_exponential(params, 0.0);
    const int episodes = cfg.episodes;
    const int reps = cfg.replications;
    std::vector<std::vector<double>> gaps(static_cast<std::size_t>(reps),
                                          std::vector<double>(static_cast<std::size_t>(episodes)));
    const Rng root(cfg.seed);
    parallel_for(reps, cfg.workers, [&](int r) {
        Rng rng = root.substream(static_cast<std::uint64_t>(r));
        PosteriorState post =
            make_prior(ConjugateFamily::GammaExponential, cfg.prior_alpha, cfg.prior_beta);
        for (int e = 0; e < episodes; ++e) {
            std::vector<double> obs(static_cast<std::size_t>(cfg.batch));
            for (auto& d : obs) d = rng.exponential(cfg.theta_star);
            post = update_posterior(post, obs);
            const EpisodicValue ev = episodic_value_mc(params, post, cfg.mc_draws, rng);
            // Both value functions are affine with slope -c wherever the
            // base-stock form holds, so the stationary average of
            // |V_N - V*| is the constant offset itself.
            gaps[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)] =
                std::fabs(ev.constant - true_constant);
        }
    });
    ConvergenceResult out;
    out.mean_gap.resize(static_cast<std::size_t>(episodes));
    out.gap_stderr.resize(static_cast<std::size_t>(episodes));
    std::vector<double> ns(static_cast<std::size_t>(episodes));
    std::vector<double> column(static_cast<std::size_t>(reps));
    for (int e = 0; e < episodes; ++e) {
        for (int r = 0; r < reps; ++r) {
            column[static_cast<std::size_t>(r)] =
                gaps[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)];
        }
        const MeanStderr ms = mean_stderr(column);
        out.mean_gap[static_cast<std::size_t>(e)] = ms.mean;
        out.gap_stderr[static_cast<std::size_t>(e)] = ms.stderr_;
        ns[static_cast<std::size_t>(e)] = static_cast<double>(e + 1);
        if (ms.mean <= 0.0) ++out.excluded;
    }
    out.fit = fit_power_law(ns, out.mean_gap);

    std::string csv = "episode,mean_gap,stderr\n";
    for (int e = 0; e < episodes; ++e) {
        csv += fmt(ns[static_cast<std::size_t>(e)]) + "," +
               fmt(out.mean_gap[static_cast<std::size_t>(e)]) + "," +
               fmt(out.gap_stderr[static_cast<std::size_t>(e)]) + "\n";
    }
    emit_table(cfg.out_dir, "convergence_gaps", csv);
    emit_table(cfg.out_dir, "convergence_fit",
               "a,b,rss,excluded\n" + fmt(out.fit.a) + "," + fmt(out.fit.b_exp) + "," +
                   fmt(out.fit.rss) + "," + fmt(out.excluded) + "\n");
    return out;
}

NormalityResult run_normality(const ExperimentConfig& cfg) {
    if (cfg.kind != "normality") throw ConfigError("run_normality: wrong config kind");
    const InventoryParams params = make_inventory_params(
        cfg.c, cfg.h, cfg.b, cfg.gamma, {DemandKind::Exponential, cfg.theta_star, {}});
    NormalityResult out;
    out.sigma_c = asymptotic_sigma(params);
    const double true_constant = true_value_exponential(params, 0.0);
    const int reps = cfg.replications;
    const int nobs = cfg.batch;
    out.samples.resize(static_cast<std::size_t>(reps));
    const Rng root(cfg.seed);
    parallel_for(reps, cfg.workers, [&](int r) {
        Rng rng = root.substream(static_cast<std::uint64_t>(r));
        PosteriorState post =
            make_prior(ConjugateFamily::GammaExponential, cfg.prior_alpha, cfg.prior_beta);
        std::vector<double> obs(static_cast<std::size_t>(nobs));
        for (auto& d : obs) d = rng.exponential(cfg.theta_star);
        post = update_posterior(post, obs);
        const EpisodicValue ev = episodic_value_mc(params, post, cfg.mc_draws, rng);
        out.samples[static_cast<std::size_t>(r)] = std::sqrt(static_cast<double>(nobs)) *
                                                   (ev.constant - true_constant) / out.sigma_c;
    });
    out.ks = ks_statistic_normal(out.samples);

    std::string csv = "replication,stat\n";
    for (int r = 0; r < reps; ++r) {
        csv += fmt(r) + "," + fmt(out.samples[static_cast<std::size_t>(r)]) + "\n";
    }
    emit_table(cfg.out_dir, "normality_samples", csv);

    std::vector<double> sorted = out.samples;
    std::sort(sorted.begin(), sorted.end());
    std::string qq = "p,theoretical,empirical\n";
    for (int i = 0; i < reps; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / reps;
        qq += fmt(p) + "," + fmt(normal_quantile(p)) + "," +
              fmt(sorted[static_cast<std::size_t>(i)]) + "\n";
    }
    emit_table(cfg.out_dir, "normality_qq", qq);

    constexpr int kBins = 40;
    constexpr double kLo = -4.0;
    constexpr double kHi = 4.0;
    const double width = (kHi - kLo) / kBins;
    std::vector<int> counts(kBins, 0);
    for (double s : sorted) {
        if (s < kLo || s >= kHi) continue;
        ++counts[static_cast<std::size_t>((s - kLo) / width)];
    }
    std::string hist = "bin_lo,bin_hi,density\n";
    for (int i = 0; i < kBins; ++i) {
        hist += fmt(kLo + i * width) + "," + fmt(kLo + (i + 1) * width) + "," +
                fmt(counts[static_cast<std::size_t>(i)] / (reps * width)) + "\n";
    }
    emit_table(cfg.out_dir, "normality_hist", hist);
    emit_table(cfg.out_dir, "normality_summary",
               "replications,sigma,ks\n" + fmt(reps) + "," + fmt(out.sigma_c) + "," + fmt(out.ks) +
                   "\n");
    return out;
}

SddpGapResult run_sddp_gap(const ExperimentConfig& cfg) {
    if (cfg.kind != "sddp_gap") throw ConfigError("run_sddp_gap: wrong config kind");
    const int dims = cfg.dims;
    // For dims > 1 the products get staggered parameters: cost coefficients
    // offset by 0.5*sin(i) and demand means by 0.5*(i+1), product index i
    // counted from zero.
    Vec means(static_cast<std::size_t>(dims));
    Vec cvec(static_cast<std::size_t>(dims)), hvec(static_cast<std::size_t>(dims)),
        bvec(static_cast<std::size_t>(dims));
    for (int i = 0; i < dims; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double shift = dims > 1 ? 0.5 * std::sin(static_cast<double>(i)) : 0.0;
        means[ii] = cfg.theta_star + (dims > 1 ? 0.5 * (i + 1) : 0.0);
        cvec[ii] = cfg.c + shift;
        hvec[ii] = cfg.h + shift;
        bvec[ii] = cfg.b + shift;
    }
    const ControlProblem problem = build_inventory(dims, cvec, hvec, bvec, cfg.gamma, means);
    // Cost coefficients only; the demand slot is not consulted by the
    // posterior-predictive evaluator.
    std::vector<InventoryParams> value_params;
    for (int i = 0; i < dims; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        value_params.push_back(make_inventory_params(cvec[ii], hvec[ii], bvec[ii], cfg.gamma,
                                                     {DemandKind::Exponential, means[ii], {}}));
    }

    SddpGapResult out;
    for (int variant = 0; variant < 2; ++variant) {
        const bool warm = variant == 0;
        GapTrace& trace = warm ? out.warm : out.cold;
        Rng run_rng = Rng(cfg.seed).substream(warm ? 1 : 2);
        Rng hook_rng = Rng(cfg.seed).substream(warm ? 11 : 12);

        std::vector<PosteriorState> posterior(static_cast<std::size_t>(dims));
        for (int i = 0; i < dims; ++i) {
            posterior[static_cast<std::size_t>(i)] =
                make_prior(ConjugateFamily::GammaExponential, cfg.prior_alpha, cfg.prior_beta);
            std::vector<double> obs(static_cast<std::size_t>(cfg.initial_data));
            for (auto& d : obs) d = run_rng.exponential(means[static_cast<std::size_t>(i)]);
            posterior[static_cast<std::size_t>(i)] =
                update_posterior(posterior[static_cast<std::size_t>(i)], obs);
        }

        int current_episode = 0;
        std::vector<Vec> states;
        std::vector<double> vstar;
        auto hook = [&](int episode, const std::vector<PosteriorState>& post, int iter,
                        const CutSet& cuts) {
            (void)iter;
            if (episode != current_episode) {
                current_episode = episode;
                states.assign(static_cast<std::size_t>(cfg.mu_samples),
                              Vec(static_cast<std::size_t>(dims)));
                vstar.assign(static_cast<std::size_t>(cfg.mu_samples), 0.0);
                for (int i = 0; i < dims; ++i) {
                    const auto ii = static_cast<std::size_t>(i);
                    const PosteriorState& pi = post[ii];
                    const EpisodicValue ev =
                        episodic_value_mc(value_params[ii], pi, cfg.mc_draws, hook_rng);
                    double x = 0.0;
                    for (int t = 0; t < cfg.burn_in + cfg.mu_samples; ++t) {
                        x = std::max(x, ev.level) - sample_predictive(pi, hook_rng);
                        if (t >= cfg.burn_in) {
                            const auto s = static_cast<std::size_t>(t - cfg.burn_in);
                            states[s][ii] = x;
                            vstar[s] += ev.constant - cvec[ii] * x;
                        }
                    }
                }
                trace.gap.emplace_back();
            }
            double g = 0.0;
            for (std::size_t s = 0; s < states.size(); ++s) {
                g += vstar[s] - evaluate_lb(cuts, states[s]).first;
            }
            trace.gap.back().push_back(g / static_cast<double>(states.size()));
        };

        EbocConfig ec;
        ec.episodes = cfg.episodes;
        ec.iters = cfg.iters;
        ec.k1 = cfg.k1;
        ec.k2 = cfg.k2;
        ec.horizon = cfg.horizon;
        ec.warm_start = warm;
        ec.iter_hook = hook;
        const RunResult rr = run_eboc(problem, posterior, means, ec, run_rng);
        trace.reused_fraction.reserve(rr.episodes.size());
        for (const auto& er : rr.episodes) trace.reused_fraction.push_back(er.reused_cut_fraction);
    }

    std::string csv = "variant,episode,iteration,gap\n";
    std::string reuse = "variant,episode,reused_fraction\n";
    for (int variant = 0; variant < 2; ++variant) {
        const bool warm = variant == 0;
        const GapTrace& trace = warm ? out.warm : out.cold;
        const std::string label = warm ? "warm" : "cold";
        for (std::size_t e = 0; e < trace.gap.size(); ++e) {
            for (std::size_t k = 0; k < trace.gap[e].size(); ++k) {
                csv += label + "," + fmt(static_cast<double>(e + 1)) + "," +
                       fmt(static_cast<double>(k + 1)) + "," + fmt(trace.gap[e][k]) + "\n";
            }
        }
        for (std::size_t e = 0; e < trace.reused_fraction.size(); ++e) {
            reuse += label + "," + fmt(static_cast<double>(e + 1)) + "," +
                     fmt(trace.reused_fraction[e]) + "\n";
        }
    }
    emit_table(cfg.out_dir, "sddp_gap_trace", csv);
    emit_table(cfg.out_dir, "sddp_gap_reuse", reuse);
    return out;
}

CompareResult run_compare(const ExperimentConfig& cfg) {
    if (cfg.kind != "compare") throw ConfigError("run_compare: wrong config kind");
    const InventoryParams params = make_inventory_params(
        cfg.c, cfg.h, cfg.b, cfg.gamma, {DemandKind::Poisson, cfg.theta_star, {}});
    const int iters = cfg.iters;
    const int reps = cfg.replications;
    const std::vector<std::string> labels = {"eboc_n5", "eboc_n2", "lazy_psrl", "drsc"};
    constexpr int kAlgs = 4;

    auto grid = [&] {
        return std::vector<std::vector<double>>(static_cast<std::size_t>(reps),
                                                std::vector<double>(static_cast<std::size_t>(iters)));
    };
    std::vector<std::vector<std::vector<double>>> regrets(kAlgs, grid());
    std::vector<std::vector<std::vector<double>>> levels(kAlgs, grid());
    std::vector<std::vector<std::vector<double>>> visited(kAlgs, grid());

    const Rng root(cfg.seed);
    parallel_for(reps, cfg.workers, [&](int r) {
        const auto rr = static_cast<std::size_t>(r);
        const Rng rep_rng = root.substream(static_cast<std::uint64_t>(r));
        Rng demand_rng = rep_rng.substream(0); // common random numbers
        Rng rng5 = rep_rng.substream(1);
        Rng rng2 = rep_rng.substream(2);
        Rng rng_lazy = rep_rng.substream(3);

        std::vector<double> init(static_cast<std::size_t>(cfg.initial_data));
        for (auto& d : init) d = static_cast<double>(demand_rng.poisson(cfg.theta_star));
        PosteriorState post =
            make_prior(ConjugateFamily::GammaPoisson, cfg.prior_alpha, cfg.prior_beta);
        post = update_posterior(post, init);
        PosteriorState lazy_anchor = post;

        PolicyLevel policy[kAlgs];
        double x[kAlgs] = {0.0, 0.0, 0.0, 0.0};
        for (int t = 1; t <= iters; ++t) {
            // One shared re-plan cadence for all algorithms: either a fixed
            // period or the posterior-variance-halving trigger.
            const bool replan = cfg.schedule == "constant"
                                    ? (t - 1) % cfg.horizon == 0
                                    : t == 1 || lazy_psrl_should_recompute(post, lazy_anchor);
            if (replan) {
                policy[0] = eboc_quantile_policy(post, params, 5, cfg.quantile_mc, rng5);
                policy[1] = eboc_quantile_policy(post, params, 2, cfg.quantile_mc, rng2);
                policy[2] = lazy_psrl_policy(post, params, rng_lazy);
                const double theta_hat =
                    post.n_obs > 0 ? post.data_sum / static_cast<double>(post.n_obs) : 0.0;
                policy[3] = drsc_policy(theta_hat, t, params);
                lazy_anchor = post;
            }

            const auto tt = static_cast<std::size_t>(t - 1);
            for (int a = 0; a < kAlgs; ++a) {
                regrets[static_cast<std::size_t>(a)][rr][tt] =
                    regret(policy[a], x[a], cfg.theta_star, params);
                levels[static_cast<std::size_t>(a)][rr][tt] = policy[a].level;
                visited[static_cast<std::size_t>(a)][rr][tt] = x[a];
            }
            const auto d = static_cast<double>(demand_rng.poisson(cfg.theta_star));
            for (int a = 0; a < kAlgs; ++a) x[a] = std::max(x[a], policy[a].level) - d;
            post = update_posterior(post, {d});
        }
    });

    CompareResult out;
    std::vector<double> column(static_cast<std::size_t>(reps));
    for (int a = 0; a < kAlgs; ++a) {
        RegretCurve curve;
        curve.mean.resize(static_cast<std::size_t>(iters));
        curve.ci_half.resize(static_cast<std::size_t>(iters));
        for (int t = 0; t < iters; ++t) {
            for (int r = 0; r < reps; ++r) {
                column[static_cast<std::size_t>(r)] =
                    regrets[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)]
                           [static_cast<std::size_t>(t)];
            }
            const MeanStderr ms = mean_stderr(column);
            curve.mean[static_cast<std::size_t>(t)] = ms.mean;
            curve.ci_half[static_cast<std::size_t>(t)] = 1.96 * ms.stderr_;
        }
        out.curves[labels[static_cast<std::size_t>(a)]] = std::move(curve);
        out.per_replication[labels[static_cast<std::size_t>(a)]] =
            regrets[static_cast<std::size_t>(a)];
    }

    if (!cfg.out_dir.empty()) {
        std::string trace = "replication,t,algorithm,level,state,regret\n";
        for (int r = 0; r < reps; ++r) {
            for (int t = 0; t < iters; ++t) {
                for (int a = 0; a < kAlgs; ++a) {
                    const auto aa = static_cast<std::size_t>(a);
                    const auto rrr = static_cast<std::size_t>(r);
                    const auto tt = static_cast<std::size_t>(t);
                    trace += fmt(r) + "," + fmt(t + 1) + "," + labels[aa] + "," +
                             fmt(levels[aa][rrr][tt]) + "," + fmt(visited[aa][rrr][tt]) + "," +
                             fmt(regrets[aa][rrr][tt]) + "\n";
                }
            }
        }
        emit_table(cfg.out_dir, "compare_trace", trace);
        std::string summary = "t,algorithm,mean_regret,ci_half\n";
        for (int t = 0; t < iters; ++t) {
            for (const auto& label : labels) {
                const RegretCurve& curve = out.curves[label];
                summary += fmt(t + 1) + "," + label + "," +
                           fmt(curve.mean[static_cast<std::size_t>(t)]) + "," +
                           fmt(curve.ci_half[static_cast<std::size_t>(t)]) + "\n";
            }
        }
        emit_table(cfg.out_dir, "compare_summary", summary);
    }
    return out;
}

} // namespace eboc
