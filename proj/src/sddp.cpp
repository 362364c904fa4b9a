#include "eboc/sddp.hpp"

#include "eboc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eboc {

namespace {

struct ScenarioData {
    std::vector<AffineMap> maps;
    std::vector<Vec> xis;
    std::vector<double> weights; // batch weights (likelihood ratios)
};

ScenarioData expand_batch(const ControlProblem& problem, const JointBatch& batch) {
    ScenarioData data;
    const std::size_t m = batch.size();
    data.maps.reserve(m);
    data.xis.reserve(m);
    data.weights.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        data.xis.push_back(batch.scenario(j));
        data.maps.push_back(problem.dynamics.map(data.xis.back()));
        data.weights.push_back(batch.weight(j));
    }
    return data;
}

Vec at_transpose_times(const Mat& a, const Vec& v) {
    // a^T v for row-major a.
    Vec out(a.empty() ? 0 : a.front().size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += a[i][k] * v[i];
    }
    return out;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

StageSolution solve_stage_subproblem(const ControlProblem& problem, const Vec& xbar,
                                     const CutSet& cuts, const JointBatch& batch) {
    if (batch.size() == 0) throw std::invalid_argument("solve_stage_subproblem: empty batch");
    if (cuts.empty()) throw std::logic_error("solve_stage_subproblem: empty cut set");
    const auto M = batch.size();
    const int m = problem.control_dim;
    const auto nblocks = problem.cost.blocks.size();
    const double inv_m = 1.0 / static_cast<double>(M);
    const ScenarioData data = expand_batch(problem, batch);

    // Variable layout: controls, then one epigraph per (scenario, cost
    // block), then one value epigraph per scenario.
    const int t_off = m;
    const int z_off = m + static_cast<int>(M * nblocks);
    const int nv = z_off + static_cast<int>(M);
    LinearProgram lp(nv);
    for (int k = 0; k < m; ++k) {
        lp.set_bounds(k, problem.controls.lower[static_cast<std::size_t>(k)],
                      problem.controls.upper[static_cast<std::size_t>(k)]);
    }
    for (std::size_t j = 0; j < M; ++j) {
        const double wj = data.weights[j] * inv_m;
        for (std::size_t blk = 0; blk < nblocks; ++blk) {
            lp.objective[static_cast<std::size_t>(t_off) + j * nblocks + blk] = wj;
        }
        lp.objective[static_cast<std::size_t>(z_off) + j] = problem.gamma * wj;
    }

    struct RowTag {
        std::size_t scenario;
        std::size_t block; // cost rows
        std::size_t piece;
        std::size_t cut;  // value rows
        bool is_value_row;
    };
    std::vector<RowTag> tags;
    auto add_cost_row = [&](std::size_t j, std::size_t blk, std::size_t p) {
        const CostPiece& piece = problem.cost.blocks[blk].pieces[p];
        std::vector<std::pair<int, double>> entries;
        entries.reserve(piece.on_u.size() + 1);
        entries.emplace_back(t_off + static_cast<int>(j * nblocks + blk), 1.0);
        for (std::size_t k = 0; k < piece.on_u.size(); ++k) {
            if (piece.on_u[k] != 0.0) entries.emplace_back(static_cast<int>(k), -piece.on_u[k]);
        }
        const double rhs = dot(piece.on_x, xbar) + dot(piece.on_xi, data.xis[j]) + piece.constant;
        lp.add_row_sparse(entries, RowSense::GE, rhs);
        tags.push_back({j, blk, p, 0, false});
    };
    auto add_value_row = [&](std::size_t j, std::size_t cut_index) {
        const Cut& cut = cuts.cuts[cut_index];
        const Vec bt_alpha = at_transpose_times(data.maps[j].B, cut.alpha);
        std::vector<std::pair<int, double>> entries;
        entries.reserve(bt_alpha.size() + 1);
        entries.emplace_back(z_off + static_cast<int>(j), 1.0);
        for (std::size_t k = 0; k < bt_alpha.size(); ++k) {
            if (bt_alpha[k] != 0.0) entries.emplace_back(static_cast<int>(k), -bt_alpha[k]);
        }
        double rhs = cut.beta + dot(cut.alpha, data.maps[j].b);
        for (std::size_t i = 0; i < cut.alpha.size(); ++i) {
            rhs += cut.alpha[i] * dot(data.maps[j].A[i], xbar);
        }
        lp.add_row_sparse(entries, RowSense::GE, rhs);
        tags.push_back({j, 0, 0, cut_index, true});
    };

    for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t blk = 0; blk < nblocks; ++blk) {
            for (std::size_t p = 0; p < problem.cost.blocks[blk].pieces.size(); ++p) {
                add_cost_row(j, blk, p);
            }
        }
    }
    for (const auto& row : problem.controls.base) {
        std::vector<std::pair<int, double>> entries;
        for (std::size_t k = 0; k < row.on_u.size(); ++k) {
            entries.emplace_back(static_cast<int>(k), row.on_u[k]);
        }
        lp.add_row_sparse(entries, RowSense::LE, row.rhs);
        tags.push_back({0, 0, 0, 0, false});
    }
    for (const auto& row : problem.controls.joint) {
        std::vector<std::pair<int, double>> entries;
        for (std::size_t k = 0; k < row.on_u.size(); ++k) {
            entries.emplace_back(static_cast<int>(k), row.on_u[k]);
        }
        lp.add_row_sparse(entries, RowSense::LE, row.rhs - dot(row.on_x, xbar));
        tags.push_back({0, 0, 0, 0, false});
    }

    // Seed value rows: the cut active at the zero-order image, plus cut 0 so
    // every epigraph variable is bounded from the start.
    Vec u_ref(static_cast<std::size_t>(m), 0.0);
    for (int k = 0; k < m; ++k) {
        const double lo = problem.controls.lower[static_cast<std::size_t>(k)];
        const double hi = problem.controls.upper[static_cast<std::size_t>(k)];
        u_ref[static_cast<std::size_t>(k)] = std::clamp(0.0, lo, hi);
    }
    std::vector<std::vector<std::size_t>> rows_present(M);
    for (std::size_t j = 0; j < M; ++j) {
        const Vec image = apply_map(data.maps[j], xbar, u_ref);
        const std::size_t active = evaluate_lb(cuts, image).second;
        rows_present[j].push_back(active);
        add_value_row(j, active);
        if (active != 0) {
            rows_present[j].push_back(0);
            add_value_row(j, 0);
        }
    }

    LpSolution sol;
    std::vector<Vec> images(M);
    for (int pass = 0;; ++pass) {
        if (pass > 60) {
            throw std::runtime_error("solve_stage_subproblem: value-row generation did not settle");
        }
        sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) {
            throw std::runtime_error(
                "solve_stage_subproblem: LP infeasible; control polytope certification is stale");
        }
        if (sol.status == LpStatus::Unbounded) {
            throw std::runtime_error(
                "solve_stage_subproblem: LP unbounded; the initial cut set underestimates too "
                "weakly for the control cap");
        }
        Vec u(sol.primal.begin(), sol.primal.begin() + m);
        bool added = false;
        for (std::size_t j = 0; j < M; ++j) {
            images[j] = apply_map(data.maps[j], xbar, u);
            const auto [value, index] = evaluate_lb(cuts, images[j]);
            const double zj = sol.primal[static_cast<std::size_t>(z_off) + j];
            if (value > zj + 1e-7 * (1.0 + std::fabs(value))) {
                if (std::find(rows_present[j].begin(), rows_present[j].end(), index) ==
                    rows_present[j].end()) {
                    rows_present[j].push_back(index);
                    add_value_row(j, index);
                    added = true;
                }
            }
        }
        if (!added) break;
    }

    StageSolution out;
    out.u.assign(sol.primal.begin(), sol.primal.begin() + m);
    out.value = sol.objective_value;
    out.next_states = std::move(images);

    if (problem.assert_control_cap) {
        for (int k = 0; k < m; ++k) {
            const double hi = problem.controls.upper[static_cast<std::size_t>(k)];
            if (std::isfinite(hi) && out.u[static_cast<std::size_t>(k)] > hi - 1e-6 * (1.0 + hi)) {
                throw std::runtime_error(
                    "solve_stage_subproblem: optimal control reached the safety cap; the cap "
                    "must stay inactive");
            }
        }
    }

    // Subgradient, chain-rule route: x-slopes of the active cost pieces plus
    // discounted A^T alpha of the cut active at each image. Ties need care.
    // The minimizer of a sample average typically sits on a kink shared by two
    // cost pieces of one scenario, and warm-started cut sets routinely send an
    // image through a point where several cuts touch; in either case only a
    // dual-weighted mix of the tied slopes is a valid subgradient. For a
    // uniquely active row the multiplier is pinned by column balance on its
    // epigraph variable (w_j/M for a cost piece, gamma w_j/M for a cut), so
    // the cost term is read from the cost-row multipliers and the value term
    // from the model slope when the touching cut is unique, falling back to
    // the value-row multipliers when it is not.
    const auto n = static_cast<std::size_t>(problem.state_dim);
    out.subgrad.assign(n, 0.0);
    {
        std::size_t r = 0;
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t blk = 0; blk < nblocks; ++blk) {
                for (std::size_t p = 0; p < problem.cost.blocks[blk].pieces.size(); ++p, ++r) {
                    const double y = sol.duals[r];
                    if (y == 0.0) continue;
                    const Vec& on_x = problem.cost.blocks[blk].pieces[p].on_x;
                    for (std::size_t k = 0; k < on_x.size(); ++k) out.subgrad[k] += y * on_x[k];
                }
            }
        }
        r += problem.controls.base.size();
        for (const auto& row : problem.controls.joint) {
            const double y = sol.duals[r++];
            if (y == 0.0) continue;
            for (std::size_t k = 0; k < row.on_x.size(); ++k) {
                out.subgrad[k] -= y * row.on_x[k];
            }
        }
    }
    {
        std::vector<double> zmass(M, 0.0);
        std::vector<Vec> zmix(M, Vec(n, 0.0));
        for (std::size_t r = 0; r < tags.size(); ++r) {
            if (!tags[r].is_value_row) continue;
            const double y = sol.duals[r];
            if (y == 0.0) continue;
            zmass[tags[r].scenario] += y;
            const Vec at_alpha =
                at_transpose_times(data.maps[tags[r].scenario].A, cuts.cuts[tags[r].cut].alpha);
            for (std::size_t k = 0; k < n; ++k) zmix[tags[r].scenario][k] += y * at_alpha[k];
        }
        for (std::size_t j = 0; j < M; ++j) {
            const double wj = problem.gamma * data.weights[j] * inv_m;
            const auto [best, index] = evaluate_lb(cuts, out.next_states[j]);
            const double tie_tol = 1e-7 * (1.0 + std::fabs(best));
            std::size_t touching = 0;
            for (const Cut& c : cuts.cuts) {
                if (cut_value(c, out.next_states[j]) >= best - tie_tol) ++touching;
            }
            if (touching <= 1) {
                const Vec at_alpha = at_transpose_times(data.maps[j].A, cuts.cuts[index].alpha);
                for (std::size_t k = 0; k < n; ++k) out.subgrad[k] += wj * at_alpha[k];
            } else {
                if (std::fabs(zmass[j] - wj) > 1e-6 * (1.0 + wj)) {
                    throw std::runtime_error(
                        "solve_stage_subproblem: value-row duals violate column balance");
                }
                for (std::size_t k = 0; k < n; ++k) out.subgrad[k] += zmix[j][k];
            }
        }
    }

    // Same quantity from the duals: each row's multiplier times that row's
    // right-hand-side slope in xbar.
    out.subgrad_dual.assign(n, 0.0);
    {
        std::size_t r = 0;
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t blk = 0; blk < nblocks; ++blk) {
                for (std::size_t p = 0; p < problem.cost.blocks[blk].pieces.size(); ++p, ++r) {
                    const double y = sol.duals[r];
                    if (y == 0.0) continue;
                    const Vec& on_x = problem.cost.blocks[blk].pieces[p].on_x;
                    for (std::size_t k = 0; k < on_x.size(); ++k) {
                        out.subgrad_dual[k] += y * on_x[k];
                    }
                }
            }
        }
        r += problem.controls.base.size();
        for (const auto& row : problem.controls.joint) {
            const double y = sol.duals[r++];
            if (y == 0.0) continue;
            for (std::size_t k = 0; k < row.on_x.size(); ++k) {
                out.subgrad_dual[k] -= y * row.on_x[k];
            }
        }
        for (; r < tags.size(); ++r) {
            const double y = sol.duals[r];
            if (y == 0.0) continue;
            const Vec at_alpha =
                at_transpose_times(data.maps[tags[r].scenario].A, cuts.cuts[tags[r].cut].alpha);
            for (std::size_t k = 0; k < n; ++k) out.subgrad_dual[k] += y * at_alpha[k];
        }
    }

    double gscale = 1.0;
    for (std::size_t k = 0; k < n; ++k) gscale = std::max(gscale, std::fabs(out.subgrad[k]));
    for (std::size_t k = 0; k < n; ++k) {
        if (std::fabs(out.subgrad[k] - out.subgrad_dual[k]) > 1e-6 * gscale) {
            throw std::runtime_error(
                "solve_stage_subproblem: chain-rule and dual subgradients disagree");
        }
    }
    return out;
}

IterationResult sddp_iteration(const ControlProblem& problem, const Vec& xbar, CutSet& cuts,
                               const JointBatch& batch, Rng& rng, int episode_tag) {
    StageSolution sol = solve_stage_subproblem(problem, xbar, cuts, batch);
    Cut cut;
    cut.alpha = sol.subgrad;
    cut.beta = sol.value - dot(sol.subgrad, xbar);
    cut.episode = episode_tag;
    cuts.append(cut);
    const std::size_t j = rng.uniform_index(batch.size());
    return {std::move(cut), sol.next_states[j], j};
}

int truncation_horizon(double gamma, double kappa_bound, double eps) {
    if (gamma <= 0.0 || gamma >= 1.0 || kappa_bound <= 0.0 || eps <= 0.0) {
        throw std::invalid_argument("truncation_horizon: need gamma in (0,1), positive bounds");
    }
    const double ratio = eps * (1.0 - gamma) / kappa_bound;
    if (ratio >= 1.0) return 1;
    // Back off a hair so exact-integer logs do not round up.
    const double t = std::log(ratio) / std::log(gamma);
    const int horizon = static_cast<int>(std::ceil(t - 1e-12));
    return std::max(horizon, 1);
}

PolicyEvalResult evaluate_policy(const ControlProblem& problem, const CutSet& cuts, const Vec& x1,
                                 const std::function<Vec(Rng&)>& xi_sampler,
                                 const JointBatch& control_batch, int T, Rng& rng, int reps) {
    if (T < 1 || reps < 1) throw std::invalid_argument("evaluate_policy: T and reps must be >= 1");
    std::vector<double> totals(static_cast<std::size_t>(reps), 0.0);
    for (int rep = 0; rep < reps; ++rep) {
        Vec x = x1;
        double discount = 1.0;
        double total = 0.0;
        for (int t = 0; t < T; ++t) {
            const StageSolution sol = solve_stage_subproblem(problem, x, cuts, control_batch);
            const Vec xi = xi_sampler(rng);
            total += discount * stage_cost(problem, x, sol.u, xi);
            x = step(problem, x, sol.u, xi);
            discount *= problem.gamma;
        }
        totals[static_cast<std::size_t>(rep)] = total;
    }
    double mean = 0.0;
    for (double v : totals) mean += v;
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (double v : totals) ss += (v - mean) * (v - mean);
    const double stderr_ =
        reps > 1 ? std::sqrt(ss / (static_cast<double>(reps - 1) * static_cast<double>(reps)))
                 : 0.0;
    return {mean, stderr_};
}

PolicyEvalResult evaluate_policy(const ControlProblem& problem, const CutSet& cuts, const Vec& x1,
                                 const JointBatch& batch, int T, Rng& rng, int reps) {
    auto sampler = [&batch](Rng& r) { return batch.scenario(r.uniform_index(batch.size())); };
    return evaluate_policy(problem, cuts, x1, sampler, batch, T, rng, reps);
}

double cut_validity_margin(const ControlProblem& problem, const Cut& cut,
                           const std::vector<PosteriorState>& old_post,
                           const std::vector<PosteriorState>& new_post, const JointBatch& batch) {
    const auto M = batch.size();
    if (M == 0) throw std::invalid_argument("cut_validity_margin: empty batch");
    const auto n = static_cast<std::size_t>(problem.state_dim);
    const int m = problem.control_dim;
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(problem.state_box_lo[k]) || !std::isfinite(problem.state_box_hi[k])) {
            throw std::runtime_error("cut_validity_margin: working state box must be bounded");
        }
    }
    const double inv_m = 1.0 / static_cast<double>(M);
    const ScenarioData data = expand_batch(problem, batch);
    const auto nblocks = problem.cost.blocks.size();

    const std::vector<double> lr = joint_likelihood_ratios(batch, old_post, new_post);

    // Variables: state x in the working box, control u, cost epigraphs.
    const int x_off = 0;
    const int u_off = static_cast<int>(n);
    const int t_off = u_off + m;
    const int nv = t_off + static_cast<int>(M * nblocks);
    LinearProgram lp(nv);
    for (std::size_t k = 0; k < n; ++k) {
        lp.set_bounds(x_off + static_cast<int>(k), problem.state_box_lo[k],
                      problem.state_box_hi[k]);
    }
    for (int k = 0; k < m; ++k) {
        lp.set_bounds(u_off + k, problem.controls.lower[static_cast<std::size_t>(k)],
                      problem.controls.upper[static_cast<std::size_t>(k)]);
    }

    // Objective: weighted epigraph average plus the affine image term
    // gamma * l(F(x,u,xi_j)), minus l(x).
    double constant = -cut.beta;
    for (std::size_t j = 0; j < M; ++j) {
        const double wj = lr[j] * data.weights[j] * inv_m;
        for (std::size_t blk = 0; blk < nblocks; ++blk) {
            lp.objective[static_cast<std::size_t>(t_off) + j * nblocks + blk] = wj;
        }
        const Vec at_alpha = at_transpose_times(data.maps[j].A, cut.alpha);
        const Vec bt_alpha = at_transpose_times(data.maps[j].B, cut.alpha);
        for (std::size_t k = 0; k < n; ++k) {
            lp.objective[static_cast<std::size_t>(x_off) + k] += wj * problem.gamma * at_alpha[k];
        }
        for (int k = 0; k < m; ++k) {
            lp.objective[static_cast<std::size_t>(u_off + k)] +=
                wj * problem.gamma * bt_alpha[static_cast<std::size_t>(k)];
        }
        constant += wj * problem.gamma * (dot(cut.alpha, data.maps[j].b) + cut.beta);
    }
    for (std::size_t k = 0; k < n; ++k) {
        lp.objective[static_cast<std::size_t>(x_off) + k] -= cut.alpha[k];
    }

    for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t blk = 0; blk < nblocks; ++blk) {
            for (std::size_t p = 0; p < problem.cost.blocks[blk].pieces.size(); ++p) {
                const CostPiece& piece = problem.cost.blocks[blk].pieces[p];
                std::vector<std::pair<int, double>> entries;
                entries.emplace_back(t_off + static_cast<int>(j * nblocks + blk), 1.0);
                for (std::size_t k = 0; k < n; ++k) {
                    if (piece.on_x[k] != 0.0) {
                        entries.emplace_back(x_off + static_cast<int>(k), -piece.on_x[k]);
                    }
                }
                for (int k = 0; k < m; ++k) {
                    const double c = piece.on_u[static_cast<std::size_t>(k)];
                    if (c != 0.0) entries.emplace_back(u_off + k, -c);
                }
                lp.add_row_sparse(entries, RowSense::GE,
                                  dot(piece.on_xi, data.xis[j]) + piece.constant);
            }
        }
    }
    for (const auto& row : problem.controls.base) {
        std::vector<std::pair<int, double>> entries;
        for (std::size_t k = 0; k < row.on_u.size(); ++k) {
            entries.emplace_back(u_off + static_cast<int>(k), row.on_u[k]);
        }
        lp.add_row_sparse(entries, RowSense::LE, row.rhs);
    }
    for (const auto& row : problem.controls.joint) {
        std::vector<std::pair<int, double>> entries;
        for (std::size_t k = 0; k < row.on_u.size(); ++k) {
            entries.emplace_back(u_off + static_cast<int>(k), row.on_u[k]);
        }
        for (std::size_t k = 0; k < row.on_x.size(); ++k) {
            entries.emplace_back(x_off + static_cast<int>(k), row.on_x[k]);
        }
        lp.add_row_sparse(entries, RowSense::LE, row.rhs);
    }

    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::Unbounded) {
        throw std::runtime_error("cut_validity_margin: LP unbounded over the working box");
    }
    if (sol.status == LpStatus::Infeasible) {
        throw std::runtime_error("cut_validity_margin: LP infeasible (box or controls empty)");
    }
    return sol.objective_value + constant;
}

bool cut_validity_check(const ControlProblem& problem, const Cut& cut,
                        const std::vector<PosteriorState>& old_post,
                        const std::vector<PosteriorState>& new_post, const JointBatch& batch) {
    return cut_validity_margin(problem, cut, old_post, new_post, batch) >= -kCutValidTol;
}

Cut initial_cut(const ControlProblem& problem, int episode_tag) {
    Cut cut;
    cut.alpha.assign(static_cast<std::size_t>(problem.state_dim), 0.0);
    cut.beta = problem.cost_min / (1.0 - problem.gamma);
    cut.episode = episode_tag;
    return cut;
}

WarmStartResult warm_start_cuts(const ControlProblem& problem, const CutSet& prev,
                                const std::vector<PosteriorState>& old_post,
                                const std::vector<PosteriorState>& new_post,
                                const JointBatch& batch, int episode_tag) {
    WarmStartResult out;
    out.cuts.append(initial_cut(problem, episode_tag));
    std::size_t accepted = 0;
    for (const auto& cut : prev.cuts) {
        if (cut_validity_check(problem, cut, old_post, new_post, batch)) {
            out.cuts.append(cut);
            ++accepted;
        }
    }
    out.reused_fraction =
        prev.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(prev.size());
    return out;
}

double subsolution_margin(const ControlProblem& problem, const CutSet& cuts,
                          const JointBatch& batch, const std::vector<Vec>& grid_states) {
    double margin = kInf;
    for (const auto& x : grid_states) {
        const StageSolution sol = solve_stage_subproblem(problem, x, cuts, batch);
        margin = std::min(margin, sol.value - evaluate_lb(cuts, x).first);
    }
    return margin;
}

namespace {

Vec draw_true_disturbance(const std::vector<PosteriorState>& posterior, const Vec& true_theta,
                          Rng& rng) {
    Vec xi(posterior.size());
    for (std::size_t i = 0; i < posterior.size(); ++i) {
        if (posterior[i].family == ConjugateFamily::GammaExponential) {
            xi[i] = rng.exponential(true_theta[i]);
        } else {
            xi[i] = static_cast<double>(rng.poisson(true_theta[i]));
        }
    }
    return xi;
}

} // namespace

RunResult run_eboc(const ControlProblem& problem, std::vector<PosteriorState> posterior,
                   const Vec& true_theta, const EbocConfig& config, Rng& rng) {
    if (config.iters < 1 || config.k1 < 1 || config.k2 < 1 || config.episodes < 1) {
        throw std::invalid_argument("run_eboc: episodes, iters, k1, k2 must be >= 1");
    }
    if (posterior.size() != true_theta.size()) {
        throw std::invalid_argument("run_eboc: posterior chains and true_theta sizes differ");
    }
    RunResult out;
    Vec x_real = config.x0.empty() ? Vec(static_cast<std::size_t>(problem.state_dim), 0.0)
                                   : config.x0;
    CutSet cuts;
    cuts.append(initial_cut(problem, 0));
    std::vector<PosteriorState> prev_posterior;
    CutSet prev_cuts;
    JointBatch validity_batch;

    for (int e = 1; e <= config.episodes; ++e) {
        EpisodeResult er;
        if (e > 1) {
            if (config.warm_start) {
                WarmStartResult ws = warm_start_cuts(problem, prev_cuts, prev_posterior, posterior,
                                                     validity_batch, e);
                cuts = std::move(ws.cuts);
                er.reused_cut_fraction = ws.reused_fraction;
            } else {
                cuts = CutSet{};
                cuts.append(initial_cut(problem, e));
                er.reused_cut_fraction = 0.0;
            }
        }
        er.posterior = posterior;
        er.x0 = x_real;

        Vec trial = x_real;
        JointBatch batch;
        if (config.fixed_batch) batch = sample_joint_scenarios(posterior, rng, config.k1, config.k2);
        for (int k = 0; k < config.iters; ++k) {
            if (!config.fixed_batch) {
                batch = sample_joint_scenarios(posterior, rng, config.k1, config.k2);
            }
            er.trial_points.push_back(trial);
            IterationResult it = sddp_iteration(problem, trial, cuts, batch, rng, e);
            er.lb_at_x0.push_back(evaluate_lb(cuts, er.x0).first);
            if (config.iter_hook) config.iter_hook(e, er.posterior, k, cuts);
            trial = std::move(it.next_state);
            if (config.lb_stall_tol > 0.0 && er.lb_at_x0.size() >= 2) {
                const auto last = er.lb_at_x0.size() - 1;
                if (er.lb_at_x0[last] - er.lb_at_x0[last - 1] < config.lb_stall_tol) break;
            }
        }
        if (config.eval_reps > 0) {
            const int T = truncation_horizon(problem.gamma, problem.cost_bound, config.eval_eps);
            er.policy_value =
                evaluate_policy(problem, cuts, er.x0, batch, T, rng, config.eval_reps);
        }

        // Exercise the learned policy against the true disturbances and
        // absorb the observations.
        std::vector<std::vector<double>> fresh(posterior.size());
        for (int t = 0; t < config.horizon; ++t) {
            const StageSolution sol = solve_stage_subproblem(problem, x_real, cuts, batch);
            out.exercised_states.push_back(x_real);
            if (config.regret_fn && problem.state_dim == 1) {
                out.regret.push_back(config.regret_fn(x_real[0], x_real[0] + sol.u[0]));
            }
            const Vec xi = draw_true_disturbance(posterior, true_theta, rng);
            for (std::size_t i = 0; i < xi.size(); ++i) fresh[i].push_back(xi[i]);
            x_real = step(problem, x_real, sol.u, xi);
        }
        er.cuts = cuts;
        er.last_batch = batch;
        prev_posterior = posterior;
        for (std::size_t i = 0; i < posterior.size(); ++i) {
            posterior[i] = update_posterior(posterior[i], fresh[i]);
        }
        prev_cuts = cuts;
        validity_batch = er.last_batch;
        out.episodes.push_back(std::move(er));
    }
    out.posterior_final = std::move(posterior);
    return out;
}

} // namespace eboc
