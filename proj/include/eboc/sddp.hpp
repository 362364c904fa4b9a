// Infinite-horizon SDDP over the sample-average Bellman operator, with
// episodic warm starts: stage subproblems as LPs, subgradient cuts, truncated
// policy evaluation, likelihood-ratio cut-validity checks, and the outer
// episodic loop.
#pragma once

#include "eboc/bayes.hpp"
#include "eboc/control.hpp"
#include "eboc/cuts.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace eboc {

struct StageSolution {
    Vec u;
    double value = 0.0;
    Vec subgrad;      // chain-rule subgradient from active pieces and cuts
    Vec subgrad_dual; // same quantity via LP row duals; must agree to 1e-6
    std::vector<Vec> next_states; // scenario images A_j x + B_j u + b_j
};

// Minimizes the weighted sample average of stage cost plus discounted cut
// value over feasible controls at state xbar. One LP in (u, cost epigraphs,
// value epigraphs); value rows are generated lazily, which changes nothing
// about the optimum or the duals of the remaining rows.
StageSolution solve_stage_subproblem(const ControlProblem& problem, const Vec& xbar,
                                     const CutSet& cuts, const JointBatch& batch);

struct IterationResult {
    Cut cut;
    Vec next_state;
    std::size_t scenario_index = 0;
};

// One SDDP pass: cut at xbar appended to cuts, next trial state simulated
// from a uniformly drawn scenario.
IterationResult sddp_iteration(const ControlProblem& problem, const Vec& xbar, CutSet& cuts,
                               const JointBatch& batch, Rng& rng, int episode_tag = 0);

// Smallest horizon T (at least 1) with gamma^T kappa_bound / (1 - gamma)
// below eps.
int truncation_horizon(double gamma, double kappa_bound, double eps);

struct PolicyEvalResult {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Simulates `reps` truncated trajectories of the cut-set policy: at each
// step the control solves the stage subproblem on `control_batch`, the
// disturbance comes from `xi_sampler`, and discounted stage costs accrue for
// T steps.
PolicyEvalResult evaluate_policy(const ControlProblem& problem, const CutSet& cuts, const Vec& x1,
                                 const std::function<Vec(Rng&)>& xi_sampler,
                                 const JointBatch& control_batch, int T, Rng& rng, int reps);

// Overload driving the trajectory with uniform draws from the batch itself.
PolicyEvalResult evaluate_policy(const ControlProblem& problem, const CutSet& cuts, const Vec& x1,
                                 const JointBatch& batch, int T, Rng& rng, int reps);

inline constexpr double kCutValidTol = 1e-6;

// Minimum over the working state box and feasible controls of
//   (1/M) sum_j w_j [c(x,u,xi_j) + gamma * l(F(x,u,xi_j))] - l(x),
// with w_j the posterior likelihood ratios at the batch's theta draws. The
// cut remains a valid lower bound under the reweighted operator iff this is
// >= -kCutValidTol.
double cut_validity_margin(const ControlProblem& problem, const Cut& cut,
                           const std::vector<PosteriorState>& old_post,
                           const std::vector<PosteriorState>& new_post, const JointBatch& batch);

bool cut_validity_check(const ControlProblem& problem, const Cut& cut,
                        const std::vector<PosteriorState>& old_post,
                        const std::vector<PosteriorState>& new_post, const JointBatch& batch);

struct WarmStartResult {
    CutSet cuts;                // initialization cut plus every accepted cut
    double reused_fraction = 0; // accepted / previous size
};

// Filters the previous episode's cuts through cut_validity_check one by one.
// Individually valid cuts stay jointly valid for the reweighted operator, so
// the returned set is a usable lower approximation for the new episode.
WarmStartResult warm_start_cuts(const ControlProblem& problem, const CutSet& prev,
                                const std::vector<PosteriorState>& old_post,
                                const std::vector<PosteriorState>& new_post,
                                const JointBatch& batch, int episode_tag);

// The constant seed cut cost_min / (1 - gamma).
Cut initial_cut(const ControlProblem& problem, int episode_tag = 0);

// min over grid states of T(V)(x) - V(x) where T is the weighted
// sample-average operator for `batch` and V the cut-set max; nonnegative
// means V is a subsolution on the grid.
double subsolution_margin(const ControlProblem& problem, const CutSet& cuts,
                          const JointBatch& batch, const std::vector<Vec>& grid_states);

struct EbocConfig {
    int episodes = 1;
    int iters = 30; // SDDP iterations per episode
    // When positive, an episode stops early once the lower bound at x0
    // improves by less than this between consecutive iterations.
    double lb_stall_tol = 0.0;
    int k1 = 100;   // theta draws per batch
    int k2 = 1;     // conditional draws per theta
    int horizon = 1; // observations gathered per episode
    bool warm_start = true;
    // One batch per episode instead of a fresh batch per iteration; makes
    // the episode's discretized problem a fixed object that value-iteration
    // oracles can match exactly.
    bool fixed_batch = false;
    int eval_reps = 0;      // policy-evaluation replications (0 = skip)
    double eval_eps = 0.01; // truncation tolerance for evaluation
    Vec x0;                 // start state; zeros if empty
    // Optional per-step regret hook for 1-D instances: called with the
    // exercised state and the implied order-up-to point.
    std::function<double(double x, double y)> regret_fn;
    // Optional observer invoked after every iteration with the episode's
    // posterior and the cut set so far; lets callers record gap traces
    // without rerunning the solve.
    std::function<void(int episode, const std::vector<PosteriorState>& posterior, int iter,
                       const CutSet& cuts)>
        iter_hook;
};

struct EpisodeResult {
    CutSet cuts;
    std::vector<double> lb_at_x0;
    std::optional<PolicyEvalResult> policy_value;
    double reused_cut_fraction = 0.0;
    std::vector<Vec> trial_points;
    std::vector<PosteriorState> posterior; // posterior the episode solved under
    Vec x0;
    JointBatch last_batch; // the episode's batch (fixed mode: the only one)
};

struct RunResult {
    std::vector<EpisodeResult> episodes;
    std::vector<PosteriorState> posterior_final;
    std::vector<Vec> exercised_states;
    std::vector<double> regret; // one entry per exercised step if regret_fn set
};

// Full episodic loop: per episode, (warm-)start the cut set, run
// config.iters SDDP iterations, optionally evaluate the policy, exercise it
// for config.horizon steps against the true distribution (true_theta), and
// absorb the observations into the posterior.
RunResult run_eboc(const ControlProblem& problem, std::vector<PosteriorState> posterior,
                   const Vec& true_theta, const EbocConfig& config, Rng& rng);

} // namespace eboc
