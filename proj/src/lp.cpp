#include "eboc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eboc {

int LinearProgram::add_row(std::vector<double> coeffs, RowSense sense, double rhs_value) {
    if (static_cast<int>(coeffs.size()) != num_vars()) {
        throw std::invalid_argument("LinearProgram::add_row: coefficient count != num_vars");
    }
    rows.push_back(std::move(coeffs));
    rhs.push_back(rhs_value);
    senses.push_back(sense);
    return num_rows() - 1;
}

int LinearProgram::add_row_sparse(const std::vector<std::pair<int, double>>& entries,
                                  RowSense sense, double rhs_value) {
    std::vector<double> coeffs(static_cast<std::size_t>(num_vars()), 0.0);
    for (const auto& [j, v] : entries) {
        if (j < 0 || j >= num_vars()) {
            throw std::invalid_argument("LinearProgram::add_row_sparse: column out of range");
        }
        coeffs[static_cast<std::size_t>(j)] += v;
    }
    rows.push_back(std::move(coeffs));
    rhs.push_back(rhs_value);
    senses.push_back(sense);
    return num_rows() - 1;
}

namespace {

enum class VarState { Basic, AtLower, AtUpper, FreeZero };

constexpr double kPivTol = 1e-8;
constexpr double kCostTol = 1e-9;

// Working state of one simplex solve. Columns 0..n-1 are structural,
// n..n+m-1 are slacks (one per row, coefficient +1, sense encoded in the
// slack's bounds). Artificial variables get indices n+m..n+2m-1 but no
// stored tableau column: the artificial for row i is sign_i * e_i, so it is
// only ever needed as a basis label.
struct Simplex {
    int n = 0; // structural
    int m = 0; // rows
    int ncols = 0; // stored columns = n + m
    std::vector<std::vector<double>> tab; // m x ncols, current B^{-1} A
    std::vector<double> drow; // reduced costs of stored columns
    std::vector<double> lo, up; // size n + 2m
    std::vector<VarState> state; // size n + 2m
    std::vector<double> xval; // nonbasic values, size n + 2m
    std::vector<int> basis; // size m
    std::vector<double> xb; // basic values, size m
    std::vector<double> art_sign; // size m
    bool bland = false;
    long long degenerate_streak = 0;

    bool fixed_range(int j) const { return up[j] - lo[j] < 1e-30; }
    bool is_artificial(int j) const { return j >= ncols; }
};

struct PivotChoice {
    int col = -1;
    int sigma = 0; // +1 entering increases, -1 decreases
};

PivotChoice price(const Simplex& s) {
    PivotChoice best;
    double best_score = kCostTol;
    for (int j = 0; j < s.ncols; ++j) {
        if (s.state[j] == VarState::Basic || s.fixed_range(j)) continue;
        const double d = s.drow[j];
        int sigma = 0;
        if ((s.state[j] == VarState::AtLower || s.state[j] == VarState::FreeZero) && d < -kCostTol) {
            sigma = +1;
        } else if ((s.state[j] == VarState::AtUpper || s.state[j] == VarState::FreeZero) &&
                   d > kCostTol) {
            sigma = -1;
        }
        if (sigma == 0) continue;
        if (s.bland) return {j, sigma}; // lowest eligible index
        if (std::fabs(d) > best_score) {
            best_score = std::fabs(d);
            best = {j, sigma};
        }
    }
    return best;
}

struct RatioResult {
    double t = kInf;
    int row = -1; // -1 with finite t means a bound flip of the entering column
    bool leaving_at_upper = false;
};

RatioResult ratio_test(const Simplex& s, int col, int sigma) {
    RatioResult r;
    // Entering variable's own range caps the step.
    const double range = s.up[col] - s.lo[col];
    if (std::isfinite(range)) r.t = range;
    for (int i = 0; i < s.m; ++i) {
        const double coeff = sigma * s.tab[i][col];
        if (std::fabs(coeff) <= kPivTol) continue;
        const int bi = s.basis[i];
        double ti;
        bool at_upper;
        if (coeff > 0.0) {
            if (s.lo[bi] == -kInf) continue;
            ti = (s.xb[i] - s.lo[bi]) / coeff;
            at_upper = false;
        } else {
            if (s.up[bi] == kInf) continue;
            ti = (s.xb[i] - s.up[bi]) / coeff;
            at_upper = true;
        }
        if (ti < 0.0) ti = 0.0; // clamp tiny negatives from roundoff
        const bool better =
            ti < r.t - 1e-11 ||
            (ti < r.t + 1e-11 && r.row >= 0 &&
             (s.bland ? s.basis[i] < s.basis[r.row]
                      : std::fabs(s.tab[i][col]) > std::fabs(s.tab[r.row][col])));
        if (better || (ti < r.t && r.row < 0)) {
            r.t = ti;
            r.row = i;
            r.leaving_at_upper = at_upper;
        }
    }
    return r;
}

void apply_step(Simplex& s, int col, int sigma, const RatioResult& r) {
    const double t = r.t;
    if (t > 0.0) {
        for (int i = 0; i < s.m; ++i) s.xb[i] -= sigma * t * s.tab[i][col];
        s.degenerate_streak = 0;
    } else {
        ++s.degenerate_streak;
    }
    const double moved = s.xval[col] + sigma * t;
    if (r.row < 0) {
        // Bound flip: the entering column travels its whole range.
        s.state[col] = sigma > 0 ? VarState::AtUpper : VarState::AtLower;
        s.xval[col] = sigma > 0 ? s.up[col] : s.lo[col];
        return;
    }
    const int leaving = s.basis[r.row];
    if (s.is_artificial(leaving)) {
        // Artificials never come back; freeze at zero.
        s.state[leaving] = VarState::AtLower;
        s.xval[leaving] = 0.0;
        s.lo[leaving] = 0.0;
        s.up[leaving] = 0.0;
    } else {
        s.state[leaving] = r.leaving_at_upper ? VarState::AtUpper : VarState::AtLower;
        s.xval[leaving] = r.leaving_at_upper ? s.up[leaving] : s.lo[leaving];
    }
    s.basis[r.row] = col;
    s.state[col] = VarState::Basic;
    s.xb[r.row] = moved;

    // Gauss-Jordan elimination on the entering column.
    auto& prow = s.tab[r.row];
    const double piv = prow[col];
    const double inv = 1.0 / piv;
    for (int j = 0; j < s.ncols; ++j) prow[j] *= inv;
    prow[col] = 1.0;
    for (int i = 0; i < s.m; ++i) {
        if (i == r.row) continue;
        const double f = s.tab[i][col];
        if (f == 0.0) continue;
        auto& row = s.tab[i];
        for (int j = 0; j < s.ncols; ++j) row[j] -= f * prow[j];
        row[col] = 0.0;
    }
    const double dcol = s.drow[col];
    if (dcol != 0.0) {
        for (int j = 0; j < s.ncols; ++j) s.drow[j] -= dcol * prow[j];
        s.drow[col] = 0.0;
    }
}

// Runs the simplex loop until no eligible entering column remains. Returns
// false if an unbounded ray was detected.
bool iterate(Simplex& s, long long max_iters) {
    constexpr long long kStallLimit = 500;
    for (long long iter = 0; iter < max_iters; ++iter) {
        if (!s.bland && s.degenerate_streak > kStallLimit) s.bland = true;
        const PivotChoice choice = price(s);
        if (choice.col < 0) return true;
        const RatioResult r = ratio_test(s, choice.col, choice.sigma);
        if (r.t == kInf) return false;
        apply_step(s, choice.col, choice.sigma, r);
    }
    throw std::runtime_error("solve_lp: iteration limit exceeded");
}

void recompute_drow(Simplex& s, const std::vector<double>& cost) {
    // d_j = c_j - c_B^T B^{-1} A_j over stored columns.
    s.drow.assign(static_cast<std::size_t>(s.ncols), 0.0);
    for (int j = 0; j < s.ncols; ++j) s.drow[j] = j < s.n ? cost[j] : 0.0;
    for (int i = 0; i < s.m; ++i) {
        const int bi = s.basis[i];
        const double cb = (bi < s.n) ? cost[bi] : 0.0;
        if (cb == 0.0) continue;
        const auto& row = s.tab[i];
        for (int j = 0; j < s.ncols; ++j) s.drow[j] -= cb * row[j];
    }
}

void check_solution(const LinearProgram& lp, const LpSolution& sol) {
    const int n = lp.num_vars();
    const int m = lp.num_rows();
    double scale = 1.0;
    for (double b : lp.rhs) scale = std::max(scale, std::fabs(b));
    for (int j = 0; j < n; ++j) {
        const double x = sol.primal[static_cast<std::size_t>(j)];
        scale = std::max(scale, std::fabs(x));
        if (x < lp.lower[static_cast<std::size_t>(j)] - kLpFeasTol * scale ||
            x > lp.upper[static_cast<std::size_t>(j)] + kLpFeasTol * scale) {
            throw std::runtime_error("solve_lp: optimal primal violates variable bounds");
        }
    }
    for (int i = 0; i < m; ++i) {
        double ax = 0.0;
        for (int j = 0; j < n; ++j) {
            ax += lp.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                  sol.primal[static_cast<std::size_t>(j)];
        }
        const double resid = ax - lp.rhs[static_cast<std::size_t>(i)];
        const double tol = kLpFeasTol * scale;
        const RowSense sense = lp.senses[static_cast<std::size_t>(i)];
        const bool ok = (sense == RowSense::LE && resid <= tol) ||
                        (sense == RowSense::GE && resid >= -tol) ||
                        (sense == RowSense::EQ && std::fabs(resid) <= tol);
        if (!ok) {
            throw std::runtime_error("solve_lp: optimal primal violates row " + std::to_string(i));
        }
    }
}

} // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const int n = lp.num_vars();
    const int m = lp.num_rows();
    for (int j = 0; j < n; ++j) {
        if (lp.lower[static_cast<std::size_t>(j)] > lp.upper[static_cast<std::size_t>(j)]) {
            return {LpStatus::Infeasible, {}, 0.0, {}};
        }
    }

    Simplex s;
    s.n = n;
    s.m = m;
    s.ncols = n + m;
    s.lo.resize(static_cast<std::size_t>(n + 2 * m));
    s.up.resize(static_cast<std::size_t>(n + 2 * m));
    s.state.resize(static_cast<std::size_t>(n + 2 * m));
    s.xval.assign(static_cast<std::size_t>(n + 2 * m), 0.0);

    // Structural columns start at the finite bound nearest zero, or free at 0.
    for (int j = 0; j < n; ++j) {
        s.lo[j] = lp.lower[static_cast<std::size_t>(j)];
        s.up[j] = lp.upper[static_cast<std::size_t>(j)];
        if (s.lo[j] == -kInf && s.up[j] == kInf) {
            s.state[j] = VarState::FreeZero;
            s.xval[j] = 0.0;
        } else if (s.lo[j] == -kInf) {
            s.state[j] = VarState::AtUpper;
            s.xval[j] = s.up[j];
        } else if (s.up[j] == kInf) {
            s.state[j] = VarState::AtLower;
            s.xval[j] = s.lo[j];
        } else {
            const bool pick_lower = std::fabs(s.lo[j]) <= std::fabs(s.up[j]);
            s.state[j] = pick_lower ? VarState::AtLower : VarState::AtUpper;
            s.xval[j] = pick_lower ? s.lo[j] : s.up[j];
        }
    }
    // Slacks: bounds encode the row sense; all start nonbasic at zero.
    for (int i = 0; i < m; ++i) {
        const int j = n + i;
        switch (lp.senses[static_cast<std::size_t>(i)]) {
            case RowSense::LE:
                s.lo[j] = 0.0;
                s.up[j] = kInf;
                break;
            case RowSense::GE:
                s.lo[j] = -kInf;
                s.up[j] = 0.0;
                break;
            case RowSense::EQ:
                s.lo[j] = 0.0;
                s.up[j] = 0.0;
                break;
        }
        s.state[j] = VarState::AtLower;
        if (s.lo[j] == -kInf) s.state[j] = VarState::AtUpper;
        s.xval[j] = 0.0;
    }

    // Artificial basis carrying the initial residuals.
    s.basis.resize(static_cast<std::size_t>(m));
    s.xb.resize(static_cast<std::size_t>(m));
    s.art_sign.resize(static_cast<std::size_t>(m));
    s.tab.assign(static_cast<std::size_t>(m),
                 std::vector<double>(static_cast<std::size_t>(s.ncols), 0.0));
    double rhs_scale = 1.0;
    for (int i = 0; i < m; ++i) {
        double resid = lp.rhs[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            resid -= lp.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * s.xval[j];
        }
        rhs_scale = std::max(rhs_scale, std::fabs(lp.rhs[static_cast<std::size_t>(i)]));
        const double sign = resid >= 0.0 ? 1.0 : -1.0;
        s.art_sign[i] = sign;
        const int art = n + m + i;
        s.lo[art] = 0.0;
        s.up[art] = kInf;
        s.state[art] = VarState::Basic;
        s.basis[i] = art;
        s.xb[i] = std::fabs(resid);
        auto& row = s.tab[i];
        for (int j = 0; j < n; ++j) {
            row[j] = sign * lp.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        row[n + i] = sign;
    }

    // Phase 1: minimize the artificial sum. Reduced cost of stored column j
    // is -sum_i tab[i][j] while every basic variable is an artificial with
    // unit cost.
    s.drow.assign(static_cast<std::size_t>(s.ncols), 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < s.ncols; ++j) s.drow[j] -= s.tab[i][j];
    }
    const long long max_iters = 20000LL + 200LL * static_cast<long long>(m + n);
    if (!iterate(s, max_iters)) {
        throw std::runtime_error("solve_lp: phase-1 ray (internal error)");
    }
    double phase1 = 0.0;
    for (int i = 0; i < m; ++i) {
        if (s.is_artificial(s.basis[i])) phase1 += s.xb[i];
    }
    if (phase1 > 1e-7 * rhs_scale) {
        return {LpStatus::Infeasible, {}, 0.0, {}};
    }
    // Pivot leftover artificials out where possible; an all-zero row is
    // redundant and keeps its artificial pinned at zero.
    for (int i = 0; i < m; ++i) {
        if (!s.is_artificial(s.basis[i])) continue;
        int col = -1;
        for (int j = 0; j < s.ncols; ++j) {
            if (s.state[j] != VarState::Basic && !s.fixed_range(j) &&
                std::fabs(s.tab[i][j]) > 1e-7) {
                col = j;
                break;
            }
        }
        if (col < 0) {
            const int art = s.basis[i];
            s.lo[art] = 0.0;
            s.up[art] = 0.0;
            s.xb[i] = 0.0;
            continue;
        }
        RatioResult r;
        r.t = 0.0;
        r.row = i;
        r.leaving_at_upper = false;
        apply_step(s, col, +1, r);
    }
    // Any artificial still basic is pinned to [0,0] so it cannot move.
    for (int i = 0; i < m; ++i) {
        const int bi = s.basis[i];
        if (s.is_artificial(bi)) {
            s.lo[bi] = 0.0;
            s.up[bi] = 0.0;
        }
    }

    // Phase 2 on the real objective.
    recompute_drow(s, lp.objective);
    s.degenerate_streak = 0;
    if (!iterate(s, max_iters)) {
        return {LpStatus::Unbounded, {}, 0.0, {}};
    }

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.primal.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) sol.primal[static_cast<std::size_t>(j)] = s.xval[j];
    for (int i = 0; i < m; ++i) {
        if (s.basis[i] < n) sol.primal[static_cast<std::size_t>(s.basis[i])] = s.xb[i];
    }
    sol.objective_value = 0.0;
    for (int j = 0; j < n; ++j) {
        sol.objective_value +=
            lp.objective[static_cast<std::size_t>(j)] * sol.primal[static_cast<std::size_t>(j)];
    }
    // Row duals: the slack column of row i carries B^{-1} e_i, so the
    // multiplier is minus the slack's reduced cost.
    sol.duals.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) sol.duals[static_cast<std::size_t>(i)] = -s.drow[n + i];

    // Strong-duality audit: objective minus dual bound must vanish. The dual
    // bound is y^T b plus the reduced-cost contribution of nonbasic columns
    // at finite bounds.
    double dual_obj = 0.0;
    for (int i = 0; i < m; ++i) {
        dual_obj += sol.duals[static_cast<std::size_t>(i)] * lp.rhs[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < s.ncols; ++j) {
        if (s.state[j] == VarState::Basic) continue;
        dual_obj += s.drow[j] * s.xval[j];
    }
    double gap_scale = std::max(1.0, std::fabs(sol.objective_value));
    if (std::fabs(sol.objective_value - dual_obj) > kLpDualityTol * gap_scale) {
        throw std::runtime_error("solve_lp: primal-dual gap exceeds tolerance");
    }
    check_solution(lp, sol);
    return sol;
}

} // namespace eboc
