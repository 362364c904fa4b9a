// Self-contained dense linear-programming kernel.
//
// Bounded-variable two-phase primal simplex. Dantzig pricing by default with
// a permanent switch to Bland's rule after a degenerate stall, which keeps
// the usual speed while ruling out cycling. Problems here are small (at most
// a few thousand rows), so a dense tableau is simpler and fast enough.
#pragma once

#include <limits>
#include <vector>

namespace eboc {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class RowSense { LE, EQ, GE };

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
    explicit LinearProgram(int num_vars)
        : objective(static_cast<std::size_t>(num_vars), 0.0),
          lower(static_cast<std::size_t>(num_vars), -kInf),
          upper(static_cast<std::size_t>(num_vars), kInf) {}

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    void set_bounds(int j, double lo, double up) {
        lower[static_cast<std::size_t>(j)] = lo;
        upper[static_cast<std::size_t>(j)] = up;
    }

    // Dense row; coeffs.size() must equal num_vars().
    int add_row(std::vector<double> coeffs, RowSense sense, double rhs_value);
    // Sparse row given as (column, coefficient) pairs.
    int add_row_sparse(const std::vector<std::pair<int, double>>& entries, RowSense sense,
                       double rhs_value);

    std::vector<double> objective; // minimize objective . x
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<RowSense> senses;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> primal;
    double objective_value = 0.0;
    // One multiplier per constraint row: the marginal change of the optimal
    // value per unit of right-hand side.
    std::vector<double> duals;
};

inline constexpr double kLpFeasTol = 1e-8;
inline constexpr double kLpDualityTol = 1e-7;

// Solves the LP. On Optimal the returned primal/dual pair has been verified:
// row and bound residuals within kLpFeasTol (scaled) and the primal-dual
// objective gap within kLpDualityTol; a violation throws.
LpSolution solve_lp(const LinearProgram& lp);

} // namespace eboc
