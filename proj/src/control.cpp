#include "eboc/control.hpp"

#include "eboc/lp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eboc {

Vec apply_map(const AffineMap& m, const Vec& x, const Vec& u) {
    const std::size_t n = m.b.size();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = m.b[i];
        for (std::size_t j = 0; j < x.size(); ++j) v += m.A[i][j] * x[j];
        for (std::size_t j = 0; j < u.size(); ++j) v += m.B[i][j] * u[j];
        out[i] = v;
    }
    return out;
}

double eval_piece(const CostPiece& piece, const Vec& x, const Vec& u, const Vec& xi) {
    double v = piece.constant;
    for (std::size_t j = 0; j < piece.on_x.size(); ++j) v += piece.on_x[j] * x[j];
    for (std::size_t j = 0; j < piece.on_u.size(); ++j) v += piece.on_u[j] * u[j];
    for (std::size_t j = 0; j < piece.on_xi.size(); ++j) v += piece.on_xi[j] * xi[j];
    return v;
}

double eval_block(const MaxBlock& block, const Vec& x, const Vec& u, const Vec& xi) {
    if (block.pieces.empty()) throw std::logic_error("eval_block: block has no pieces");
    double best = eval_piece(block.pieces.front(), x, u, xi);
    for (std::size_t p = 1; p < block.pieces.size(); ++p) {
        best = std::max(best, eval_piece(block.pieces[p], x, u, xi));
    }
    return best;
}

double eval_cost(const PwlConvexCost& cost, const Vec& x, const Vec& u, const Vec& xi) {
    double total = 0.0;
    for (const auto& block : cost.blocks) total += eval_block(block, x, u, xi);
    return total;
}

ControlPolytope make_polytope(int control_dim, Vec lower, Vec upper, std::vector<LinIneq> base,
                              std::vector<LinIneq> joint) {
    if (static_cast<int>(lower.size()) != control_dim ||
        static_cast<int>(upper.size()) != control_dim) {
        throw std::invalid_argument("make_polytope: bound size != control_dim");
    }
    LinearProgram lp(control_dim);
    for (int j = 0; j < control_dim; ++j) {
        lp.set_bounds(j, lower[static_cast<std::size_t>(j)], upper[static_cast<std::size_t>(j)]);
    }
    for (const auto& row : base) {
        if (static_cast<int>(row.on_u.size()) != control_dim) {
            throw std::invalid_argument("make_polytope: base row size != control_dim");
        }
        lp.add_row(row.on_u, RowSense::LE, row.rhs);
    }
    if (solve_lp(lp).status != LpStatus::Optimal) {
        throw std::invalid_argument("make_polytope: base control set is empty");
    }
    ControlPolytope poly;
    poly.control_dim = control_dim;
    poly.lower = std::move(lower);
    poly.upper = std::move(upper);
    poly.base = std::move(base);
    poly.joint = std::move(joint);
    return poly;
}

namespace {

void check_feasible(const ControlProblem& problem, const Vec& x, const Vec& u) {
    constexpr double tol = 1e-8;
    const auto& poly = problem.controls;
    for (int j = 0; j < poly.control_dim; ++j) {
        const double uj = u[static_cast<std::size_t>(j)];
        const double scale = 1.0 + std::fabs(uj);
        if (uj < poly.lower[static_cast<std::size_t>(j)] - tol * scale ||
            uj > poly.upper[static_cast<std::size_t>(j)] + tol * scale) {
            std::ostringstream os;
            os << "step: control component " << j << " = " << uj << " outside ["
               << poly.lower[static_cast<std::size_t>(j)] << ", "
               << poly.upper[static_cast<std::size_t>(j)] << "]";
            throw std::invalid_argument(os.str());
        }
    }
    auto check_rows = [&](const std::vector<LinIneq>& rows, const char* label) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < rows[k].on_u.size(); ++j) lhs += rows[k].on_u[j] * u[j];
            for (std::size_t j = 0; j < rows[k].on_x.size(); ++j) lhs += rows[k].on_x[j] * x[j];
            if (lhs > rows[k].rhs + tol * (1.0 + std::fabs(rows[k].rhs))) {
                std::ostringstream os;
                os << "step: " << label << " constraint " << k << " violated (" << lhs << " > "
                   << rows[k].rhs << ")";
                throw std::invalid_argument(os.str());
            }
        }
    };
    check_rows(poly.base, "control");
    check_rows(poly.joint, "joint");
}

} // namespace

Vec step(const ControlProblem& problem, const Vec& x, const Vec& u, const Vec& xi) {
    check_feasible(problem, x, u);
    return apply_map(problem.dynamics.map(xi), x, u);
}

double stage_cost(const ControlProblem& problem, const Vec& x, const Vec& u, const Vec& xi) {
    return eval_cost(problem.cost, x, u, xi);
}

ControlProblem build_inventory(int dims, const Vec& c, const Vec& h, const Vec& b, double gamma,
                               const Vec& mean_demand) {
    if (dims < 1) throw std::invalid_argument("build_inventory: dims must be >= 1");
    if (gamma <= 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("build_inventory: gamma must lie in (0,1)");
    }
    const auto d = static_cast<std::size_t>(dims);
    if (c.size() != d || h.size() != d || b.size() != d || mean_demand.size() != d) {
        throw std::invalid_argument("build_inventory: parameter vectors must have length dims");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (!(b[i] > c[i] && c[i] > 0.0)) {
            throw std::invalid_argument(
                "build_inventory: order-up-to optimality needs b > c > 0 per product");
        }
        if (h[i] <= 0.0) throw std::invalid_argument("build_inventory: h must be positive");
        if (mean_demand[i] <= 0.0) {
            throw std::invalid_argument("build_inventory: mean demand must be positive");
        }
        const double kappa = (b[i] - (1.0 - gamma) * c[i]) / (b[i] + h[i]);
        if (!(kappa > 0.0 && kappa < 1.0)) {
            throw std::logic_error("build_inventory: critical fractile outside (0,1)");
        }
    }

    ControlProblem problem;
    problem.state_dim = dims;
    problem.control_dim = dims;
    problem.gamma = gamma;

    problem.dynamics.state_dim = dims;
    problem.dynamics.control_dim = dims;
    problem.dynamics.map = [dims](const Vec& xi) {
        const auto n = static_cast<std::size_t>(dims);
        AffineMap m;
        m.A.assign(n, Vec(n, 0.0));
        m.B.assign(n, Vec(n, 0.0));
        m.b.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            m.A[i][i] = 1.0;
            m.B[i][i] = 1.0;
            m.b[i] = -xi[i];
        }
        return m;
    };

    // Per-product block: c_i u_i + max(b_i (d_i - y_i), h_i (y_i - d_i)),
    // y = x + u.
    problem.cost.blocks.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        MaxBlock& block = problem.cost.blocks[i];
        CostPiece shortage;
        shortage.on_x.assign(d, 0.0);
        shortage.on_u.assign(d, 0.0);
        shortage.on_xi.assign(d, 0.0);
        shortage.on_x[i] = -b[i];
        shortage.on_u[i] = c[i] - b[i];
        shortage.on_xi[i] = b[i];
        CostPiece holding;
        holding.on_x.assign(d, 0.0);
        holding.on_u.assign(d, 0.0);
        holding.on_xi.assign(d, 0.0);
        holding.on_x[i] = h[i];
        holding.on_u[i] = c[i] + h[i];
        holding.on_xi[i] = -h[i];
        block.pieces = {shortage, holding};
    }

    // Control box [0, 20 * mean demand]: big enough that the optimum never
    // touches the cap (asserted downstream), small enough to keep early
    // subproblems bounded.
    Vec lower(d, 0.0);
    Vec upper(d);
    for (std::size_t i = 0; i < d; ++i) upper[i] = 20.0 * mean_demand[i];
    problem.controls = make_polytope(dims, std::move(lower), std::move(upper));

    // Working box per product around the exponential-demand order-up-to
    // point x* = -theta ln(1 - kappa).
    problem.state_box_lo.resize(d);
    problem.state_box_hi.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double kappa = (b[i] - (1.0 - gamma) * c[i]) / (b[i] + h[i]);
        const double target = -mean_demand[i] * std::log(1.0 - kappa);
        problem.state_box_lo[i] = target - 5.0 * mean_demand[i];
        problem.state_box_hi[i] = target + 2.0 * mean_demand[i];
    }
    problem.cost_min = 0.0;
    problem.assert_control_cap = true;
    problem.cost_bound = 1.0; // placeholder until calibrated
    return problem;
}

ControlProblem build_inventory(double c, double h, double b, double gamma, double mean_demand) {
    return build_inventory(1, {c}, {h}, {b}, gamma, {mean_demand});
}

double calibrate_cost_bound(ControlProblem& problem, const std::function<Vec(Rng&)>& demand,
                            const Vec& order_up_to, Rng& rng) {
    const auto n = static_cast<std::size_t>(problem.state_dim);
    Vec x(n, 0.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        Vec u(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) u[i] = std::max(0.0, order_up_to[i] - x[i]);
        const Vec xi = demand(rng);
        worst = std::max(worst, std::fabs(stage_cost(problem, x, u, xi)));
        x = step(problem, x, u, xi);
    }
    problem.cost_bound = 2.0 * worst;
    return problem.cost_bound;
}

} // namespace eboc
