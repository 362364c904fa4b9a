// Problem data for the discounted stochastic control instance: affine
// stochastic dynamics, convex piecewise-linear stage cost, polyhedral control
// set, and the inventory instantiations.
#pragma once

#include "eboc/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace eboc {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>; // row-major

// x_next = A x + B u + b, all three depending on the disturbance.
struct AffineMap {
    Mat A;
    Mat B;
    Vec b;
};

struct AffineDynamics {
    int state_dim = 0;
    int control_dim = 0;
    std::function<AffineMap(const Vec& xi)> map;
};

Vec apply_map(const AffineMap& m, const Vec& x, const Vec& u);

// One affine piece: on_x . x + on_u . u + on_xi . xi + constant.
struct CostPiece {
    Vec on_x;
    Vec on_u;
    Vec on_xi;
    double constant = 0.0;
};

// A block is a max over pieces; the stage cost is the sum of its blocks.
// A single block is the plain max-of-affines convex cost; the multi-product
// inventory cost uses one block per product, which keeps the piece count
// linear in the dimension instead of exponential.
struct MaxBlock {
    std::vector<CostPiece> pieces;
};

struct PwlConvexCost {
    std::vector<MaxBlock> blocks;
};

double eval_piece(const CostPiece& piece, const Vec& x, const Vec& u, const Vec& xi);
double eval_block(const MaxBlock& block, const Vec& x, const Vec& u, const Vec& xi);
double eval_cost(const PwlConvexCost& cost, const Vec& x, const Vec& u, const Vec& xi);

// on_u . u + on_x . x <= rhs; on_x empty for rows of the base set.
struct LinIneq {
    Vec on_u;
    Vec on_x;
    double rhs = 0.0;
};

struct ControlPolytope {
    int control_dim = 0;
    Vec lower; // control box, entries may be +-inf
    Vec upper;
    std::vector<LinIneq> base;  // constraints on u alone
    std::vector<LinIneq> joint; // state-dependent constraints g_k(x,u) <= 0
};

// Certifies that {u : lower <= u <= upper, base rows hold} is nonempty via an
// LP feasibility solve; throws std::invalid_argument otherwise.
ControlPolytope make_polytope(int control_dim, Vec lower, Vec upper,
                              std::vector<LinIneq> base = {}, std::vector<LinIneq> joint = {});

struct ControlProblem {
    AffineDynamics dynamics;
    PwlConvexCost cost;
    ControlPolytope controls;
    double gamma = 0.0;
    // Effective bound on the stage cost over the working region; used only
    // for truncation-horizon sizing. See calibrate_cost_bound.
    double cost_bound = 1.0;
    // Certified global lower bound on the stage cost (0 for inventory);
    // cost_min / (1 - gamma) seeds the value approximation.
    double cost_min = 0.0;
    // When set, stage solves assert that the optimal control stays strictly
    // inside the safety cap on u (the cap exists only to bound the LPs).
    bool assert_control_cap = false;
    int state_dim = 0;
    int control_dim = 0;
    // Working state box for grid oracles, integrated gaps, and cut-validity
    // checks.
    Vec state_box_lo;
    Vec state_box_hi;
};

// Returns A(xi) x + B(xi) u + b(xi). The control must be feasible for x
// within a 1e-8 tolerance; a violation throws with the offending constraint.
Vec step(const ControlProblem& problem, const Vec& x, const Vec& u, const Vec& xi);

double stage_cost(const ControlProblem& problem, const Vec& x, const Vec& u, const Vec& xi);

// Multi-product inventory: state = stock per product (negative = backlog),
// control = nonnegative order, dynamics x + u - demand. Stage cost per
// product is c_i u_i + max(b_i (d_i - y_i), h_i (y_i - d_i)) at y = x + u.
// Requires b_i > c_i > 0 and h_i > 0. mean_demand sizes the control box
// (20x mean) and the working state box around the exponential-demand
// order-up-to point.
ControlProblem build_inventory(int dims, const Vec& c, const Vec& h, const Vec& b, double gamma,
                               const Vec& mean_demand);

// Scalar convenience wrapper.
ControlProblem build_inventory(double c, double h, double b, double gamma, double mean_demand);

// Replays 1000 steps of the order-up-to policy given by `order_up_to` from
// state 0 under `demand`, records the largest stage cost seen, and stores
// twice that value as problem.cost_bound. Returns the new bound.
double calibrate_cost_bound(ControlProblem& problem, const std::function<Vec(Rng&)>& demand,
                            const Vec& order_up_to, Rng& rng);

} // namespace eboc
