#pragma once

// Log-barrier interior-point method for small dense conic problems of the form
//
//   minimize  1/2 w^T diag(P) w + q^T w
//   s.t.      G_k(w) = B0_k + sum_i w_i B_ik  >= 0   (PSD blocks)
//             c + D w >= 0                            (linear rows)
//
// Internal to the filter; the public entry point is mcbf::solve.

#include <vector>

#include <Eigen/Dense>

namespace mcbf::detail {

struct PsdBlock {
    Eigen::MatrixXd b0;
    std::vector<Eigen::MatrixXd> bi;

    int dim() const { return static_cast<int>(b0.rows()); }
};

struct ConicProblem {
    int n = 0;
    std::vector<PsdBlock> blocks;
    Eigen::MatrixXd rows;     // q x n
    Eigen::VectorXd offsets;  // q

    Eigen::VectorXd p_diag;   // n, >= 0
    Eigen::VectorXd q;        // n

    /// Barrier parameter: sum of block sizes plus the number of rows.
    int barrier_degree() const;
    double objective(const Eigen::VectorXd& w) const;
};

/// True iff every block is positive definite and every row strictly positive at w.
bool strictly_feasible(const ConicProblem& prob, const Eigen::VectorXd& w);

/// Smallest constraint margin at w: min over blocks of lambda_min and over rows of the slack.
double min_margin(const ConicProblem& prob, const Eigen::VectorXd& w);

struct BarrierOptions {
    double t0 = 1.0;
    double mu = 15.0;
    double gap_target = 1e-10;
    double newton_tol = 1e-10;  // on lambda^2 / 2
    int max_newton = 500;
    double hessian_reg = 0.0;   // Levenberg term added to the Newton system
    // Phase-I early exit: stop as soon as w[stop_index] < stop_below.
    int stop_index = -1;
    double stop_below = 0.0;
};

enum class BarrierExit { Converged, EarlyStop, IterationLimit, Breakdown };

struct BarrierResult {
    Eigen::VectorXd w;
    BarrierExit exit = BarrierExit::Breakdown;
    double gap = 0.0;  // barrier_degree / t at exit
    int newton_steps = 0;
};

/// Path-following barrier method from a strictly feasible start.
BarrierResult minimize_barrier(const ConicProblem& prob, Eigen::VectorXd w0, const BarrierOptions& opt);

}  // namespace mcbf::detail
