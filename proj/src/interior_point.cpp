#include "interior_point.hpp"

#include <cmath>
#include <limits>

namespace mcbf::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd block_value(const PsdBlock& blk, const Eigen::VectorXd& w) {
    Eigen::MatrixXd g = blk.b0;
    for (std::size_t i = 0; i < blk.bi.size(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi != 0.0) g += wi * blk.bi[i];
    }
    return g;
}

// -log det G_k - sum log s_r, or +inf outside the domain.
double barrier_value(const ConicProblem& prob, const Eigen::VectorXd& w) {
    double phi = 0.0;
    for (const auto& blk : prob.blocks) {
        Eigen::LLT<Eigen::MatrixXd> llt(block_value(blk, w));
        if (llt.info() != Eigen::Success) return kInf;
        const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i) {
            if (!(diag(i) > 0.0)) return kInf;
            phi -= 2.0 * std::log(diag(i));
        }
    }
    if (prob.rows.rows() > 0) {
        const Eigen::VectorXd s = prob.offsets + prob.rows * w;
        for (Eigen::Index r = 0; r < s.size(); ++r) {
            if (!(s(r) > 0.0)) return kInf;
            phi -= std::log(s(r));
        }
    }
    return phi;
}

// Gradient and Hessian of the barrier term.
bool barrier_derivatives(const ConicProblem& prob, const Eigen::VectorXd& w, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& hess) {
    const int n = prob.n;
    grad.setZero(n);
    hess.setZero(n, n);
    std::vector<Eigen::MatrixXd> scaled(static_cast<std::size_t>(n));
    for (const auto& blk : prob.blocks) {
        Eigen::LLT<Eigen::MatrixXd> llt(block_value(blk, w));
        if (llt.info() != Eigen::Success) return false;
        const auto lower = llt.matrixL();
        // W_i = L^{-1} B_i L^{-T}; tr(G^{-1} B_i) = tr(W_i), tr(G^{-1} B_i G^{-1} B_j) = <W_i, W_j>.
        for (int i = 0; i < n; ++i) {
            const Eigen::MatrixXd x = lower.solve(blk.bi[static_cast<std::size_t>(i)]);
            scaled[static_cast<std::size_t>(i)] = lower.solve(x.transpose());
            grad(i) -= scaled[static_cast<std::size_t>(i)].trace();
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double v =
                    scaled[static_cast<std::size_t>(i)].cwiseProduct(scaled[static_cast<std::size_t>(j)]).sum();
                hess(i, j) += v;
                if (i != j) hess(j, i) += v;
            }
        }
    }
    if (prob.rows.rows() > 0) {
        const Eigen::VectorXd s = prob.offsets + prob.rows * w;
        if ((s.array() <= 0.0).any()) return false;
        const Eigen::VectorXd inv = s.cwiseInverse();
        grad -= prob.rows.transpose() * inv;
        hess += prob.rows.transpose() * inv.array().square().matrix().asDiagonal() * prob.rows;
    }
    return true;
}

bool newton_direction(Eigen::MatrixXd hess, const Eigen::VectorXd& grad, double reg, Eigen::VectorXd& dir) {
    if (reg > 0.0) hess.diagonal().array() += reg * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() == Eigen::Success) {
        dir = llt.solve(-grad);
        if (dir.allFinite()) return true;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) return false;
    dir = ldlt.solve(-grad);
    return dir.allFinite();
}

}  // namespace

int ConicProblem::barrier_degree() const {
    int deg = static_cast<int>(rows.rows());
    for (const auto& blk : blocks) deg += blk.dim();
    return deg;
}

double ConicProblem::objective(const Eigen::VectorXd& w) const {
    return 0.5 * w.dot(p_diag.asDiagonal() * w) + q.dot(w);
}

bool strictly_feasible(const ConicProblem& prob, const Eigen::VectorXd& w) {
    return std::isfinite(barrier_value(prob, w));
}

double min_margin(const ConicProblem& prob, const Eigen::VectorXd& w) {
    double m = kInf;
    for (const auto& blk : prob.blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block_value(blk, w), Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues()(0));
    }
    if (prob.rows.rows() > 0) m = std::min(m, (prob.offsets + prob.rows * w).minCoeff());
    return m;
}

BarrierResult minimize_barrier(const ConicProblem& prob, Eigen::VectorXd w0, const BarrierOptions& opt) {
    BarrierResult res;
    res.w = std::move(w0);
    const double degree = std::max(1, prob.barrier_degree());
    double t = opt.t0;

    Eigen::VectorXd grad_phi, grad, dir, trial;
    Eigen::MatrixXd hess_phi, hess;

    auto merit = [&](const Eigen::VectorXd& w) {
        const double phi = barrier_value(prob, w);
        return std::isfinite(phi) ? t * prob.objective(w) + phi : kInf;
    };
    auto early_stop = [&] {
        return opt.stop_index >= 0 && res.w(opt.stop_index) < opt.stop_below;
    };

    if (early_stop()) {
        res.exit = BarrierExit::EarlyStop;
        return res;
    }

    for (;;) {
        // Centering at the current t.
        for (;;) {
            if (res.newton_steps >= opt.max_newton) {
                res.exit = BarrierExit::IterationLimit;
                res.gap = degree / t;
                return res;
            }
            if (!barrier_derivatives(prob, res.w, grad_phi, hess_phi)) {
                res.exit = BarrierExit::Breakdown;
                return res;
            }
            grad = t * (prob.p_diag.asDiagonal() * res.w + prob.q) + grad_phi;
            hess = hess_phi;
            hess.diagonal() += t * prob.p_diag;
            if (!newton_direction(hess, grad, opt.hessian_reg, dir)) {
                res.exit = BarrierExit::Breakdown;
                return res;
            }
            const double decrement = -grad.dot(dir);
            const double f0 = merit(res.w);
            // Merit values carry round-off proportional to their magnitude; a decrement
            // below that cannot be resolved by the line search.
            const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f0) + 1.0);
            if (decrement * 0.5 <= std::max(opt.newton_tol, slack)) break;

            double step = 1.0;
            trial = res.w + dir;
            int halvings = 0;
            while (!strictly_feasible(prob, trial) && halvings < 80) {
                step *= 0.5;
                trial = res.w + step * dir;
                ++halvings;
            }
            // Armijo with the same round-off allowance.
            double f1 = merit(trial);
            while (f1 > f0 - 0.25 * step * decrement + slack && halvings < 80) {
                step *= 0.5;
                trial = res.w + step * dir;
                f1 = merit(trial);
                ++halvings;
            }
            ++res.newton_steps;
            if (halvings >= 80 || !std::isfinite(f1)) {
                // No progress possible in floating point; accept the point as centered
                // if the decrement is already small, otherwise report breakdown.
                if (decrement * 0.5 <= 1e-6) break;
                res.exit = BarrierExit::Breakdown;
                return res;
            }
            res.w = trial;
            if (early_stop()) {
                res.exit = BarrierExit::EarlyStop;
                res.gap = degree / t;
                return res;
            }
        }
        res.gap = degree / t;
        if (res.gap <= opt.gap_target) {
            res.exit = BarrierExit::Converged;
            return res;
        }
        t *= opt.mu;
    }
}

}  // namespace mcbf::detail
