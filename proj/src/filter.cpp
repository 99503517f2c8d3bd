#include "mcbf/filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>

#include "interior_point.hpp"
#include "mcbf/errors.hpp"

namespace mcbf {

namespace {

using detail::BarrierExit;
using detail::BarrierOptions;
using detail::ConicProblem;
using detail::PsdBlock;

// Directions shared by the null spaces of every block are dropped when their
// residual falls below this fraction of the block scale.
constexpr double kNullspaceRelTol = 1e-10;

// Phase I searches within this multiple of (1 + ||u_d||) around the desired control.
constexpr double kPhaseOneRadius = 1e4;

struct Reduction {
    ConicProblem conic;
    std::vector<int> free_index;
    Eigen::VectorXd fixed;     // full-length, pinned entries set
    double max_scale = 1.0;    // largest normalization factor applied to a constraint
    bool infeasible = false;
    std::string reason;
};

struct RowAccumulator {
    std::vector<Eigen::VectorXd> d;
    std::vector<double> c;
};

void add_row(RowAccumulator& acc, Reduction& red, double c, const Eigen::VectorXd& d, double feas_tol,
             const std::string& label) {
    const double norm = d.norm();
    if (norm <= 1e-14 * (1.0 + std::abs(c))) {
        if (c < -feas_tol) {
            red.infeasible = true;
            red.reason = "constraint '" + label + "' does not depend on the free inputs and is violated";
        }
        return;
    }
    acc.c.push_back(c / norm);
    acc.d.push_back(d / norm);
    red.max_scale = std::max(red.max_scale, norm);
}

// Substitutes pins, strips common null spaces of each LMI, demotes 1x1 blocks to
// rows and normalizes everything to unit scale.
Reduction reduce(const FilterProblem& prob, double feas_tol) {
    Reduction red;
    const int m = prob.inputs();
    red.fixed = Eigen::VectorXd::Zero(m);
    std::vector<bool> pinned(static_cast<std::size_t>(m), false);
    for (const auto& pin : prob.pins) {
        pinned[static_cast<std::size_t>(pin.index)] = true;
        red.fixed(pin.index) = pin.value;
    }
    for (int i = 0; i < m; ++i) {
        if (!pinned[static_cast<std::size_t>(i)]) red.free_index.push_back(i);
    }
    const int n = static_cast<int>(red.free_index.size());
    red.conic.n = n;

    RowAccumulator rows;

    for (const auto& lmi : prob.lmis) {
        Eigen::MatrixXd a0 = lmi.a0.mat();
        for (const auto& pin : prob.pins) a0 += pin.value * lmi.ai[static_cast<std::size_t>(pin.index)].mat();
        std::vector<Eigen::MatrixXd> bi;
        bi.reserve(static_cast<std::size_t>(n));
        for (int j : red.free_index) bi.push_back(lmi.ai[static_cast<std::size_t>(j)].mat());

        double scale = a0.norm();
        for (const auto& b : bi) scale = std::max(scale, b.norm());
        if (scale == 0.0) continue;  // 0 >= 0

        // Common null space: eigenvectors of A0^2 + sum B_j^2 with negligible eigenvalue.
        Eigen::MatrixXd gram = a0 * a0;
        for (const auto& b : bi) gram += b * b;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success) {
            red.infeasible = false;
            red.reason = "eigensolver failed during reduction of '" + lmi.label + "'";
            red.conic.n = -1;
            return red;
        }
        const double cutoff = std::pow(kNullspaceRelTol * scale, 2);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            if (es.eigenvalues()(k) > cutoff) keep.push_back(k);
        }
        if (keep.empty()) continue;
        Eigen::MatrixXd basis(a0.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
        }

        Eigen::MatrixXd r0 = basis.transpose() * a0 * basis;
        r0 = 0.5 * (r0 + r0.transpose()).eval();
        std::vector<Eigen::MatrixXd> rb;
        rb.reserve(bi.size());
        double input_scale = 0.0;
        for (const auto& b : bi) {
            Eigen::MatrixXd r = basis.transpose() * b * basis;
            r = 0.5 * (r + r.transpose()).eval();
            input_scale = std::max(input_scale, r.norm());
            rb.push_back(std::move(r));
        }

        if (input_scale <= 1e-14 * scale) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cs(r0, Eigen::EigenvaluesOnly);
            if (cs.eigenvalues()(0) < -feas_tol) {
                red.infeasible = true;
                red.reason = "LMI '" + lmi.label + "' does not depend on the free inputs and is violated";
            }
            continue;
        }

        if (r0.rows() == 1) {
            Eigen::VectorXd d(n);
            for (int j = 0; j < n; ++j) d(j) = rb[static_cast<std::size_t>(j)](0, 0);
            add_row(rows, red, r0(0, 0), d, feas_tol, lmi.label);
            continue;
        }

        PsdBlock blk;
        blk.b0 = r0 / scale;
        blk.bi.reserve(rb.size());
        for (auto& r : rb) blk.bi.push_back(r / scale);
        red.max_scale = std::max(red.max_scale, scale);
        red.conic.blocks.push_back(std::move(blk));
    }

    for (const auto& hs : prob.halfspaces) {
        double c = hs.b0;
        for (const auto& pin : prob.pins) c += hs.b(pin.index) * pin.value;
        Eigen::VectorXd d(n);
        for (int j = 0; j < n; ++j) d(j) = hs.b(red.free_index[static_cast<std::size_t>(j)]);
        add_row(rows, red, c, d, feas_tol, hs.label);
    }

    const auto q = static_cast<Eigen::Index>(rows.c.size());
    red.conic.rows.resize(q, n);
    red.conic.offsets.resize(q);
    for (Eigen::Index r = 0; r < q; ++r) {
        red.conic.rows.row(r) = rows.d[static_cast<std::size_t>(r)].transpose();
        red.conic.offsets(r) = rows.c[static_cast<std::size_t>(r)];
    }
    return red;
}

// Phase-I problem over (z, s): minimize s s.t. G_k(z) + s I >= 0, c + D z + s >= 0,
// and ||z - center|| <= radius so that directions the constraints never see stay bounded.
ConicProblem phase_one(const ConicProblem& base, const Eigen::VectorXd& center, double radius) {
    ConicProblem p1;
    const int n = base.n;
    p1.n = n + 1;
    for (const auto& blk : base.blocks) {
        PsdBlock b = blk;
        b.bi.push_back(Eigen::MatrixXd::Identity(blk.dim(), blk.dim()));
        p1.blocks.push_back(std::move(b));
    }
    // [[I, (z - center)/radius], [(z - center)^T/radius, 1]] >= 0.
    PsdBlock ball;
    ball.b0 = Eigen::MatrixXd::Identity(n + 1, n + 1);
    ball.b0.col(n).head(n) = -center / radius;
    ball.b0.row(n).head(n) = -center.transpose() / radius;
    for (int j = 0; j < n; ++j) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n + 1, n + 1);
        e(j, n) = e(n, j) = 1.0 / radius;
        ball.bi.push_back(std::move(e));
    }
    ball.bi.push_back(Eigen::MatrixXd::Zero(n + 1, n + 1));
    p1.blocks.push_back(std::move(ball));
    p1.rows.resize(base.rows.rows(), n + 1);
    if (base.rows.rows() > 0) {
        p1.rows.leftCols(n) = base.rows;
        p1.rows.col(n).setOnes();
    }
    p1.offsets = base.offsets;
    p1.p_diag = Eigen::VectorXd::Zero(n + 1);
    p1.q = Eigen::VectorXd::Zero(n + 1);
    p1.q(n) = 1.0;
    return p1;
}

void shift_constraints(ConicProblem& prob, double delta) {
    for (auto& blk : prob.blocks) blk.b0.diagonal().array() += delta;
    prob.offsets.array() += delta;
}

FilterSolution finish(const FilterProblem& prob, FilterSolution sol, double feas_tol) {
    const auto report = verify_solution(prob, sol.u, feas_tol);
    sol.lmi_min_eigs = report.lmi_min_eigs;
    sol.halfspace_slacks = report.halfspace_slacks;
    sol.objective = (sol.u - prob.u_desired).squaredNorm();
    if (sol.status == SolveStatus::Optimal && !report.ok()) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = "solution fails the residual audit at '" + report.violations.front() + "'";
    }
    return sol;
}

}  // namespace

std::string_view to_string(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Optimal:
            return "optimal";
        case SolveStatus::Infeasible:
            return "infeasible";
        case SolveStatus::NumericalFailure:
            return "numerical_failure";
    }
    return "numerical_failure";
}

FilterProblem assemble(Eigen::VectorXd u_desired, std::vector<LmiConstraint> lmis, std::vector<Halfspace> halfspaces,
                       std::vector<Pin> pins) {
    const int m = static_cast<int>(u_desired.size());
    for (const auto& lmi : lmis) {
        lmi.validate();
        if (lmi.inputs() != m) {
            throw DimensionError("assemble: LMI '" + lmi.label + "' has " + std::to_string(lmi.inputs()) +
                                 " input blocks, expected " + std::to_string(m));
        }
    }
    for (const auto& hs : halfspaces) {
        if (hs.inputs() != m) {
            throw DimensionError("assemble: half-space '" + hs.label + "' has " + std::to_string(hs.inputs()) +
                                 " coefficients, expected " + std::to_string(m));
        }
    }
    std::set<int> seen;
    for (const auto& pin : pins) {
        if (pin.index < 0 || pin.index >= m) {
            throw DimensionError("assemble: pin index " + std::to_string(pin.index) + " out of range");
        }
        if (!seen.insert(pin.index).second) {
            throw DuplicatePinError("assemble: input " + std::to_string(pin.index) + " pinned more than once");
        }
    }
    return {std::move(u_desired), std::move(lmis), std::move(halfspaces), std::move(pins)};
}

ResidualReport verify_solution(const FilterProblem& problem, const Eigen::VectorXd& u, double tol) {
    if (u.size() != problem.inputs()) throw DimensionError("verify_solution: control size mismatch");
    ResidualReport rep;
    for (std::size_t k = 0; k < problem.lmis.size(); ++k) {
        const auto& lmi = problem.lmis[k];
        const double lam = min_eig(lmi.evaluate(u));
        rep.lmi_min_eigs.push_back(lam);
        if (!(lam >= -tol)) rep.violations.push_back(lmi.label.empty() ? "lmi[" + std::to_string(k) + "]" : lmi.label);
    }
    for (std::size_t r = 0; r < problem.halfspaces.size(); ++r) {
        const auto& hs = problem.halfspaces[r];
        const double s = hs.slack(u);
        rep.halfspace_slacks.push_back(s);
        if (!(s >= -tol)) rep.violations.push_back(hs.label.empty() ? "halfspace[" + std::to_string(r) + "]" : hs.label);
    }
    for (const auto& pin : problem.pins) {
        const double e = std::abs(u(pin.index) - pin.value);
        rep.pin_errors.push_back(e);
        if (!(e <= 1e-9)) rep.violations.push_back("pin[" + std::to_string(pin.index) + "]");
    }
    return rep;
}

Eigen::VectorXd closed_form_single_scalar(const Eigen::VectorXd& u_desired, double b0, const Eigen::VectorXd& b) {
    if (b.size() != u_desired.size()) throw DimensionError("closed_form_single_scalar: size mismatch");
    const double nb2 = b.squaredNorm();
    const double value = b0 + b.dot(u_desired);
    if (nb2 == 0.0) {
        if (b0 < 0.0) throw ZeroGradientError("closed_form_single_scalar: zero gradient with b0 < 0");
        return u_desired;
    }
    return u_desired + (std::max(0.0, -value) / nb2) * b;
}

FilterSolution solve(const FilterProblem& problem, const SolverSettings& settings) {
    const auto start = std::chrono::steady_clock::now();
    auto stamp = [&](FilterSolution s) {
        s.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return s;
    };

    FilterSolution sol;
    sol.u = problem.u_desired;
    for (const auto& pin : problem.pins) sol.u(pin.index) = pin.value;

    if (!problem.u_desired.allFinite()) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = "desired control has non-finite entries";
        return stamp(std::move(sol));
    }

    // A feasible desired control is its own projection.
    try {
        if (verify_solution(problem, sol.u, 0.0).ok()) {
            sol.status = SolveStatus::Optimal;
            return stamp(finish(problem, std::move(sol), settings.feas_tol));
        }
    } catch (const NumericalFailure& e) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = e.what();
        return stamp(std::move(sol));
    }

    Reduction red = reduce(problem, settings.feas_tol);
    if (red.conic.n < 0) {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = red.reason;
        return stamp(std::move(sol));
    }
    if (red.infeasible) {
        sol.status = SolveStatus::Infeasible;
        sol.message = red.reason;
        return stamp(finish(problem, std::move(sol), settings.feas_tol));
    }

    const int n = red.conic.n;
    Eigen::VectorXd z_desired(n);
    for (int j = 0; j < n; ++j) z_desired(j) = problem.u_desired(red.free_index[static_cast<std::size_t>(j)]);

    auto expand = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd u = red.fixed;
        for (int j = 0; j < n; ++j) u(red.free_index[static_cast<std::size_t>(j)]) = z(j);
        return u;
    };

    if (n == 0 || (red.conic.blocks.empty() && red.conic.rows.rows() == 0)) {
        sol.u = expand(z_desired);
        sol.status = SolveStatus::Optimal;
        sol = finish(problem, std::move(sol), settings.feas_tol);
        if (sol.status != SolveStatus::Optimal) {
            sol.status = SolveStatus::Infeasible;
            sol.message = "pinned inputs leave no freedom and violate a constraint";
        }
        return stamp(std::move(sol));
    }

    ConicProblem& conic = red.conic;
    conic.p_diag = Eigen::VectorXd::Ones(n);
    conic.q = -z_desired;

    // Raw violation tolerated after normalization.
    const double threshold = settings.feas_tol / std::max(1.0, red.max_scale);
    Eigen::VectorXd z0 = z_desired;
    int budget = settings.max_iter;

    if (!detail::strictly_feasible(conic, z0)) {
        const double radius = kPhaseOneRadius * (1.0 + z_desired.norm());
        ConicProblem p1 = phase_one(conic, z_desired, radius);
        Eigen::VectorXd w0(n + 1);
        w0.head(n) = z_desired;
        w0(n) = std::max(0.0, -detail::min_margin(conic, z_desired)) + 1.0;

        BarrierOptions o1;
        o1.gap_target = 1e-2 * threshold;
        o1.max_newton = budget;
        o1.stop_index = n;
        o1.stop_below = 0.0;
        const auto r1 = detail::minimize_barrier(p1, w0, o1);
        budget -= r1.newton_steps;
        sol.iterations += r1.newton_steps;

        if (r1.exit == BarrierExit::EarlyStop) {
            z0 = r1.w.head(n);
        } else if (r1.exit == BarrierExit::Converged) {
            const double s_final = r1.w(n);
            if (s_final >= 0.9 * threshold) {
                sol.status = SolveStatus::Infeasible;
                sol.message = "no control satisfies the constraints (phase-I margin " + std::to_string(s_final) + ")";
                return stamp(finish(problem, std::move(sol), settings.feas_tol));
            }
            // Feasible set with (numerically) empty interior: relax by less than feas_tol.
            const double delta = 0.5 * (std::max(s_final, 0.0) + 0.9 * threshold);
            shift_constraints(conic, delta);
            z0 = r1.w.head(n);
        } else {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = r1.exit == BarrierExit::IterationLimit ? "phase I hit the iteration limit"
                                                                  : "phase I Newton breakdown";
            return stamp(finish(problem, std::move(sol), settings.feas_tol));
        }
    }

    BarrierOptions o2;
    o2.gap_target = std::max(1e-14, 1e-4 * settings.rel_obj_tol);
    o2.max_newton = std::max(budget, 0);
    const auto r2 = detail::minimize_barrier(conic, z0, o2);
    sol.iterations += r2.newton_steps;

    sol.u = expand(r2.w);
    if (r2.exit == BarrierExit::Converged) {
        sol.status = SolveStatus::Optimal;
    } else {
        sol.status = SolveStatus::NumericalFailure;
        sol.message = r2.exit == BarrierExit::IterationLimit ? "iteration limit reached" : "Newton breakdown";
    }
    return stamp(finish(problem, std::move(sol), settings.feas_tol));
}

}  // namespace mcbf
