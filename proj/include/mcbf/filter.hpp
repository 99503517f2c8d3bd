#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mcbf/barrier.hpp"

namespace mcbf {

/// Equality constraint u[index] = value.
struct Pin {
    int index = 0;
    double value = 0.0;
};

/// Minimal-deviation safety filter:
///
///   minimize ||u - u_desired||^2
///   s.t.     A0_k + sum_i u_i A_ik >= 0   for every LMI k
///            b0_r + b_r^T u >= 0          for every half-space r
///            u[index] = value             for every pin
///
/// Build through assemble(), which checks dimensions and pin uniqueness.
struct FilterProblem {
    Eigen::VectorXd u_desired;
    std::vector<LmiConstraint> lmis;
    std::vector<Halfspace> halfspaces;
    std::vector<Pin> pins;

    int inputs() const { return static_cast<int>(u_desired.size()); }
};

/// Throws DimensionError on inconsistent sizes or out-of-range pins, and
/// DuplicatePinError when an index is pinned twice. Feasibility is not judged here.
FilterProblem assemble(Eigen::VectorXd u_desired, std::vector<LmiConstraint> lmis,
                       std::vector<Halfspace> halfspaces = {}, std::vector<Pin> pins = {});

struct SolverSettings {
    double feas_tol = 1e-7;
    double rel_obj_tol = 1e-6;
    int max_iter = 500;  // total Newton steps across both phases
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string_view to_string(SolveStatus s) noexcept;

struct FilterSolution {
    Eigen::VectorXd u;
    double objective = 0.0;  // ||u - u_desired||^2
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<double> lmi_min_eigs;
    std::vector<double> halfspace_slacks;
    double solve_time = 0.0;  // seconds
    int iterations = 0;
    std::string message;

    bool ok() const noexcept { return status == SolveStatus::Optimal; }
};

/// Interior-point solve of the filter problem. Pins are substituted out before
/// solving, so pinned entries of the result are exact. Never throws for
/// infeasible or ill-conditioned instances; the status carries the verdict.
FilterSolution solve(const FilterProblem& problem, const SolverSettings& settings = {});

struct ResidualReport {
    std::vector<double> lmi_min_eigs;
    std::vector<double> halfspace_slacks;
    std::vector<double> pin_errors;
    std::vector<std::string> violations;  // labels of rows below -tol

    bool ok() const noexcept { return violations.empty(); }
};

/// Independent feasibility audit of `u`: recomputes lambda_min of every LMI and
/// every half-space slack and flags anything below -tol.
ResidualReport verify_solution(const FilterProblem& problem, const Eigen::VectorXd& u, double tol);

/// Unique minimizer of ||u - u_d||^2 s.t. b0 + b^T u >= 0.
/// Throws ZeroGradientError if b = 0 and b0 < 0.
Eigen::VectorXd closed_form_single_scalar(const Eigen::VectorXd& u_desired, double b0, const Eigen::VectorXd& b);

}  // namespace mcbf
