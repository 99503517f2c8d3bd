#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcbf/class_k.hpp"
#include "mcbf/symmat.hpp"

namespace mcbf {

/// Pointwise scalar barrier data: h, L_f h and the per-input row L_g h.
struct ScalarBarrierEval {
    double h = 0.0;
    double lfh = 0.0;
    Eigen::VectorXd lgh;

    int inputs() const { return static_cast<int>(lgh.size()); }
};

/// Pointwise matrix barrier data: H, L_f H and one L_{g_i} H per input channel.
struct MatrixBarrierEval {
    SymMatrix h;
    SymMatrix lfh;
    std::vector<SymMatrix> lgh;

    int dim() const { return h.dim(); }
    int inputs() const { return static_cast<int>(lgh.size()); }

    /// Hdot(u) = L_f H + sum_i u_i L_{g_i} H.
    SymMatrix derivative(const Eigen::VectorXd& u) const;

    /// Throws DimensionError if any block size disagrees with H.
    void validate() const;
};

/// Affine matrix inequality A0 + sum_i u_i A_i >= 0.
struct LmiConstraint {
    SymMatrix a0;
    std::vector<SymMatrix> ai;
    std::string label;

    int dim() const { return a0.dim(); }
    int inputs() const { return static_cast<int>(ai.size()); }

    SymMatrix evaluate(const Eigen::VectorXd& u) const;
    void validate() const;
};

/// Scalar inequality b0 + b^T u >= 0.
struct Halfspace {
    double b0 = 0.0;
    Eigen::VectorXd b;
    std::string label;

    int inputs() const { return static_cast<int>(b.size()); }
    double slack(const Eigen::VectorXd& u) const { return b0 + b.dot(u); }
};

/// Hdot(u) >= -c_alpha H.
LmiConstraint build_exponential_sd(const MatrixBarrierEval& ev, double c_alpha, std::string label = "exponential_sd");

/// Hdot(u) >= -alpha(lambda_max) I - c_perp (lambda_max I - H), keeps H from becoming negative definite.
LmiConstraint build_indefinite(const MatrixBarrierEval& ev, const ClassKe& alpha, double c_perp,
                               std::string label = "indefinite");

/// Hdot(u) >= -alpha(H), with alpha applied to the spectrum of H.
LmiConstraint build_general(const MatrixBarrierEval& ev, const ClassKe& alpha, std::string label = "general");

/// Hdot(u) >= -alpha(lambda_min) I - c_perp (H - lambda_min I).
LmiConstraint build_smallest_eig(const MatrixBarrierEval& ev, const ClassKe& alpha, double c_perp,
                                 std::string label = "smallest_eig");

/// Stacks scalar barriers on a diagonal. negate=false is the AND composition
/// (H_ii = h_i); negate=true flips every sign (H_ii = -h_i) for OR composition
/// under the indefinite condition.
MatrixBarrierEval diag_from_scalars(std::span<const ScalarBarrierEval> bars, bool negate);

/// L_f h + L_g h u >= -alpha(h) as a half-space row.
Halfspace scalar_to_halfspace(const ScalarBarrierEval& ev, const ClassKe& alpha, std::string label = {});

}  // namespace mcbf
