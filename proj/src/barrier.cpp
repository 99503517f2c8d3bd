#include "mcbf/barrier.hpp"

#include <stdexcept>
#include <string>

#include "mcbf/errors.hpp"

namespace mcbf {

namespace {

void require_nonnegative(double c_perp) {
    if (!(c_perp >= 0.0)) throw std::invalid_argument("c_perp must be >= 0");
}

LmiConstraint with_shift(const MatrixBarrierEval& ev, SymMatrix shift, std::string label) {
    ev.validate();
    return {ev.lfh + shift, ev.lgh, std::move(label)};
}

}  // namespace

SymMatrix MatrixBarrierEval::derivative(const Eigen::VectorXd& u) const {
    if (u.size() != inputs()) throw DimensionError("MatrixBarrierEval::derivative: input size mismatch");
    Eigen::MatrixXd d = lfh.mat();
    for (int i = 0; i < inputs(); ++i) d += u(i) * lgh[static_cast<std::size_t>(i)].mat();
    return SymMatrix(d);
}

void MatrixBarrierEval::validate() const {
    if (lfh.dim() != h.dim()) throw DimensionError("MatrixBarrierEval: L_f H dimension differs from H");
    for (const auto& g : lgh) {
        if (g.dim() != h.dim()) throw DimensionError("MatrixBarrierEval: L_g H dimension differs from H");
    }
}

SymMatrix LmiConstraint::evaluate(const Eigen::VectorXd& u) const {
    if (u.size() != inputs()) {
        throw DimensionError("LmiConstraint '" + label + "': expected " + std::to_string(inputs()) +
                             " inputs, got " + std::to_string(u.size()));
    }
    Eigen::MatrixXd m = a0.mat();
    for (int i = 0; i < inputs(); ++i) m += u(i) * ai[static_cast<std::size_t>(i)].mat();
    return SymMatrix(m);
}

void LmiConstraint::validate() const {
    for (const auto& a : ai) {
        if (a.dim() != a0.dim()) throw DimensionError("LmiConstraint '" + label + "': block dimension mismatch");
    }
}

LmiConstraint build_exponential_sd(const MatrixBarrierEval& ev, double c_alpha, std::string label) {
    if (!(c_alpha > 0.0)) throw std::invalid_argument("c_alpha must be > 0");
    return with_shift(ev, c_alpha * ev.h, std::move(label));
}

LmiConstraint build_indefinite(const MatrixBarrierEval& ev, const ClassKe& alpha, double c_perp, std::string label) {
    require_nonnegative(c_perp);
    const int p = ev.dim();
    const double top = max_eig(ev.h);
    const SymMatrix eye = SymMatrix::identity(p);
    SymMatrix shift = alpha(top) * eye;
    if (c_perp > 0.0) shift += c_perp * (top * eye - ev.h);
    return with_shift(ev, std::move(shift), std::move(label));
}

LmiConstraint build_general(const MatrixBarrierEval& ev, const ClassKe& alpha, std::string label) {
    return with_shift(ev, apply_class_k(ev.h, alpha), std::move(label));
}

LmiConstraint build_smallest_eig(const MatrixBarrierEval& ev, const ClassKe& alpha, double c_perp,
                                 std::string label) {
    require_nonnegative(c_perp);
    const int p = ev.dim();
    const double bottom = min_eig(ev.h);
    const SymMatrix eye = SymMatrix::identity(p);
    SymMatrix shift = alpha(bottom) * eye;
    if (c_perp > 0.0) shift += c_perp * (ev.h - bottom * eye);
    return with_shift(ev, std::move(shift), std::move(label));
}

MatrixBarrierEval diag_from_scalars(std::span<const ScalarBarrierEval> bars, bool negate) {
    if (bars.empty()) throw EmptyCompositionError("diag_from_scalars: no scalar barriers given");
    const int m = bars.front().inputs();
    for (const auto& b : bars) {
        if (b.inputs() != m) throw DimensionError("diag_from_scalars: scalar barriers disagree on input dimension");
    }
    const int p = static_cast<int>(bars.size());
    const double sign = negate ? -1.0 : 1.0;

    Eigen::VectorXd h(p), lfh(p);
    Eigen::MatrixXd lgh(p, m);
    for (int i = 0; i < p; ++i) {
        const auto& b = bars[static_cast<std::size_t>(i)];
        h(i) = sign * b.h;
        lfh(i) = sign * b.lfh;
        lgh.row(i) = sign * b.lgh.transpose();
    }

    std::vector<SymMatrix> channels;
    channels.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) channels.push_back(SymMatrix::diagonal(lgh.col(k)));
    return {SymMatrix::diagonal(h), SymMatrix::diagonal(lfh), std::move(channels)};
}

Halfspace scalar_to_halfspace(const ScalarBarrierEval& ev, const ClassKe& alpha, std::string label) {
    return {ev.lfh + alpha(ev.h), ev.lgh, std::move(label)};
}

}  // namespace mcbf
