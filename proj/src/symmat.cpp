#include "mcbf/symmat.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mcbf/errors.hpp"

namespace mcbf {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw DimensionError("SymMatrix requires a non-empty square matrix, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(int p) {
    if (p < 1) throw DimensionError("SymMatrix dimension must be >= 1");
    return {Eigen::MatrixXd::Zero(p, p), Trusted{}};
}

SymMatrix SymMatrix::identity(int p) {
    if (p < 1) throw DimensionError("SymMatrix dimension must be >= 1");
    return {Eigen::MatrixXd::Identity(p, p), Trusted{}};
}

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& d) {
    if (d.size() < 1) throw DimensionError("SymMatrix dimension must be >= 1");
    return {Eigen::MatrixXd(d.asDiagonal()), Trusted{}};
}

SymMatrix SymMatrix::outer(const Eigen::VectorXd& v) {
    if (v.size() < 1) throw DimensionError("SymMatrix dimension must be >= 1");
    return {v * v.transpose(), Trusted{}};
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
    if (o.dim() != dim()) throw DimensionError("SymMatrix sum: dimension mismatch");
    m_ += o.m_;
    return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
    if (o.dim() != dim()) throw DimensionError("SymMatrix difference: dimension mismatch");
    m_ -= o.m_;
    return *this;
}

SymMatrix& SymMatrix::operator*=(double s) noexcept {
    m_ *= s;
    return *this;
}

EigenDecomposition eig_sym(const SymMatrix& h) {
    if (!h.mat().allFinite()) throw NumericalFailure("eig_sym: non-finite matrix entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.mat());
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eig_sym: symmetric eigensolver did not converge");
    }
    // Eigen returns eigenvalues in increasing order.
    return {es.eigenvalues(), es.eigenvectors()};
}

double min_eig(const SymMatrix& h) {
    if (h.dim() == 1) return h(0, 0);
    return eig_sym(h).min();
}

double max_eig(const SymMatrix& h) {
    if (h.dim() == 1) return h(0, 0);
    return eig_sym(h).max();
}

SymMatrix apply_spectral(const SymMatrix& h, const std::function<double(double)>& f) {
    const auto ed = eig_sym(h);
    Eigen::VectorXd mapped(ed.values.size());
    for (Eigen::Index j = 0; j < ed.values.size(); ++j) mapped(j) = f(ed.values(j));
    return SymMatrix(ed.vectors * mapped.asDiagonal() * ed.vectors.transpose());
}

SymMatrix apply_class_k(const SymMatrix& h, const ClassKe& alpha) {
    return apply_spectral(h, [&alpha](double r) { return alpha(r); });
}

double frobenius(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("frobenius: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
    }
    return a.mat().cwiseProduct(b.mat()).sum();
}

bool is_psd(const SymMatrix& h, double tol) {
    if (tol < 0.0) throw std::invalid_argument("is_psd: tol must be >= 0");
    return min_eig(h) >= -tol;
}

}  // namespace mcbf
