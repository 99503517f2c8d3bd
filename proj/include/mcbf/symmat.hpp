#pragma once

#include <functional>

#include <Eigen/Dense>

#include "mcbf/class_k.hpp"

namespace mcbf {

/// Dense symmetric p x p matrix. Construction symmetrizes the input as
/// (M + M^T) / 2, so every instance is exactly symmetric.
class SymMatrix {
public:
    /// Throws DimensionError for empty or non-square input.
    explicit SymMatrix(const Eigen::MatrixXd& m);

    static SymMatrix zero(int p);
    static SymMatrix identity(int p);
    static SymMatrix diagonal(const Eigen::VectorXd& d);
    static SymMatrix outer(const Eigen::VectorXd& v);  // v v^T

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& mat() const noexcept { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    /// Largest absolute entry.
    double max_abs() const noexcept { return m_.cwiseAbs().maxCoeff(); }

    SymMatrix& operator+=(const SymMatrix& o);
    SymMatrix& operator-=(const SymMatrix& o);
    SymMatrix& operator*=(double s) noexcept;

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
    friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
    friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

    bool operator==(const SymMatrix& o) const { return m_ == o.m_; }

private:
    struct Trusted {};
    SymMatrix(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}

    Eigen::MatrixXd m_;
};

struct EigenDecomposition {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal, column j pairs with values[j]

    double min() const { return values(0); }
    double max() const { return values(values.size() - 1); }
};

/// Symmetric eigendecomposition with ascending eigenvalues. Eigenvectors are
/// only determined up to sign and rotation inside repeated eigenspaces.
/// Throws NumericalFailure when the underlying routine does not converge.
EigenDecomposition eig_sym(const SymMatrix& h);

double min_eig(const SymMatrix& h);
double max_eig(const SymMatrix& h);

/// V f(Lambda) V^T for a scalar function f applied to each eigenvalue.
SymMatrix apply_spectral(const SymMatrix& h, const std::function<double(double)>& f);

/// Matrix class-K function: alpha applied to the spectrum of `h`.
SymMatrix apply_class_k(const SymMatrix& h, const ClassKe& alpha);

/// Frobenius inner product sum_ij A_ij B_ij. Throws DimensionError on mismatch.
double frobenius(const SymMatrix& a, const SymMatrix& b);

/// lambda_min(h) >= -tol.
bool is_psd(const SymMatrix& h, double tol = 0.0);

}  // namespace mcbf
