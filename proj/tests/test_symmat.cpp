#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mcbf/errors.hpp"
#include "mcbf/symmat.hpp"
#include "oracles.hpp"

using namespace mcbf;

TEST(SymMatrix, ConstructionSymmetrizes) {
    Eigen::Matrix2d m;
    m << 1.0, 2.0, 4.0, 3.0;
    const SymMatrix s(m);
    EXPECT_EQ(s(0, 1), 3.0);
    EXPECT_EQ(s(1, 0), 3.0);
    EXPECT_EQ(s.mat(), s.mat().transpose());
}

TEST(SymMatrix, RejectsEmptyAndNonSquare) {
    EXPECT_THROW(SymMatrix(Eigen::MatrixXd(0, 0)), DimensionError);
    EXPECT_THROW(SymMatrix(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}

TEST(SymMatrix, RandomInputsStayExactlySymmetric) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd m(5, 5);
        for (int i = 0; i < 25; ++i) m(i / 5, i % 5) = d(rng);
        const SymMatrix s(m);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) EXPECT_LE(std::abs(s(i, j) - s(j, i)), 1e-12 * (1.0 + std::abs(s(i, j))));
        }
    }
}

TEST(EigSym, DiagonalInput) {
    const auto ed = eig_sym(SymMatrix::diagonal(Eigen::Vector3d(3, 1, 2)));
    EXPECT_EQ(ed.values, Eigen::Vector3d(1, 2, 3));
    // A signed permutation: every entry is 0 or +-1.
    EXPECT_TRUE((ed.vectors.cwiseAbs().array() == 0.0 || ed.vectors.cwiseAbs().array() == 1.0).all());
}

TEST(EigSym, TwoByTwoClosedForm) {
    Eigen::Matrix2d m;
    m << 1, 2, 2, 1;
    const auto ed = eig_sym(SymMatrix(m));
    EXPECT_NEAR(ed.values(0), -1.0, 1e-14);
    EXPECT_NEAR(ed.values(1), 3.0, 1e-14);
}

TEST(EigSym, ConnectedPairLaplacianHasZeroAlongOnes) {
    Eigen::Matrix2d lap;
    lap << 0.7, -0.7, -0.7, 0.7;
    const auto ed = eig_sym(SymMatrix(lap));
    EXPECT_NEAR(ed.min(), 0.0, 1e-15);
    const Eigen::Vector2d v = ed.vectors.col(0);
    EXPECT_NEAR(std::abs(v(0) - v(1)), 0.0, 1e-12);
}

TEST(EigSym, NonFiniteInputFails) {
    Eigen::Matrix2d m;
    m << 1, std::nan(""), std::nan(""), 1;
    EXPECT_THROW(eig_sym(SymMatrix(m)), NumericalFailure);
}

TEST(EigSym, RandomReconstructionAndOrthonormality) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = 1 + trial % 8;
        const SymMatrix h(oracle::random_symmetric(p, rng, 10.0));
        const auto ed = eig_sym(h);
        for (int j = 1; j < p; ++j) EXPECT_LE(ed.values(j - 1), ed.values(j));
        const Eigen::MatrixXd ortho = ed.vectors.transpose() * ed.vectors - Eigen::MatrixXd::Identity(p, p);
        EXPECT_LE(ortho.cwiseAbs().maxCoeff(), 1e-10);
        const Eigen::MatrixXd recon = ed.vectors * ed.values.asDiagonal() * ed.vectors.transpose() - h.mat();
        EXPECT_LE(recon.cwiseAbs().maxCoeff(), 1e-9 * (1.0 + h.max_abs()));
        EXPECT_EQ(min_eig(h), ed.min());
        EXPECT_EQ(max_eig(h), ed.max());
    }
}

TEST(EigSym, MinEigIsLipschitz) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const SymMatrix h(oracle::random_symmetric(4, rng, 3.0));
        const SymMatrix e(oracle::random_symmetric(4, rng, 1e-3));
        const double norm2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e.mat()).eigenvalues().cwiseAbs().maxCoeff();
        EXPECT_LE(std::abs(min_eig(h + e) - min_eig(h)), norm2 + 1e-13);
    }
}

TEST(ApplyClassK, Examples) {
    EXPECT_LE((apply_class_k(SymMatrix::identity(4), ClassKe::cubic(1.0)).mat() - Eigen::MatrixXd::Identity(4, 4))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-14);
    const auto r = apply_class_k(SymMatrix::diagonal(Eigen::Vector2d(4, -1)), ClassKe::linear(2.0));
    EXPECT_NEAR(r(0, 0), 8.0, 1e-14);
    EXPECT_NEAR(r(1, 1), -2.0, 1e-14);
    EXPECT_NEAR(r(0, 1), 0.0, 1e-14);
}

TEST(ApplyClassK, SpectralMappingAndCommutation) {
    std::mt19937 rng(17);
    const ClassKe alphas[] = {ClassKe::linear(1.5), ClassKe::cubic(0.7), ClassKe::scaled_tanh(2.0, 0.5)};
    for (int trial = 0; trial < 300; ++trial) {
        const SymMatrix h(oracle::random_symmetric(3, rng, 2.0));
        const ClassKe& a = alphas[trial % 3];
        const SymMatrix r = apply_class_k(h, a);
        Eigen::VectorXd expect = eig_sym(h).values.unaryExpr([&](double v) { return a(v); });
        std::sort(expect.begin(), expect.end());
        EXPECT_LE((eig_sym(r).values - expect).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE((r.mat() * h.mat() - h.mat() * r.mat()).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(ApplyClassK, ContinuousThroughRepeatedEigenvalue) {
    for (const auto& a : {ClassKe::linear(1.0), ClassKe::cubic(1.0)}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double theta : {1e-2, 1e-4, 1e-6, 1e-8}) {
            Eigen::Matrix2d m;
            m << 1, theta, theta, 1;
            const double err =
                (apply_class_k(SymMatrix(m), a).mat() - a(1.0) * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
            EXPECT_LE(err, prev);
            prev = err;
        }
        EXPECT_LE(prev, 1e-6);
    }
}

TEST(ApplySpectral, IdentityFunctionReproducesInput) {
    std::mt19937 rng(19);
    const SymMatrix h(oracle::random_symmetric(6, rng));
    EXPECT_LE((apply_spectral(h, [](double v) { return v; }).mat() - h.mat()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Frobenius, Examples) {
    EXPECT_EQ(frobenius(SymMatrix::identity(2), SymMatrix::identity(2)), 2.0);
    Eigen::Matrix2d a;
    a << 5, 1, 1, 2;
    EXPECT_EQ(frobenius(SymMatrix::outer(Eigen::Vector2d(1, 0)), SymMatrix(a)), 5.0);
    EXPECT_THROW(frobenius(SymMatrix::identity(2), SymMatrix::identity(3)), DimensionError);
}

TEST(Frobenius, MatchesTraceOfProductAndQuadraticForm) {
    std::mt19937 rng(23);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const SymMatrix a(oracle::random_symmetric(4, rng));
        const SymMatrix b(oracle::random_symmetric(4, rng));
        EXPECT_NEAR(frobenius(a, b), (a.mat() * b.mat()).trace(), 1e-12);
        Eigen::Vector4d v(n(rng), n(rng), n(rng), n(rng));
        EXPECT_NEAR(frobenius(SymMatrix::outer(v), a), v.dot(a.mat() * v), 1e-12);
    }
}

TEST(IsPsd, Examples) {
    EXPECT_TRUE(is_psd(SymMatrix::identity(3)));
    EXPECT_FALSE(is_psd(SymMatrix::diagonal(Eigen::Vector2d(1, -1)), 0.0));
    EXPECT_TRUE(is_psd(SymMatrix::diagonal(Eigen::Vector2d(1, -1e-10)), 1e-9));
    EXPECT_THROW(is_psd(SymMatrix::identity(2), -1.0), std::invalid_argument);
}

TEST(IsPsd, Elliptope) {
    auto elliptope = [](double x1, double x2, double x3) {
        Eigen::Matrix3d m;
        m << 1, x1, x2, x1, 1, x3, x2, x3, 1;
        return SymMatrix(m);
    };
    EXPECT_TRUE(is_psd(elliptope(0, 0, 0)));
    EXPECT_FALSE(is_psd(elliptope(1, 1, -1)));
    // [[1,1,1],[1,1,-1],[1,-1,1]] has eigenvalues (-1, 2, 2).
    EXPECT_NEAR(min_eig(elliptope(1, 1, -1)), -1.0, 1e-12);
}
