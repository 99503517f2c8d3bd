#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mcbf/errors.hpp"
#include "mcbf/filter.hpp"
#include "mcbf/scenarios.hpp"
#include "oracles.hpp"

using namespace mcbf;

namespace {

constexpr double kE = std::numbers::e;

SwarmState pair_at(double distance) { return {Eigen::Vector4d(0.0, 0.0, distance, 0.0), 0.0}; }

SwarmState equilateral(double side) {
    Eigen::VectorXd x(6);
    x << 0.0, 0.0, side, 0.0, 0.5 * side, 0.5 * std::sqrt(3.0) * side;
    return {x, 0.0};
}

// Random 5-agent state with every pair inside range, away from the cutoff and from collision.
SwarmState random_in_range(std::mt19937& rng, double R) {
    std::uniform_real_distribution<double> u(-0.45, 0.45);
    for (;;) {
        SwarmState s{Eigen::VectorXd(10), 0.0};
        for (int k = 0; k < 10; ++k) s.x(k) = u(rng);
        bool ok = true;
        for (int i = 0; i < 5 && ok; ++i) {
            for (int j = i + 1; j < 5 && ok; ++j) {
                const double d = (s.position(i) - s.position(j)).norm();
                ok = d > 0.05 && d < R - 1e-3;
            }
        }
        if (ok) return s;
    }
}

Eigen::VectorXd flat(const SymMatrix& m) { return m.mat().reshaped(); }

// Largest |analytic - fd| relative to max(1, |analytic|) over every entry.
double gradient_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic.reshaped()(i);
        worst = std::max(worst, std::abs(a - fd.reshaped()(i)) / std::max(1.0, std::abs(a)));
    }
    return worst;
}

Eigen::MatrixXd stacked_lgh(const MatrixBarrierEval& ev) {
    Eigen::MatrixXd out(ev.dim() * ev.dim(), ev.inputs());
    for (int c = 0; c < ev.inputs(); ++c) out.col(c) = flat(ev.lgh[static_cast<std::size_t>(c)]);
    return out;
}

}  // namespace

TEST(Adjacency, Examples) {
    const double R = 1.3;
    EXPECT_NEAR(adjacency(pair_at(0.0), R).mat()(0, 1), kE - 1.0, 1e-12);
    EXPECT_EQ(adjacency(pair_at(R), R).mat()(0, 1), 0.0);
    EXPECT_NEAR(adjacency(pair_at(R / std::sqrt(2.0)), R).mat()(0, 1), 0.648721, 1e-6);
    EXPECT_EQ(adjacency(pair_at(2.0 * R), R).mat()(0, 1), 0.0);
}

TEST(Adjacency, SymmetricZeroDiagonalBounded) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        SwarmState s{Eigen::VectorXd(10), 0.0};
        for (int k = 0; k < 10; ++k) s.x(k) = u(rng);
        const Eigen::MatrixXd a = adjacency(s, 1.3).mat();
        EXPECT_EQ((a - a.transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(a.diagonal().cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(a.minCoeff(), 0.0);
        EXPECT_LE(a.maxCoeff(), kE - 1.0);
    }
}

TEST(Adjacency, CutoffContinuity) {
    const double R = 1.3;
    const double inside = adjacency(pair_at(R - 1e-9), R).mat()(0, 1);
    const double outside = adjacency(pair_at(R + 1e-9), R).mat()(0, 1);
    EXPECT_LT(std::abs(inside - outside), 1e-7);
}

TEST(Laplacian, Examples) {
    const double a = 0.7;
    Eigen::Matrix2d adj;
    adj << 0, a, a, 0;
    const auto lap = laplacian(SymMatrix(adj));
    Eigen::Matrix2d want;
    want << a, -a, -a, a;
    EXPECT_EQ((lap.mat() - want).cwiseAbs().maxCoeff(), 0.0);
    const auto ed = eig_sym(lap);
    EXPECT_NEAR(ed.values(0), 0.0, 1e-15);
    EXPECT_NEAR(ed.values(1), 2.0 * a, 1e-15);

    const auto zero = laplacian(SymMatrix::zero(2));
    EXPECT_EQ(eig_sym(zero).values(1), 0.0);
}

TEST(Laplacian, OnesInNullspace) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = random_in_range(rng, 1.3);
        const auto lap = laplacian(adjacency(s, 1.3));
        EXPECT_LT((lap.mat() * Eigen::VectorXd::Ones(5)).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(eig_sym(lap).values(0), 0.0, 1e-12);
    }
}

TEST(ConnectivityBarrier, CoincidentPair) {
    ConnectivityParams params;
    const auto ev = connectivity_barrier(pair_at(0.0), params);
    const auto vals = eig_sym(ev.h).values;
    EXPECT_NEAR(vals(0), 0.0, 1e-14);
    EXPECT_NEAR(vals(1), 2.0 * (kE - 1.0) - 0.1, 1e-12);
    EXPECT_EQ(ev.lfh.mat().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ev.inputs(), 4);
}

TEST(ConnectivityBarrier, SpectralSplit) {
    ConnectivityParams params;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    int connected = 0;
    int disconnected = 0;
    for (int trial = 0; trial < 200; ++trial) {
        SwarmState s{Eigen::VectorXd(10), 0.0};
        for (int k = 0; k < 10; ++k) s.x(k) = u(rng);
        const auto ev = connectivity_barrier(s, params);
        EXPECT_LT((ev.h.mat() * Eigen::VectorXd::Ones(5)).cwiseAbs().maxCoeff(), 1e-14);

        const Eigen::VectorXd lam_l = eig_sym(laplacian(adjacency(s, params.R))).values;
        const Eigen::VectorXd lam_h = eig_sym(ev.h).values;
        // H has 0 on span(1) and lambda_j(L) - eps on its complement.
        std::vector<double> want{0.0};
        for (int j = 1; j < 5; ++j) want.push_back(lam_l(j) - params.eps);
        std::sort(want.begin(), want.end());
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(lam_h(j), want[static_cast<std::size_t>(j)], 1e-12);

        const bool psd = lam_h(0) >= -1e-12;
        EXPECT_EQ(psd, lam_l(1) >= params.eps - 1e-12);
        (psd ? connected : disconnected)++;
    }
    EXPECT_GT(connected, 0);
    EXPECT_GT(disconnected, 0);
}

TEST(ConnectivityBarrier, OutOfRangePairsContributeNothing) {
    ConnectivityParams params;
    // Agents 0 and 1 in range; agent 2 far from both.
    Eigen::VectorXd x(6);
    x << 0.0, 0.0, 1.0, 0.0, 5.0, 5.0;
    const auto ev = connectivity_barrier({x, 0.0}, params);
    for (int axis = 0; axis < 2; ++axis) {
        EXPECT_EQ(ev.lgh[static_cast<std::size_t>(channel(2, axis))].mat().cwiseAbs().maxCoeff(), 0.0);
    }
    for (int c = 0; c < 6; ++c) {
        const Eigen::MatrixXd g = ev.lgh[static_cast<std::size_t>(c)].mat();
        EXPECT_EQ(g.row(2).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(g.col(2).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(GradientAudit, ConnectivityBarrier) {
    ConnectivityParams params;
    std::mt19937 rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_in_range(rng, params.R);
        const auto fd = oracle::central_difference(
            [&](const Eigen::VectorXd& x) { return flat(connectivity_barrier({x, 0.0}, params).h); }, s.x, 1e-6);
        worst = std::max(worst, gradient_error(stacked_lgh(connectivity_barrier(s, params)), fd));
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(GradientAudit, CollisionBarriers) {
    std::mt19937 rng(13);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_in_range(rng, 1.3);
        const auto values = [](const Eigen::VectorXd& x) {
            const auto bars = collision_barriers({x, 0.0}, 0.25);
            Eigen::VectorXd h(static_cast<Eigen::Index>(bars.size()));
            for (std::size_t k = 0; k < bars.size(); ++k) h(static_cast<Eigen::Index>(k)) = bars[k].h;
            return h;
        };
        const auto bars = collision_barriers(s, 0.25);
        Eigen::MatrixXd analytic(static_cast<Eigen::Index>(bars.size()), 10);
        for (std::size_t k = 0; k < bars.size(); ++k) analytic.row(static_cast<Eigen::Index>(k)) = bars[k].lgh;
        worst = std::max(worst, gradient_error(analytic, oracle::central_difference(values, s.x, 1e-6)));
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(GradientAudit, ObstacleBarriers) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const std::vector<ObstacleSpec> specs{
        Disk2d{{0.5, -0.2}, 1.0},
        Box2d::axis_aligned({-1.0, -0.5}, {1.0, 0.5}),
        Box2d{{{1.0, 1.0}, {-1.0, 0.2}, {0.1, -1.0}}, {1.0, 1.0, 1.0}},
        Cylinder3d{{0.0, 0.0, 1.0}, 0.8, 0.5},
    };
    double worst = 0.0;
    for (const auto& spec : specs) {
        const int dim = obstacle_dim(spec);
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd p(dim);
            for (int k = 0; k < dim; ++k) p(k) = u(rng);
            const auto fd = oracle::central_difference(
                [&](const Eigen::VectorXd& q) { return flat(obstacle_barrier(q, spec).h); }, p, 1e-6);
            worst = std::max(worst, gradient_error(stacked_lgh(obstacle_barrier(p, spec)), fd));
        }
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(GradientAudit, FiedlerBarrierAwayFromCrossings) {
    ConnectivityParams params;
    std::mt19937 rng(19);
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
        const auto s = random_in_range(rng, params.R);
        const auto lam = eig_sym(laplacian(adjacency(s, params.R))).values;
        if (lam(2) - lam(1) < 1e-2) continue;  // not differentiable at a repeated lambda_2
        const auto fd = oracle::central_difference(
            [&](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, fiedler_barrier({x, 0.0}, params).h); },
            s.x, 1e-6);
        worst = std::max(worst, gradient_error(fiedler_barrier(s, params).lgh.transpose(), fd));
        ++checked;
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(CollisionBarriers, Examples) {
    EXPECT_NEAR(collision_barriers(pair_at(0.5), 0.25)[0].h, 0.0, 1e-15);
    EXPECT_NEAR(collision_barriers(pair_at(1.0), 0.25)[0].h, 0.75, 1e-15);
    EXPECT_EQ(collision_barriers(paper_initial_state(), 0.25).size(), 10u);

    const auto bar = collision_barriers(pair_at(1.0), 0.25)[0];
    EXPECT_EQ(bar.lgh, Eigen::Vector4d(-2.0, 0.0, 2.0, 0.0));
    EXPECT_THROW(collision_barriers(pair_at(1.0), 0.0), std::invalid_argument);
}

TEST(DemoReferences, Examples) {
    const auto r0 = paper_references(0.0);
    EXPECT_NEAR(r0.pos(0), 0.0, 1e-15);
    EXPECT_NEAR(r0.pos(1), 0.0, 1e-15);
    const auto r5 = paper_references(5.0);
    EXPECT_NEAR(r5.pos(0), 1.0, 1e-15);
    EXPECT_NEAR(r5.pos(1), -1.0, 1e-15);
    EXPECT_NEAR(r5.rate(0), 0.0, 1e-15);
    EXPECT_NEAR(r5.rate(1), 0.0, 1e-15);
    EXPECT_NEAR(r0.pos(2), -std::sqrt(2.0) / 2.0, 1e-15);
    EXPECT_NEAR(r0.pos(3), std::sqrt(2.0) / 2.0, 1e-15);
    EXPECT_NEAR(r0.pos(8), 0.60711, 1e-5);
    EXPECT_NEAR(r0.pos(9), -0.70711, 1e-5);
    EXPECT_EQ(r5.rate.tail(8).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DemoReferences, RateMatchesDerivative) {
    for (double t : {0.3, 1.7, 4.2, 8.9}) {
        const Eigen::VectorXd fd = (paper_references(t + 1e-6).pos - paper_references(t - 1e-6).pos) / 2e-6;
        EXPECT_LT((fd - paper_references(t).rate).cwiseAbs().maxCoeff(), 1e-8) << t;
    }
}

TEST(NominalTracking, Examples) {
    SwarmState s{Eigen::Vector2d(0.0, 0.0), 0.0};
    References refs{Eigen::Vector2d(1.0, -1.0), Eigen::Vector2d::Zero()};
    EXPECT_EQ(nominal_tracking(s, refs, 1.0), Eigen::VectorXd(Eigen::Vector2d(1.0, -1.0)));

    const auto paper = paper_references(0.0);
    EXPECT_EQ(nominal_tracking(paper_initial_state(), paper, 1.0).cwiseAbs().maxCoeff(), 0.0);

    EXPECT_THROW(nominal_tracking(paper_initial_state(), refs, 1.0), DimensionError);
}

TEST(Params, ValidateNamesTheField) {
    ConnectivityParams p;
    EXPECT_NO_THROW(p.validate());
    p.R = -1.0;
    try {
        p.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "R");
    }
    p = {};
    p.r_agent = 0.7;  // 2 r >= R
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Obstacle, DiskExamples) {
    const ObstacleSpec disk = Disk2d{};
    const auto outside = obstacle_barrier(Eigen::Vector2d(2.0, 0.0), disk);
    Eigen::Matrix2d want;
    want << 1.0, 0.0, 0.0, -3.0;
    EXPECT_EQ((outside.h.mat() - want).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(max_eig(outside.h), 1.0, 1e-15);
    const auto center = obstacle_barrier(Eigen::Vector2d(0.0, 0.0), disk);
    EXPECT_EQ((center.h.mat() + Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(max_eig(obstacle_barrier(Eigen::Vector2d(1.0, 0.0), disk).h), 0.0, 1e-15);
    EXPECT_THROW(obstacle_barrier(Eigen::Vector3d(0.0, 0.0, 0.0), disk), DimensionError);
}

TEST(Obstacle, SafeIffOutside) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    const Disk2d disk{{0.3, 0.1}, 1.0};
    const auto box = Box2d::axis_aligned({-1.0, -0.5}, {1.0, 0.5});
    const Cylinder3d cyl{{0.0, 0.0, 0.0}, 1.0, 0.5};
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Vector3d p(u(rng), u(rng), u(rng));
        const bool out_disk = (p.head<2>() - disk.center).norm() >= disk.radius;
        EXPECT_EQ(max_eig(obstacle_barrier(p.head<2>(), disk).h) >= 0.0, out_disk);
        const bool out_box = std::abs(p(0)) >= 1.0 || std::abs(p(1)) >= 0.5;
        EXPECT_EQ(max_eig(obstacle_barrier(p.head<2>(), box).h) >= 0.0, out_box);
        const bool out_cyl = p.head<2>().norm() >= 1.0 || std::abs(p(2)) >= 0.5;
        EXPECT_EQ(max_eig(obstacle_barrier(Eigen::VectorXd(p), cyl).h) >= 0.0, out_cyl);
    }
}

TEST(Obstacle, Validation) {
    EXPECT_THROW(validate_obstacle(Disk2d{{0, 0}, 0.0}), ConfigError);
    EXPECT_THROW(validate_obstacle(Cylinder3d{{0, 0, 0}, 1.0, -1.0}), ConfigError);
    EXPECT_NO_THROW(validate_obstacle(Box2d::axis_aligned({0, 0}, {1, 1})));
    // A half-plane and a wedge do not bound anything.
    EXPECT_THROW(validate_obstacle(Box2d{{{1, 0}, {0, 1}}, {1, 1}}), ConfigError);
    EXPECT_THROW(validate_obstacle(Box2d{{{1, 0}, {0, 1}, {1, 1}}, {1, 1, 1}}), ConfigError);
    EXPECT_THROW(validate_obstacle(Box2d{{{1, 0}}, {1, 2}}), ConfigError);
}

TEST(Baseline, InactiveReturnsDesired) {
    ConnectivityParams params;
    const auto s = paper_initial_state();
    const Eigen::VectorXd u_d = Eigen::VectorXd::Zero(10);
    const auto sol = baseline_eigenvalue_filter(s, params, u_d, {});
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_EQ(sol.u, u_d);
}

TEST(Baseline, TwoAgentsAgreeWithMcbf) {
    ConnectivityParams params;
    const auto s = pair_at(1.0);
    const Eigen::Vector4d u_d(-1.0, 0.3, 1.0, -0.2);  // pulling apart
    const auto base = baseline_eigenvalue_filter(s, params, u_d, {});
    const auto mcbf = solve(assemble(u_d, {build_exponential_sd(connectivity_barrier(s, params), params.c_alpha)}));
    ASSERT_EQ(base.status, SolveStatus::Optimal);
    ASSERT_EQ(mcbf.status, SolveStatus::Optimal);
    EXPECT_GT((base.u - u_d).norm(), 1e-2);  // the constraint is active
    EXPECT_LT((base.u - mcbf.u).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Baseline, ChattersAcrossEigenvalueCrossing) {
    ConnectivityParams params;
    const double side = 1.0;
    const auto tri = equilateral(side);
    const auto lam = eig_sym(laplacian(adjacency(tri, params.R))).values;
    ASSERT_NEAR(lam(1), lam(2), 1e-12);
    params.eps = lam(1) - 0.01;

    // Straddle the crossing by moving agent 2 along its median.
    const double gap = 1e-6;
    SwarmState lo = tri, hi = tri;
    lo.x(5) -= 0.5 * gap;
    hi.x(5) += 0.5 * gap;

    // Every agent moving radially outward from the centroid.
    Eigen::VectorXd u_d(6);
    const Eigen::Vector2d centroid(0.5 * side, std::sqrt(3.0) / 6.0 * side);
    for (int i = 0; i < 3; ++i) u_d.segment<2>(2 * i) = (tri.position(i) - centroid).normalized();

    const auto a = baseline_eigenvalue_filter(lo, params, u_d, {});
    const auto b = baseline_eigenvalue_filter(hi, params, u_d, {});
    ASSERT_EQ(a.status, SolveStatus::Optimal);
    ASSERT_EQ(b.status, SolveStatus::Optimal);
    EXPECT_GT((a.u - b.u).norm(), 10.0 * gap * params.k_gain);
    EXPECT_GT((a.u - b.u).norm(), 1e-2);

    // The matrix filter is continuous across the same crossing.
    const auto mcbf = [&](const SwarmState& s) {
        return solve(assemble(u_d, {build_exponential_sd(connectivity_barrier(s, params), params.c_alpha)})).u;
    };
    EXPECT_LT((mcbf(lo) - mcbf(hi)).norm(), 1e-4);
}

TEST(MinPairDistance, Examples) {
    EXPECT_NEAR(min_pair_distance(pair_at(0.7)), 0.7, 1e-15);
    EXPECT_TRUE(std::isinf(min_pair_distance({Eigen::Vector2d(1.0, 2.0), 0.0})));
}
