#include "mcbf/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mcbf/errors.hpp"

namespace mcbf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfSqrt2 = std::numbers::sqrt2 / 2.0;

// (e_i - e_j)(e_i - e_j)^T scaled by w, added in place.
void add_edge(Eigen::MatrixXd& m, int i, int j, double w) {
    m(i, i) += w;
    m(j, j) += w;
    m(i, j) -= w;
    m(j, i) -= w;
}

SymMatrix diag2(double a, double b) { return SymMatrix::diagonal(Eigen::Vector2d(a, b)); }

}  // namespace

void ConnectivityParams::validate() const {
    if (!(R > 0.0)) throw ConfigError("R", "communication range must be > 0");
    if (!(eps >= 0.0)) throw ConfigError("eps", "must be >= 0");
    if (!(c_alpha > 0.0)) throw ConfigError("c_alpha", "must be > 0");
    if (!(c_collision > 0.0)) throw ConfigError("c_collision", "must be > 0");
    if (!(r_agent > 0.0)) throw ConfigError("r_agent", "must be > 0");
    if (!(2.0 * r_agent < R)) throw ConfigError("r_agent", "2 * r_agent must be below R");
    if (!(k_gain > 0.0)) throw ConfigError("k_gain", "must be > 0");
    if (priority_agent < 0) throw ConfigError("priority_agent", "must be >= 0");
}

References paper_references(double t) {
    References refs{Eigen::VectorXd(10), Eigen::VectorXd::Zero(10)};
    const double w = kPi / 5.0;
    const Eigen::Vector2d dir(0.5, -0.5);
    refs.pos.segment<2>(0) = (1.0 - std::cos(w * t)) * dir;
    refs.rate.segment<2>(0) = w * std::sin(w * t) * dir;
    refs.pos.segment<2>(2) = Eigen::Vector2d(-kHalfSqrt2, kHalfSqrt2);
    refs.pos.segment<2>(4) = Eigen::Vector2d(kHalfSqrt2, kHalfSqrt2);
    refs.pos.segment<2>(6) = Eigen::Vector2d(-kHalfSqrt2, -kHalfSqrt2);
    refs.pos.segment<2>(8) = Eigen::Vector2d((5.0 * std::numbers::sqrt2 - 1.0) / 10.0, -kHalfSqrt2);
    return refs;
}

SwarmState paper_initial_state() { return {paper_references(0.0).pos, 0.0}; }

SymMatrix adjacency(const SwarmState& s, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("adjacency: R must be > 0");
    const int p = s.agents();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const double d2 = (s.position(i) - s.position(j)).squaredNorm();
            if (d2 <= R * R) a(i, j) = a(j, i) = std::exp(1.0 - d2 / (R * R)) - 1.0;
        }
    }
    return SymMatrix(a);
}

SymMatrix laplacian(const SymMatrix& a) {
    Eigen::MatrixXd l = -a.mat();
    l.diagonal() = a.mat().rowwise().sum() - a.mat().diagonal();
    return SymMatrix(l);
}

MatrixBarrierEval connectivity_barrier(const SwarmState& s, const ConnectivityParams& params) {
    const int p = s.agents();
    const double R2 = params.R * params.R;
    const SymMatrix lap = laplacian(adjacency(s, params.R));
    Eigen::MatrixXd h = lap.mat();
    h.array() += params.eps / p;
    h.diagonal().array() -= params.eps;

    std::vector<Eigen::MatrixXd> grad(static_cast<std::size_t>(2 * p), Eigen::MatrixXd::Zero(p, p));
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const Eigen::Vector2d d = s.position(i) - s.position(j);
            const double d2 = d.squaredNorm();
            if (!(d2 < R2)) continue;  // gradient is taken as zero at and beyond the cutoff
            const double w = -(2.0 / R2) * std::exp(1.0 - d2 / R2);
            for (int axis = 0; axis < 2; ++axis) {
                add_edge(grad[static_cast<std::size_t>(channel(i, axis))], i, j, w * d(axis));
                add_edge(grad[static_cast<std::size_t>(channel(j, axis))], i, j, -w * d(axis));
            }
        }
    }
    MatrixBarrierEval ev{SymMatrix(h), SymMatrix::zero(p), {}};
    ev.lgh.reserve(grad.size());
    for (auto& g : grad) ev.lgh.emplace_back(g);
    return ev;
}

std::vector<ScalarBarrierEval> collision_barriers(const SwarmState& s, double r_agent) {
    if (!(r_agent > 0.0)) throw std::invalid_argument("collision_barriers: r_agent must be > 0");
    const int p = s.agents();
    std::vector<ScalarBarrierEval> out;
    out.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const Eigen::Vector2d d = s.position(i) - s.position(j);
            ScalarBarrierEval ev{d.squaredNorm() - 4.0 * r_agent * r_agent, 0.0, Eigen::VectorXd::Zero(2 * p)};
            ev.lgh.segment<2>(channel(i, 0)) = 2.0 * d;
            ev.lgh.segment<2>(channel(j, 0)) = -2.0 * d;
            out.push_back(std::move(ev));
        }
    }
    return out;
}

Eigen::VectorXd nominal_tracking(const SwarmState& s, const References& refs, double k_gain) {
    if (refs.pos.size() != s.x.size() || refs.rate.size() != s.x.size()) {
        throw DimensionError("nominal_tracking: reference size does not match the state");
    }
    return k_gain * (refs.pos - s.x) + refs.rate;
}

double min_pair_distance(const SwarmState& s) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.agents(); ++i) {
        for (int j = i + 1; j < s.agents(); ++j) best = std::min(best, (s.position(i) - s.position(j)).norm());
    }
    return best;
}

Box2d Box2d::axis_aligned(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
    return {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {hi(0), -lo(0), hi(1), -lo(1)}};
}

void validate_obstacle(const ObstacleSpec& spec) {
    if (const auto* disk = std::get_if<Disk2d>(&spec)) {
        if (!(disk->radius > 0.0)) throw ConfigError("obstacle.radius", "must be > 0");
    } else if (const auto* cyl = std::get_if<Cylinder3d>(&spec)) {
        if (!(cyl->radius > 0.0)) throw ConfigError("obstacle.radius", "must be > 0");
        if (!(cyl->half_height > 0.0)) throw ConfigError("obstacle.half_height", "must be > 0");
    } else {
        const auto& box = std::get<Box2d>(spec);
        if (box.normals.size() != box.offsets.size()) {
            throw ConfigError("obstacle.faces", "normals and offsets differ in count");
        }
        // Bounded iff the normals positively span the plane: every angular gap is below pi.
        std::vector<double> angles;
        for (const auto& a : box.normals) {
            if (!(a.norm() > 0.0)) throw ConfigError("obstacle.faces", "zero face normal");
            angles.push_back(std::atan2(a(1), a(0)));
        }
        if (angles.size() < 3) throw ConfigError("obstacle.faces", "a bounded polygon needs at least 3 faces");
        std::sort(angles.begin(), angles.end());
        double gap = angles.front() + 2.0 * kPi - angles.back();
        for (std::size_t k = 1; k < angles.size(); ++k) gap = std::max(gap, angles[k] - angles[k - 1]);
        if (!(gap < kPi)) throw ConfigError("obstacle.faces", "faces do not bound a region");
    }
}

int obstacle_dim(const ObstacleSpec& spec) { return std::holds_alternative<Cylinder3d>(spec) ? 3 : 2; }

MatrixBarrierEval obstacle_barrier(const Eigen::VectorXd& point, const ObstacleSpec& spec) {
    if (point.size() != obstacle_dim(spec)) {
        throw DimensionError("obstacle_barrier: point has dimension " + std::to_string(point.size()) + ", expected " +
                             std::to_string(obstacle_dim(spec)));
    }
    if (const auto* disk = std::get_if<Disk2d>(&spec)) {
        const double a = point(0) - disk->center(0);
        const double b = point(1) - disk->center(1);
        const double r = disk->radius;
        Eigen::Matrix2d h;
        h << a - r, -b, -b, -r - a;
        Eigen::Matrix2d gy;
        gy << 0, -1, -1, 0;
        return {SymMatrix(h), SymMatrix::zero(2), {diag2(1, -1), SymMatrix(gy)}};
    }
    if (const auto* cyl = std::get_if<Cylinder3d>(&spec)) {
        const Eigen::Vector3d d = point - cyl->center;
        const double r = cyl->radius;
        const double hh = cyl->half_height;
        Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
        h.topLeftCorner<2, 2>() << d(0) - r, -d(1), -d(1), -r - d(0);
        h(2, 2) = d(2) - hh;
        h(3, 3) = -hh - d(2);
        Eigen::Matrix4d gx = Eigen::Matrix4d::Zero(), gy = Eigen::Matrix4d::Zero(), gz = Eigen::Matrix4d::Zero();
        gx(0, 0) = 1.0;
        gx(1, 1) = -1.0;
        gy(0, 1) = gy(1, 0) = -1.0;
        gz(2, 2) = 1.0;
        gz(3, 3) = -1.0;
        return {SymMatrix(h), SymMatrix::zero(4), {SymMatrix(gx), SymMatrix(gy), SymMatrix(gz)}};
    }
    const auto& box = std::get<Box2d>(spec);
    std::vector<ScalarBarrierEval> faces;
    faces.reserve(box.normals.size());
    for (std::size_t k = 0; k < box.normals.size(); ++k) {
        faces.push_back({box.offsets[k] - box.normals[k].dot(point.head<2>()), 0.0, -box.normals[k]});
    }
    return diag_from_scalars(faces, true);
}

ScalarBarrierEval fiedler_barrier(const SwarmState& s, const ConnectivityParams& params) {
    const auto ev = connectivity_barrier(s, params);
    const auto ed = eig_sym(laplacian(adjacency(s, params.R)));
    const Eigen::VectorXd v2 = ed.vectors.col(1);
    ScalarBarrierEval out{ed.values(1) - params.eps, 0.0, Eigen::VectorXd(ev.inputs())};
    // dL/dx_c equals dH/dx_c: the eps terms are constant.
    for (int c = 0; c < ev.inputs(); ++c) out.lgh(c) = v2.dot(ev.lgh[static_cast<std::size_t>(c)].mat() * v2);
    return out;
}

FilterSolution baseline_eigenvalue_filter(const SwarmState& s, const ConnectivityParams& params,
                                          const Eigen::VectorXd& u_desired, const std::vector<Pin>& pins,
                                          const SolverSettings& settings) {
    std::vector<Halfspace> rows;
    rows.push_back(scalar_to_halfspace(fiedler_barrier(s, params), ClassKe::linear(params.c_alpha), "fiedler"));
    const auto alpha = ClassKe::linear(params.c_collision);
    const auto pairs = collision_barriers(s, params.r_agent);
    const int p = s.agents();
    std::size_t k = 0;
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            rows.push_back(scalar_to_halfspace(pairs[k++], alpha, "collision_" + std::to_string(i) + "_" + std::to_string(j)));
        }
    }
    return solve(assemble(u_desired, {}, std::move(rows), pins), settings);
}

}  // namespace mcbf
