#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mcbf/barrier.hpp"
#include "mcbf/filter.hpp"
#include "mcbf/symmat.hpp"

namespace mcbf {

/// Planar single-integrator swarm. Positions are stacked as x = [x_0, y_0, x_1, y_1, ...],
/// so input channel (agent i, axis a) has index 2i + a.
struct SwarmState {
    Eigen::VectorXd x;
    double t = 0.0;

    int agents() const { return static_cast<int>(x.size() / 2); }
    Eigen::Vector2d position(int i) const { return x.segment<2>(2 * i); }
};

constexpr int channel(int agent, int axis) { return 2 * agent + axis; }

struct ConnectivityParams {
    double R = 1.3;            // communication range [m]
    double eps = 0.1;          // connectivity margin on lambda_2(L)
    double c_alpha = 1.0;      // linear rate for the exponential condition
    double c_collision = 5.0;  // linear rate for the collision rows
    double r_agent = 0.25;     // collision radius [m]
    double k_gain = 1.0;       // nominal tracking gain [1/s]
    int priority_agent = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Per-agent reference positions and their time derivatives, stacked like SwarmState::x.
struct References {
    Eigen::VectorXd pos;
    Eigen::VectorXd rate;
};

/// Five-agent demonstration: agent 0 follows (1 - cos(pi t / 5)) (1/2, -1/2), agents 1-4 are static.
References paper_references(double t);

/// The demonstration starts at rest on its t = 0 references.
SwarmState paper_initial_state();

/// A_ij = exp(1 - |x_i - x_j|^2 / R^2) - 1 within range R, else 0.
SymMatrix adjacency(const SwarmState& s, double R);

/// L = D - A.
SymMatrix laplacian(const SymMatrix& a);

/// H = L + (eps/p) 1 1^T - eps I with one L_g H block per input channel. Drift is zero.
MatrixBarrierEval connectivity_barrier(const SwarmState& s, const ConnectivityParams& params);

/// h_ij = |x_i - x_j|^2 - 4 r^2 for every pair i < j, in lexicographic pair order.
std::vector<ScalarBarrierEval> collision_barriers(const SwarmState& s, double r_agent);

/// u_i = k (x_i,d - x_i) + xdot_i,d.
Eigen::VectorXd nominal_tracking(const SwarmState& s, const References& refs, double k_gain);

/// Smallest pairwise distance, +inf for fewer than two agents.
double min_pair_distance(const SwarmState& s);

// Obstacles for a single point robot. The safe set is the complement of the open obstacle,
// written as H(x) not negative definite.

struct Disk2d {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 1.0;
};

/// Convex polygon {x : a_i^T x <= b_i for all i}.
struct Box2d {
    std::vector<Eigen::Vector2d> normals;
    std::vector<double> offsets;

    static Box2d axis_aligned(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);
};

/// Finite cylinder along the third axis.
struct Cylinder3d {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 1.0;
    double half_height = 1.0;
};

using ObstacleSpec = std::variant<Disk2d, Box2d, Cylinder3d>;

/// Throws ConfigError for non-positive sizes or a polygon that is not bounded.
void validate_obstacle(const ObstacleSpec& spec);

int obstacle_dim(const ObstacleSpec& spec);

/// Disk: H = -[[r - (x1 - c1), x2 - c2], [x2 - c2, r + (x1 - c1)]].
/// Box: diagonal H with H_ii = a_i^T x - b_i (negated inside-margins).
/// Cylinder: block diagonal of the disk block and the two cap margins, negated.
/// Throws DimensionError if the point dimension does not match the obstacle.
MatrixBarrierEval obstacle_barrier(const Eigen::VectorXd& point, const ObstacleSpec& spec);

/// Scalar barrier lambda_2(L) - eps with gradient v_2^T (dL/dx_c) v_2 per channel.
/// Not differentiable where lambda_2 is repeated; the gradient is whatever eigenvector
/// the eigensolver returns there.
ScalarBarrierEval fiedler_barrier(const SwarmState& s, const ConnectivityParams& params);

/// Chatter-prone comparison filter: the Fiedler row plus the collision rows and the pins,
/// projected through the same solver.
FilterSolution baseline_eigenvalue_filter(const SwarmState& s, const ConnectivityParams& params,
                                          const Eigen::VectorXd& u_desired, const std::vector<Pin>& pins,
                                          const SolverSettings& settings = {});

}  // namespace mcbf
