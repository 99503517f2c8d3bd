#include "mcbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace mcbf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Halfspace> collision_rows(const SwarmState& s, const ConnectivityParams& params) {
    const auto alpha = ClassKe::linear(params.c_collision);
    const auto bars = collision_barriers(s, params.r_agent);
    std::vector<Halfspace> rows;
    rows.reserve(bars.size());
    std::size_t k = 0;
    for (int i = 0; i < s.agents(); ++i) {
        for (int j = i + 1; j < s.agents(); ++j) {
            rows.push_back(
                scalar_to_halfspace(bars[k++], alpha, "collision_" + std::to_string(i) + "_" + std::to_string(j)));
        }
    }
    return rows;
}

FilterSolution passthrough(const Eigen::VectorXd& u_nominal) {
    FilterSolution sol;
    sol.u = u_nominal;
    sol.status = SolveStatus::Optimal;
    return sol;
}

LmiConstraint connectivity_lmi(const RunConfig& c, const MatrixBarrierEval& ev) {
    switch (c.filter) {
        case FilterKind::General:
            return build_general(ev, c.alpha, "connectivity");
        case FilterKind::SmallestEig:
            return build_smallest_eig(ev, c.alpha, c.c_perp, "connectivity");
        default:
            return build_exponential_sd(ev, c.params.c_alpha, "connectivity");
    }
}

double min_of(const std::vector<double>& v) {
    return v.empty() ? kNaN : *std::min_element(v.begin(), v.end());
}

}  // namespace

SwarmState step(const SwarmState& s, const Eigen::VectorXd& u, double dt) {
    if (u.size() != s.x.size()) throw DimensionError("step: control size does not match the state");
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    return {s.x + dt * u, s.t + dt};
}

SwarmState initial_state(const RunConfig& c) {
    if (c.is_obstacle()) return {c.obstacle.start, 0.0};
    if (c.scenario == ScenarioKind::Custom) return {c.initial_positions, 0.0};
    return paper_initial_state();
}

References scenario_references(const RunConfig& c, double t) {
    if (c.is_obstacle()) return {c.obstacle.target, Eigen::VectorXd::Zero(2)};
    if (c.scenario == ScenarioKind::Custom) return {c.targets, Eigen::VectorXd::Zero(c.targets.size())};
    return paper_references(t);
}

std::vector<Pin> pins_for(const std::vector<int>& agents, const Eigen::VectorXd& u_nominal) {
    std::vector<Pin> pins;
    for (int a : agents) {
        for (int axis = 0; axis < 2; ++axis) pins.push_back({channel(a, axis), u_nominal(channel(a, axis))});
    }
    return pins;
}

ControlStep compute_control(const RunConfig& c, const SwarmState& s, const References& refs,
                            const std::vector<int>& pinned_agents) {
    ControlStep out;
    if (c.is_obstacle()) {
        out.u_nominal = c.obstacle.k_gain * (refs.pos - s.x) + refs.rate;
        const auto ev = obstacle_barrier(s.x, c.obstacle.obstacle);
        out.eigs = eig_sym(ev.h).values;
        if (c.filter == FilterKind::None) {
            out.solution = passthrough(out.u_nominal);
        } else {
            out.solution = solve(assemble(out.u_nominal, {build_indefinite(ev, c.alpha, c.c_perp, "obstacle")}),
                                 c.solver);
        }
        return out;
    }

    out.u_nominal = nominal_tracking(s, refs, c.params.k_gain);
    out.eigs = eig_sym(laplacian(adjacency(s, c.params.R))).values;
    const auto pins = pins_for(pinned_agents, out.u_nominal);
    switch (c.filter) {
        case FilterKind::None:
            out.solution = passthrough(out.u_nominal);
            break;
        case FilterKind::BaselineEigen:
            out.solution = baseline_eigenvalue_filter(s, c.params, out.u_nominal, pins, c.solver);
            break;
        default: {
            const auto ev = connectivity_barrier(s, c.params);
            out.solution =
                solve(assemble(out.u_nominal, {connectivity_lmi(c, ev)}, collision_rows(s, c.params), pins), c.solver);
            break;
        }
    }
    return out;
}

TraceRecord evaluate_record(const RunConfig& c, const SwarmState& s, const References& refs,
                            const std::vector<int>& pinned_agents, const SwarmState* previous) {
    const ControlStep cs = compute_control(c, s, refs, pinned_agents);
    TraceRecord r;
    r.t = s.t;
    r.x = s.x;
    r.refs = refs.pos;
    r.u_nominal = cs.u_nominal;
    r.u = cs.solution.u;
    r.eigs = cs.eigs;
    r.lmi_min_eig = min_of(cs.solution.lmi_min_eigs);
    r.min_halfspace_slack = min_of(cs.solution.halfspace_slacks);
    r.status = cs.solution.status;
    r.message = cs.solution.message;
    r.iterations = cs.solution.iterations;
    r.solve_time = cs.solution.solve_time;
    r.min_pair_distance = min_pair_distance(s);
    if (previous != nullptr && !c.is_obstacle()) {
        const double R2 = c.params.R * c.params.R;
        for (int i = 0; i < s.agents(); ++i) {
            for (int j = i + 1; j < s.agents(); ++j) {
                const bool now = (s.position(i) - s.position(j)).squaredNorm() < R2;
                const bool before = (previous->position(i) - previous->position(j)).squaredNorm() < R2;
                if (now != before) {
                    ++r.cutoff_crossings;
                    spdlog::debug("t={:.6f}: pair ({}, {}) {} communication range", s.t, i, j,
                                  now ? "entered" : "left");
                }
            }
        }
    }
    return r;
}

SolverHalt::SolverHalt(int step, std::string reason, Trace partial)
    : McbfError("solver halted at step " + std::to_string(step) + ": " + reason),
      step_(step),
      reason_(std::move(reason)),
      partial_(std::move(partial)) {}

int record_count(const SimSettings& s) { return static_cast<int>(std::floor(s.duration / s.dt + 1e-9)) + 1; }

Trace run(const RunConfig& c, const std::atomic<bool>* stop) {
    Trace tr;
    tr.config = c;
    const int n = record_count(c.sim);
    tr.records.reserve(static_cast<std::size_t>(n));
    SwarmState s = initial_state(c);
    SwarmState prev = s;
    spdlog::info("run: scenario={} filter={} records={}", to_string(c.scenario), to_string(c.filter), n);
    for (int k = 0; k < n; ++k) {
        s.t = k * c.sim.dt;
        TraceRecord rec = evaluate_record(c, s, scenario_references(c, s.t), c.pinned_agents, k > 0 ? &prev : nullptr);
        const SolveStatus status = rec.status;
        std::string reason = std::string(to_string(status)) + (rec.message.empty() ? "" : " (" + rec.message + ")");
        tr.records.push_back(std::move(rec));
        if (status != SolveStatus::Optimal) {
            spdlog::warn("run: halting at step {} (t={:.6f}): {}", k, s.t, reason);
            throw SolverHalt(k, reason, std::move(tr));
        }
        if (stop != nullptr && stop->load()) break;
        if (k + 1 < n) {
            prev = s;
            s = step(s, tr.records.back().u, c.sim.dt);
        }
    }
    return tr;
}

Metrics metrics(const Trace& tr) {
    if (tr.records.empty()) throw EmptyTraceError("metrics: trace has no records");
    const auto& c = tr.config;
    const bool swarm = !c.is_obstacle();
    const double inf = std::numeric_limits<double>::infinity();
    Metrics m;
    m.records = static_cast<int>(tr.records.size());
    m.min_lambda2 = swarm ? inf : kNaN;
    m.min_gap23 = swarm && c.agents() >= 3 ? inf : kNaN;
    m.min_lambda_p_h = swarm ? kNaN : inf;
    m.min_pair_distance = inf;
    m.priority_tracking_error = swarm ? 0.0 : kNaN;
    m.min_lmi_eig = kNaN;

    std::vector<double> times;
    const int prio = c.params.priority_agent;
    for (std::size_t k = 0; k < tr.records.size(); ++k) {
        const auto& r = tr.records[k];
        if (swarm) {
            m.min_lambda2 = std::min(m.min_lambda2, r.eigs(1));
            if (r.eigs.size() >= 3) m.min_gap23 = std::min(m.min_gap23, r.eigs(2) - r.eigs(1));
            m.priority_tracking_error = std::max(
                m.priority_tracking_error, (r.x.segment<2>(2 * prio) - r.refs.segment<2>(2 * prio)).norm());
            for (int a : c.pinned_agents) {
                m.max_pin_error =
                    std::max(m.max_pin_error, (r.u.segment<2>(2 * a) - r.u_nominal.segment<2>(2 * a)).cwiseAbs().maxCoeff());
            }
        } else {
            m.min_lambda_p_h = std::min(m.min_lambda_p_h, r.eigs(r.eigs.size() - 1));
        }
        m.min_pair_distance = std::min(m.min_pair_distance, r.min_pair_distance);
        if (!std::isnan(r.lmi_min_eig)) {
            m.min_lmi_eig = std::isnan(m.min_lmi_eig) ? r.lmi_min_eig : std::min(m.min_lmi_eig, r.lmi_min_eig);
        }
        if (k > 0) {
            const double jump = (r.u - tr.records[k - 1].u).norm();
            m.total_variation += jump;
            m.max_jump = std::max(m.max_jump, jump);
        }
        times.push_back(r.solve_time);
        m.cutoff_crossings += r.cutoff_crossings;
    }
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    m.median_solve_time = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
    m.max_solve_time = times.back();
    return m;
}

}  // namespace mcbf
