#pragma once

#include <atomic>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcbf/config.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/filter.hpp"
#include "mcbf/scenarios.hpp"

namespace mcbf {

/// Explicit Euler: positions += dt * u, t += dt.
SwarmState step(const SwarmState& s, const Eigen::VectorXd& u, double dt);

/// Initial state of the configured scenario (the t = 0 references for the five-agent scenario).
SwarmState initial_state(const RunConfig& c);

/// References of the configured scenario at time t. Only the five-agent scenario is time-varying.
References scenario_references(const RunConfig& c, double t);

/// Both channels of every listed agent, pinned to the nominal control.
std::vector<Pin> pins_for(const std::vector<int>& agents, const Eigen::VectorXd& u_nominal);

/// One evaluation of the safety filter at a state.
struct ControlStep {
    Eigen::VectorXd u_nominal;
    FilterSolution solution;  // status Optimal with u = u_nominal when the filter is "none"
    Eigen::VectorXd eigs;     // eigenvalues of L (swarm) or of H (obstacle), ascending
};

/// Builds and solves the filter problem of the configured scenario and filter.
ControlStep compute_control(const RunConfig& c, const SwarmState& s, const References& refs,
                            const std::vector<int>& pinned_agents);

struct TraceRecord {
    double t = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd refs;
    Eigen::VectorXd u_nominal;
    Eigen::VectorXd u;
    Eigen::VectorXd eigs;
    double lmi_min_eig = 0.0;         // min over LMIs at u, NaN without LMIs
    double min_halfspace_slack = 0.0;  // NaN without half-spaces
    SolveStatus status = SolveStatus::Optimal;
    std::string message;  // solver diagnostic, empty when optimal
    int iterations = 0;
    double solve_time = 0.0;
    double min_pair_distance = 0.0;  // +inf for a single agent
    int cutoff_crossings = 0;        // pairs whose in-range status changed since the previous record
};

struct Trace {
    RunConfig config;
    std::vector<TraceRecord> records;
};

/// Raised by run() when the filter reports Infeasible or NumericalFailure.
/// Carries the trace up to and including the failing record.
class SolverHalt : public McbfError {
public:
    SolverHalt(int step, std::string reason, Trace partial);

    int step() const noexcept { return step_; }
    const std::string& reason() const noexcept { return reason_; }
    const Trace& partial() const noexcept { return partial_; }

private:
    int step_;
    std::string reason_;
    Trace partial_;
};

/// floor(duration / dt) + 1, with a small guard against round-off in the ratio.
int record_count(const SimSettings& s);

/// Fixed-step closed loop. A control is computed at every record and the state advanced
/// between records. If `stop` becomes true the run ends early with the records so far.
Trace run(const RunConfig& c, const std::atomic<bool>* stop = nullptr);

/// Evaluates one record (control plus diagnostics) without stepping.
TraceRecord evaluate_record(const RunConfig& c, const SwarmState& s, const References& refs,
                            const std::vector<int>& pinned_agents, const SwarmState* previous = nullptr);

struct Metrics {
    int records = 0;
    double min_lambda2 = 0.0;            // swarm scenarios
    double min_gap23 = 0.0;              // min |lambda_3 - lambda_2|, swarms with p >= 3
    double min_lambda_p_h = 0.0;         // obstacle scenarios: min lambda_max(H)
    double min_pair_distance = 0.0;
    double total_variation = 0.0;        // sum ||u_{k+1} - u_k||
    double max_jump = 0.0;               // max ||u_{k+1} - u_k||
    double priority_tracking_error = 0.0;  // max ||x_p - x_p,d|| for the priority agent
    double max_pin_error = 0.0;          // max |u - u_nominal| over pinned channels
    double min_lmi_eig = 0.0;
    double median_solve_time = 0.0;
    double max_solve_time = 0.0;
    int cutoff_crossings = 0;
};

/// Throws EmptyTraceError for a trace without records. Fields that do not apply to the
/// scenario are NaN.
Metrics metrics(const Trace& tr);

}  // namespace mcbf
