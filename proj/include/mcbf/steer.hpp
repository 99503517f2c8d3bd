#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcbf/errors.hpp"
#include "mcbf/sim.hpp"

namespace mcbf {

// Wire protocol (JSON text frames). Agent indices are 0-based.
//   client -> server: set_target{agent, target: [x, y]}, set_priority{agent}, pause, resume, reset
//   server -> client: hello{p, params}, state{t, positions, u, lap_eigs, refs, priority, halted}, error{msg}

class UnknownMessage : public McbfError {
public:
    using McbfError::McbfError;
};

class OutOfRangeAgent : public McbfError {
public:
    using McbfError::McbfError;
};

struct SetTarget {
    int agent = 0;
    Eigen::Vector2d target = Eigen::Vector2d::Zero();
};
struct SetPriority {
    int agent = 0;
};
struct Pause {};
struct Resume {};
struct Reset {};
using Command = std::variant<SetTarget, SetPriority, Pause, Resume, Reset>;

/// Parses one client message. Throws UnknownMessage for malformed or unrecognized input
/// and OutOfRangeAgent for agent indices outside [0, agents).
Command parse_command(std::string_view text, int agents);

/// The authoritative steering session. Single-threaded: the owner calls handle_message()
/// and advance() from one thread, so reference updates always land between steps.
class SteerSession {
public:
    /// Swarm scenarios only; throws ConfigError("scenario", ...) for obstacle configs.
    explicit SteerSession(RunConfig config);

    /// Applies a client message. Returns the reply frame for malformed input (an error
    /// frame), nothing otherwise. The session is unchanged by a rejected message.
    std::optional<nlohmann::json> handle_message(std::string_view text);
    void apply(const Command& cmd);

    /// One sim step: evaluates the filter at the current state, records it, and steps.
    /// Returns false without doing anything while paused or halted. A filter failure
    /// sets halted (and paused) and keeps the failing record until resume retries the step.
    bool advance();

    nlohmann::json hello_frame() const;
    /// State frame for the most recent record (or the current state before the first step).
    nlohmann::json state_frame() const;

    /// References the nominal controller uses at time t.
    References references(double t) const;

    const RunConfig& config() const { return config_; }
    const SwarmState& state() const { return state_; }
    const Trace& trace() const { return trace_; }
    int priority() const { return priority_; }
    bool paused() const { return paused_; }
    bool halted() const { return halted_; }
    const std::string& halt_reason() const { return halt_reason_; }
    std::int64_t steps() const { return steps_; }

private:
    RunConfig config_;
    SwarmState state_;
    SwarmState previous_;
    std::vector<std::optional<Eigen::Vector2d>> overrides_;  // user-set static references
    int priority_ = 0;
    bool paused_ = false;
    bool halted_ = false;
    std::string halt_reason_;
    std::int64_t steps_ = 0;
    Trace trace_;
};

/// Error frame {"type": "error", "msg": msg}.
nlohmann::json error_frame(const std::string& msg);

/// Drives a SteerSession in (approximately) real time. Inbound messages are queued by
/// any thread and drained by the tick loop; outbound frames go to `sink`, called only from
/// the tick loop thread. client_id -1 in the sink means broadcast.
class SteerRunner {
public:
    using Sink = std::function<void(int client_id, const std::string& frame)>;

    struct Options {
        double frame_rate = 60.0;     // upper bound on state frames per second of sim time
        bool realtime = true;         // false: step as fast as possible (tests)
        int max_catch_up_steps = 8;   // per tick when behind wall-clock
    };

    SteerRunner(SteerSession session, Sink sink);
    SteerRunner(SteerSession session, Sink sink, Options opt);

    /// Thread-safe.
    void post(int client_id, std::string text);

    /// Runs until `stop` becomes true. At most `max_steps` sim steps if given.
    void run(const std::atomic<bool>& stop, std::optional<std::int64_t> max_steps = std::nullopt);

    /// Drains pending messages once and returns how many were handled. Tick loop thread only.
    int drain();

    /// Steps between state frames: ceil(1 / (dt * frame_rate)).
    int frame_every() const { return frame_every_; }

    SteerSession& session() { return session_; }
    const SteerSession& session() const { return session_; }

private:
    void emit_state();

    SteerSession session_;
    Sink sink_;
    Options opt_;
    int frame_every_ = 1;
    double last_frame_t_ = -1.0;
    std::mutex mu_;
    std::deque<std::pair<int, std::string>> inbox_;
};

}  // namespace mcbf
