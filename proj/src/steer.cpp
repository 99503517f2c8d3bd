#include "mcbf/steer.hpp"

#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

namespace mcbf {

using nlohmann::json;

namespace {

json points(const Eigen::VectorXd& x) {
    json out = json::array();
    for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) out.push_back(json::array({x(i), x(i + 1)}));
    return out;
}

json values(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

int agent_field(const json& j, int agents) {
    if (!j.contains("agent") || !j.at("agent").is_number_integer()) {
        throw UnknownMessage("message needs an integer 'agent'");
    }
    const int a = j.at("agent").get<int>();
    if (a < 0 || a >= agents) throw OutOfRangeAgent("agent out of range");
    return a;
}

}  // namespace

json error_frame(const std::string& msg) { return {{"type", "error"}, {"msg", msg}}; }

Command parse_command(std::string_view text, int agents) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UnknownMessage("malformed message");
    if (!j.contains("type") || !j.at("type").is_string()) throw UnknownMessage("message needs a string 'type'");
    const auto type = j.at("type").get<std::string>();
    if (type == "set_target") {
        const int a = agent_field(j, agents);
        const json* t = j.contains("target") ? &j.at("target") : nullptr;
        if (t == nullptr || !t->is_array() || t->size() != 2 || !(*t)[0].is_number() || !(*t)[1].is_number()) {
            throw UnknownMessage("set_target needs 'target': [x, y]");
        }
        const Eigen::Vector2d target((*t)[0].get<double>(), (*t)[1].get<double>());
        if (!target.allFinite()) throw UnknownMessage("target must be finite");
        return SetTarget{a, target};
    }
    if (type == "set_priority") return SetPriority{agent_field(j, agents)};
    if (type == "pause") return Pause{};
    if (type == "resume") return Resume{};
    if (type == "reset") return Reset{};
    throw UnknownMessage("unknown message type '" + type + "'");
}

SteerSession::SteerSession(RunConfig config) : config_(std::move(config)) {
    if (config_.is_obstacle()) throw ConfigError("scenario", "steering needs a swarm scenario");
    priority_ = config_.params.priority_agent;
    trace_.config = config_;
    apply(Reset{});
}

std::optional<json> SteerSession::handle_message(std::string_view text) {
    try {
        apply(parse_command(text, config_.agents()));
    } catch (const McbfError& e) {
        spdlog::debug("steer: rejected message: {}", e.what());
        return error_frame(e.what());
    }
    return std::nullopt;
}

void SteerSession::apply(const Command& cmd) {
    if (const auto* st = std::get_if<SetTarget>(&cmd)) {
        overrides_[static_cast<std::size_t>(st->agent)] = st->target;
    } else if (const auto* sp = std::get_if<SetPriority>(&cmd)) {
        priority_ = sp->agent;
    } else if (std::holds_alternative<Pause>(cmd)) {
        paused_ = true;
    } else if (std::holds_alternative<Resume>(cmd)) {
        // The failing step is retried, so its record would otherwise appear twice.
        if (halted_ && !trace_.records.empty()) trace_.records.pop_back();
        paused_ = false;
        halted_ = false;
        halt_reason_.clear();
    } else {
        state_ = initial_state(config_);
        previous_ = state_;
        overrides_.assign(static_cast<std::size_t>(config_.agents()), std::nullopt);
        priority_ = config_.params.priority_agent;
        paused_ = false;
        halted_ = false;
        halt_reason_.clear();
        steps_ = 0;
        trace_.records.clear();
    }
}

References SteerSession::references(double t) const {
    References refs = scenario_references(config_, t);
    for (std::size_t i = 0; i < overrides_.size(); ++i) {
        if (!overrides_[i]) continue;
        refs.pos.segment<2>(static_cast<Eigen::Index>(2 * i)) = *overrides_[i];
        refs.rate.segment<2>(static_cast<Eigen::Index>(2 * i)).setZero();
    }
    return refs;
}

bool SteerSession::advance() {
    if (paused_ || halted_) return false;
    state_.t = static_cast<double>(steps_) * config_.sim.dt;
    TraceRecord rec = evaluate_record(config_, state_, references(state_.t), {priority_},
                                      steps_ > 0 ? &previous_ : nullptr);
    const bool ok = rec.status == SolveStatus::Optimal;
    if (!ok) {
        halt_reason_ = std::string(to_string(rec.status)) + (rec.message.empty() ? "" : " (" + rec.message + ")");
        spdlog::warn("steer: halted at t={:.6f}: {}", state_.t, halt_reason_);
    }
    trace_.records.push_back(std::move(rec));
    if (!ok) {
        halted_ = true;
        paused_ = true;
        return true;
    }
    previous_ = state_;
    state_ = step(state_, trace_.records.back().u, config_.sim.dt);
    ++steps_;
    return true;
}

json SteerSession::hello_frame() const {
    const auto& p = config_.params;
    return {{"type", "hello"},
            {"p", config_.agents()},
            {"params",
             {{"R", p.R},
              {"eps", p.eps},
              {"r_agent", p.r_agent},
              {"dt", config_.sim.dt},
              {"filter", std::string(to_string(config_.filter))}}}};
}

json SteerSession::state_frame() const {
    json f{{"type", "state"}, {"priority", priority_}, {"halted", halted_}};
    if (trace_.records.empty()) {
        f["t"] = state_.t;
        f["positions"] = points(state_.x);
        f["u"] = points(Eigen::VectorXd::Zero(state_.x.size()));
        f["lap_eigs"] = values(eig_sym(laplacian(adjacency(state_, config_.params.R))).values);
        f["refs"] = points(references(state_.t).pos);
        return f;
    }
    const auto& r = trace_.records.back();
    f["t"] = r.t;
    f["positions"] = points(r.x);
    f["u"] = points(r.u);
    f["lap_eigs"] = values(r.eigs);
    f["refs"] = points(r.refs);
    return f;
}

SteerRunner::SteerRunner(SteerSession session, Sink sink) : SteerRunner(std::move(session), std::move(sink), Options{}) {}

SteerRunner::SteerRunner(SteerSession session, Sink sink, Options opt)
    : session_(std::move(session)), sink_(std::move(sink)), opt_(opt) {
    frame_every_ = std::max(1, static_cast<int>(std::ceil(1.0 / (session_.config().sim.dt * opt_.frame_rate) - 1e-9)));
}

void SteerRunner::post(int client_id, std::string text) {
    std::lock_guard<std::mutex> lock(mu_);
    inbox_.emplace_back(client_id, std::move(text));
}

int SteerRunner::drain() {
    std::deque<std::pair<int, std::string>> batch;
    {
        std::lock_guard<std::mutex> lock(mu_);
        batch.swap(inbox_);
    }
    for (const auto& [client, text] : batch) {
        Command cmd;
        try {
            cmd = parse_command(text, session_.config().agents());
        } catch (const McbfError& e) {
            spdlog::debug("steer: rejected message from client {}: {}", client, e.what());
            sink_(client, error_frame(e.what()).dump());
            continue;
        }
        session_.apply(cmd);
        if (std::holds_alternative<Reset>(cmd)) {
            last_frame_t_ = -1.0;
            emit_state();
        }
    }
    return static_cast<int>(batch.size());
}

void SteerRunner::emit_state() {
    const json f = session_.state_frame();
    const double t = f.at("t").get<double>();
    if (t <= last_frame_t_) return;  // frames carry strictly increasing sim time
    last_frame_t_ = t;
    sink_(-1, f.dump());
}

void SteerRunner::run(const std::atomic<bool>& stop, std::optional<std::int64_t> max_steps) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration<double>(session_.config().sim.dt);
    auto next = clock::now();
    std::int64_t taken = 0;
    while (!stop.load()) {
        drain();
        int budget = opt_.realtime ? opt_.max_catch_up_steps : 1;
        while (budget-- > 0 && (!opt_.realtime || clock::now() >= next)) {
            if (max_steps && taken >= *max_steps) return;
            const bool was_halted = session_.halted();
            if (!session_.advance()) break;
            ++taken;
            // Paused time does not accumulate: the schedule restarts from now after a pause.
            next += std::chrono::duration_cast<clock::duration>(period);
            const bool frame_due = (session_.steps() - 1) % frame_every_ == 0;
            if (frame_due || (session_.halted() && !was_halted)) emit_state();
        }
        if (max_steps && taken >= *max_steps) return;
        if (opt_.realtime) {
            if (session_.paused()) next = clock::now() + std::chrono::duration_cast<clock::duration>(period);
            // Far behind: drop the backlog rather than stepping in a burst.
            if (clock::now() - next > std::chrono::milliseconds(250)) next = clock::now();
            std::this_thread::sleep_until(std::min(next, clock::now() + std::chrono::milliseconds(5)));
        }
    }
}

}  // namespace mcbf
