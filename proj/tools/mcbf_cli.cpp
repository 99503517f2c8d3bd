// mcbf: run, validate, and steer MCBF safety-filter scenarios.
//
// Exit codes: 0 success (also after SIGINT), 1 config error, 2 solver halt, 3 port in use,
// 4 I/O error.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "mcbf/config.hpp"
#include "mcbf/io.hpp"
#include "mcbf/sim.hpp"
#include "mcbf/steer.hpp"
#include "mcbf/steer_server.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kHalt = 2, kPort = 3, kIo = 4 };

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

struct Overrides {
    std::string config;
    std::string out;
    std::string filter;
    std::optional<double> duration;
    std::optional<double> dt;
};

// Overrides are applied to the document before parsing so they go through the same checks.
mcbf::RunConfig load(const Overrides& o) {
    std::ifstream in(o.config);
    if (!in) throw mcbf::ConfigError("", "cannot open " + o.config);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw mcbf::ConfigError("", o.config + " is not valid JSON");
    if (!j.is_object()) throw mcbf::ConfigError("", o.config + " must hold a JSON object");
    if (!o.filter.empty()) j["filter"] = o.filter;
    if (o.duration) j["sim"]["duration"] = *o.duration;
    if (o.dt) j["sim"]["dt"] = *o.dt;
    if (!o.out.empty()) j["output"] = o.out;
    return mcbf::parse_config(j);
}

void configure_logging() {
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("MCBF_LOG")) {
        level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only accept that when asked for.
        if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
    }
    spdlog::set_level(level);
    spdlog::set_pattern("[%l] %v");
}

void print_summary(const mcbf::Trace& tr) {
    if (tr.records.empty()) return;
    const auto m = mcbf::metrics(tr);
    if (tr.config.is_obstacle()) {
        std::cout << "records " << m.records << ", min lambda_max(H) " << m.min_lambda_p_h << "\n";
    } else {
        std::cout << "records " << m.records << ", min lambda_2 " << m.min_lambda2 << ", min pair distance "
                  << m.min_pair_distance << "\n";
    }
}

int cmd_run(const Overrides& o) {
    const auto c = load(o);
    std::signal(SIGINT, on_sigint);
    try {
        const auto tr = mcbf::run(c, &g_stop);
        mcbf::write_outputs(c.output, tr);
        print_summary(tr);
        if (g_stop) spdlog::warn("interrupted after {} records; partial trace written", tr.records.size());
        std::cout << "wrote " << c.output << "\n";
        return kOk;
    } catch (const mcbf::SolverHalt& h) {
        mcbf::write_outputs(c.output, h.partial(), h.reason(), h.step());
        std::cerr << "solver halt at step " << h.step() << ": " << h.reason() << "\n";
        std::cerr << "partial trace written to " << c.output << "\n";
        return kHalt;
    }
}

int cmd_validate(const Overrides& o) {
    const auto c = load(o);
    std::cout << o.config << ": ok (" << mcbf::to_string(c.scenario) << ", " << mcbf::to_string(c.filter) << ")\n";
    return kOk;
}

int cmd_steer(const Overrides& o, std::uint16_t port, const std::string& host) {
    const auto c = load(o);
    mcbf::SteerSession session(c);
    const std::string hello = session.hello_frame().dump();

    std::unique_ptr<mcbf::SteerRunner> runner;
    mcbf::SteerServer server(port, hello, [&runner](int id, std::string text) { runner->post(id, std::move(text)); },
                             host);
    runner = std::make_unique<mcbf::SteerRunner>(std::move(session), [&server](int id, const std::string& f) {
        if (id < 0) {
            server.broadcast(f);
        } else {
            server.send(id, f);
        }
    });
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);
    std::cout << "steering on ws://" << host << ":" << server.port() << " (Ctrl-C to stop)" << std::endl;
    runner->run(g_stop);
    server.stop();

    const auto& s = runner->session();
    std::optional<std::string> halt;
    if (s.halted()) halt = s.halt_reason();
    const int halt_step = s.halted() ? static_cast<int>(s.trace().records.size()) - 1 : -1;
    mcbf::write_outputs(c.output, s.trace(), halt, halt_step);
    std::cout << "session trace (" << s.trace().records.size() << " records) written to " << c.output << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"MCBF safety-filter toolkit"};
    app.require_subcommand(1);

    Overrides o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("config,--config", o.config, "Run configuration (JSON)")->required();
        sub->add_option("--filter", o.filter, "Override the configured filter");
        sub->add_option("--duration", o.duration, "Override sim duration [s]");
        sub->add_option("--dt", o.dt, "Override sim step [s]");
    };

    auto* run = app.add_subcommand("run", "Run a scenario and write trace.csv, eigenvalues.csv, summary.json");
    add_common(run);
    run->add_option("--out", o.out, "Output directory (overrides config)");

    auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
    add_common(validate);

    std::uint16_t port = 8799;
    std::string host = "127.0.0.1";
    auto* steer = app.add_subcommand("steer", "Serve an interactive steering session over websocket");
    add_common(steer);
    steer->add_option("--out", o.out, "Where the session trace is written on shutdown");
    steer->add_option("--port", port, "TCP port")->capture_default_str();
    steer->add_option("--host", host, "Listen address")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(o);
        if (*validate) return cmd_validate(o);
        return cmd_steer(o, port, host);
    } catch (const mcbf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const mcbf::PortInUse& e) {
        std::cerr << "port in use: " << e.what() << "\n";
        return kPort;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const mcbf::McbfError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::runtime_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    }
}
