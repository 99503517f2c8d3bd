#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace mcbf {

/// Websocket endpoint for the steering protocol. Owns one network thread; every client
/// gets `hello` on connect, inbound text frames go to `on_message`, and send/broadcast
/// may be called from any thread. Client disconnects are logged, never fatal.
class SteerServer {
public:
    using MessageHandler = std::function<void(int client_id, std::string text)>;

    /// Binds 127.0.0.1:port (0 picks a free port) or `host` if given and starts serving.
    /// Throws PortInUse if the port cannot be bound.
    SteerServer(std::uint16_t port, std::string hello, MessageHandler on_message, const std::string& host = "127.0.0.1");
    ~SteerServer();

    SteerServer(const SteerServer&) = delete;
    SteerServer& operator=(const SteerServer&) = delete;

    std::uint16_t port() const;
    void send(int client_id, std::string frame);
    void broadcast(std::string frame);
    /// Number of connected clients (approximate while connections change).
    int clients() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mcbf
