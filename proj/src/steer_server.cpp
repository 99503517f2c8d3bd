#include "mcbf/steer_server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <future>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "mcbf/errors.hpp"

namespace mcbf {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// Frames queued for a viewer that stopped reading; beyond this new frames are dropped.
constexpr std::size_t kMaxQueuedFrames = 256;

}  // namespace

struct SteerServer::Impl {
    class Client : public std::enable_shared_from_this<Client> {
    public:
        Client(tcp::socket socket, int id, Impl& owner) : ws_(std::move(socket)), id_(id), owner_(owner) {}

        void start() {
            ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
            ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
        }

        void send(std::string frame) {
            if (out_.size() >= kMaxQueuedFrames) return;
            out_.push_back(std::move(frame));
            if (out_.size() == 1 && open_) write_next();
        }

        void close() {
            beast::error_code ignored;
            beast::get_lowest_layer(ws_).socket().close(ignored);
        }

    private:
        void on_accept(beast::error_code ec) {
            if (ec) {
                spdlog::info("steer: client {} handshake failed: {}", id_, ec.message());
                owner_.remove(id_);
                return;
            }
            open_ = true;
            ws_.text(true);
            out_.push_front(owner_.hello);
            write_next();
            read_next();
        }

        void read_next() {
            ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
        }

        void on_read(beast::error_code ec) {
            if (ec) {
                if (ec != websocket::error::closed) spdlog::info("steer: client {} disconnected: {}", id_, ec.message());
                owner_.remove(id_);
                return;
            }
            owner_.on_message(id_, beast::buffers_to_string(in_.data()));
            in_.consume(in_.size());
            read_next();
        }

        void write_next() {
            ws_.async_write(net::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
                self->on_write(ec);
            });
        }

        void on_write(beast::error_code ec) {
            if (ec) {
                spdlog::info("steer: client {} write failed: {}", id_, ec.message());
                owner_.remove(id_);
                return;
            }
            out_.pop_front();
            if (!out_.empty()) write_next();
        }

        websocket::stream<beast::tcp_stream> ws_;
        beast::flat_buffer in_;
        std::deque<std::string> out_;
        bool open_ = false;
        int id_;
        Impl& owner_;
    };

    Impl(std::uint16_t port, std::string hello_frame, MessageHandler handler, const std::string& host)
        : hello(std::move(hello_frame)), on_message(std::move(handler)), acceptor(ioc) {
        beast::error_code ec;
        const tcp::endpoint ep(net::ip::make_address(host, ec), port);
        if (ec) throw PortInUse("invalid listen address '" + host + "': " + ec.message());
        acceptor.open(ep.protocol(), ec);
        if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
        if (!ec) acceptor.bind(ep, ec);
        if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
        if (ec) throw PortInUse("cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
        bound_port = acceptor.local_endpoint().port();
        accept_next();
        thread = std::thread([this] { ioc.run(); });
    }

    void accept_next() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted) spdlog::warn("steer: accept failed: {}", ec.message());
                if (!acceptor.is_open()) return;
            } else {
                const int id = next_id++;
                auto c = std::make_shared<Client>(std::move(socket), id, *this);
                clients.emplace(id, c);
                count = static_cast<int>(clients.size());
                spdlog::info("steer: client {} connected", id);
                c->start();
            }
            accept_next();
        });
    }

    // Network thread only.
    void remove(int id) {
        clients.erase(id);
        count = static_cast<int>(clients.size());
    }

    void stop() {
        if (stopped.exchange(true)) return;
        std::promise<void> closed;
        net::post(ioc, [this, &closed] {
            beast::error_code ignored;
            acceptor.close(ignored);
            for (auto& [id, c] : clients) c->close();
            clients.clear();
            count = 0;
            closed.set_value();
        });
        closed.get_future().wait_for(std::chrono::seconds(1));
        ioc.stop();
        if (thread.joinable()) thread.join();
    }

    std::string hello;
    MessageHandler on_message;
    net::io_context ioc;
    tcp::acceptor acceptor;
    std::uint16_t bound_port = 0;
    std::map<int, std::shared_ptr<Client>> clients;
    std::atomic<int> count{0};
    int next_id = 0;
    std::atomic<bool> stopped{false};
    std::thread thread;
};

SteerServer::SteerServer(std::uint16_t port, std::string hello, MessageHandler on_message, const std::string& host)
    : impl_(std::make_unique<Impl>(port, std::move(hello), std::move(on_message), host)) {}

SteerServer::~SteerServer() { stop(); }

std::uint16_t SteerServer::port() const { return impl_->bound_port; }

void SteerServer::send(int client_id, std::string frame) {
    net::post(impl_->ioc, [impl = impl_.get(), client_id, frame = std::move(frame)]() mutable {
        const auto it = impl->clients.find(client_id);
        if (it != impl->clients.end()) it->second->send(std::move(frame));
    });
}

void SteerServer::broadcast(std::string frame) {
    net::post(impl_->ioc, [impl = impl_.get(), frame = std::move(frame)] {
        for (auto& [id, c] : impl->clients) c->send(frame);
    });
}

int SteerServer::clients() const { return impl_->count.load(); }

void SteerServer::stop() {
    if (impl_) impl_->stop();
}

}  // namespace mcbf
