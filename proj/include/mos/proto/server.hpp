#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "mos/proto/service.hpp"

namespace mos::proto {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 0;            // 0 binds an ephemeral port; see port()
    double heartbeat_s = 0;  // 0 disables periodic status pushes
};

// Length-prefixed JSON over TCP.  Each connection is served by its own
// thread: a frame is read, dispatched to the Service, and the response is
// written back on the same socket.  A connection that sends a listen
// request additionally receives pushed frames until it closes; closing the
// stream only drops the subscription, never the agent session.
class TcpServer {
public:
    explicit TcpServer(Service& svc, ServerConfig cfg = {});
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    void start();  // throws std::system_error if the socket cannot be bound
    void stop();   // idempotent; joins all connection threads
    int port() const { return port_; }
    bool running() const { return running_.load(); }

private:
    void accept_loop();
    void heartbeat_loop();
    void serve_connection(int fd, std::uint64_t conn_id);

    Service& svc_;
    ServerConfig cfg_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::thread heartbeat_thread_;
    std::mutex hb_mu_;
    std::condition_variable hb_cv_;

    struct Conn {
        int fd = -1;
        std::thread th;
    };
    std::mutex conn_mu_;
    std::map<std::uint64_t, Conn> conns_;
    std::uint64_t next_conn_ = 1;
};

// Blocking client for the same protocol.  One socket carries both the
// request/response exchange and, after a listen request, pushed frames;
// recv() returns them in arrival order.
class Client {
public:
    Client() = default;
    ~Client();
    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;
    Client(Client&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Client& operator=(Client&& other) noexcept;

    void connect(const std::string& host, int port);
    void close();
    bool connected() const { return fd_ >= 0; }

    void send(std::string_view payload);
    std::optional<std::string> recv();  // nullopt on orderly close
    std::string call(std::string_view payload);

private:
    int fd_ = -1;
};

}  // namespace mos::proto
