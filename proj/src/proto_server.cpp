#include "mos/proto/server.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <system_error>
#include <vector>

#include "mos/proto/frame.hpp"

namespace mos::proto {

namespace {

[[noreturn]] void throw_errno(const char* what) {
    throw std::system_error(errno, std::generic_category(), what);
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

TcpServer::TcpServer(Service& svc, ServerConfig cfg)
    : svc_(svc), cfg_(std::move(cfg)) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
    if (running_) return;

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string port_str = std::to_string(cfg_.port);
    if (::getaddrinfo(cfg_.host.c_str(), port_str.c_str(), &hints, &res) != 0)
        throw std::system_error(std::make_error_code(std::errc::address_not_available),
                                "getaddrinfo " + cfg_.host);
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    if (fd < 0) throw_errno("bind");
    if (::listen(fd, 16) != 0) {
        ::close(fd);
        throw_errno("listen");
    }

    sockaddr_storage addr{};
    socklen_t alen = sizeof addr;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &alen) == 0) {
        if (addr.ss_family == AF_INET)
            port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
        else if (addr.ss_family == AF_INET6)
            port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    }

    listen_fd_ = fd;
    running_ = true;
    accept_thread_ = std::thread(&TcpServer::accept_loop, this);
    if (cfg_.heartbeat_s > 0)
        heartbeat_thread_ = std::thread(&TcpServer::heartbeat_loop, this);
}

void TcpServer::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    hb_cv_.notify_all();
    if (accept_thread_.joinable()) accept_thread_.join();
    if (heartbeat_thread_.joinable()) heartbeat_thread_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;

    std::map<std::uint64_t, Conn> conns;
    {
        std::lock_guard lock(conn_mu_);
        conns.swap(conns_);
    }
    for (auto& [id, c] : conns) ::shutdown(c.fd, SHUT_RDWR);
    for (auto& [id, c] : conns) {
        if (c.th.joinable()) c.th.join();
        ::close(c.fd);
    }
}

void TcpServer::accept_loop() {
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;  // listener shut down
        }
        set_nodelay(fd);
        std::lock_guard lock(conn_mu_);
        if (!running_) {
            ::close(fd);
            break;
        }
        const std::uint64_t id = next_conn_++;
        Conn& c = conns_[id];
        c.fd = fd;
        c.th = std::thread(&TcpServer::serve_connection, this, fd, id);
    }
}

void TcpServer::heartbeat_loop() {
    const auto period = std::chrono::duration<double>(cfg_.heartbeat_s);
    std::unique_lock lock(hb_mu_);
    while (running_) {
        if (hb_cv_.wait_for(lock, period, [&] { return !running_.load(); })) break;
        svc_.heartbeat();
    }
}

void TcpServer::serve_connection(int fd, std::uint64_t conn_id) {
    auto write_mu = std::make_shared<std::mutex>();
    std::vector<std::uint64_t> subscriptions;

    for (;;) {
        std::optional<std::string> payload;
        try {
            payload = read_frame_fd(fd);
        } catch (const Error& e) {
            // Oversized or truncated frame: report and drop the connection,
            // since the stream offset is no longer trustworthy.
            const std::string resp =
                json{{"v", kProtoVersion},
                     {"type", "error"},
                     {"code", e.code()},
                     {"message", e.what()}}
                    .dump();
            try {
                std::lock_guard lock(*write_mu);
                write_frame_fd(fd, resp);
            } catch (...) {
            }
            break;
        } catch (...) {
            break;
        }
        if (!payload) break;  // orderly close

        const json probe = json::parse(*payload, nullptr, false);
        const bool is_listen = !probe.is_discarded() && probe.is_object() &&
                               probe.contains("type") && probe["type"].is_string() &&
                               probe["type"].get_ref<const std::string&>() == "listen";

        std::string resp;
        if (is_listen) {
            auto [r, id] = svc_.subscribe(
                *payload, [fd, write_mu](const std::string& m) {
                    std::lock_guard lock(*write_mu);
                    write_frame_fd(fd, m);
                });
            resp = std::move(r);
            if (id) subscriptions.push_back(*id);
        } else {
            resp = svc_.handle(*payload);
        }
        try {
            std::lock_guard lock(*write_mu);
            write_frame_fd(fd, resp);
        } catch (...) {
            break;
        }
    }

    for (const auto id : subscriptions) svc_.remove_listener(id);

    // Hand the thread handle to the reaper only if stop() has not already
    // claimed it; either way the fd is closed exactly once.
    std::thread self;
    {
        std::lock_guard lock(conn_mu_);
        auto it = conns_.find(conn_id);
        if (it != conns_.end()) {
            self = std::move(it->second.th);
            conns_.erase(it);
            ::close(fd);
        }
    }
    if (self.joinable()) self.detach();
}

Client& Client::operator=(Client&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

Client::~Client() { close(); }

void Client::connect(const std::string& host, int port) {
    close();
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
        throw std::system_error(std::make_error_code(std::errc::host_unreachable),
                                "getaddrinfo " + host);
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    if (fd < 0) throw_errno("connect");
    set_nodelay(fd);
    fd_ = fd;
}

void Client::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Client::send(std::string_view payload) {
    if (fd_ < 0) throw std::logic_error("client is not connected");
    write_frame_fd(fd_, payload);
}

std::optional<std::string> Client::recv() {
    if (fd_ < 0) throw std::logic_error("client is not connected");
    return read_frame_fd(fd_);
}

std::string Client::call(std::string_view payload) {
    send(payload);
    auto resp = recv();
    if (!resp) throw std::runtime_error("server closed the connection");
    return *std::move(resp);
}

}  // namespace mos::proto
