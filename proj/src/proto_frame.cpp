#include "mos/proto/frame.hpp"

#include <cerrno>
#include <cstring>
#include <system_error>

#include <sys/socket.h>
#include <unistd.h>

namespace mos::proto {

namespace {

std::uint32_t read_be32(const char* p) {
    const auto* b = reinterpret_cast<const unsigned char*>(p);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(char* p, std::uint32_t v) {
    auto* b = reinterpret_cast<unsigned char*>(p);
    b[0] = static_cast<unsigned char>(v >> 24);
    b[1] = static_cast<unsigned char>(v >> 16);
    b[2] = static_cast<unsigned char>(v >> 8);
    b[3] = static_cast<unsigned char>(v);
}

// write() raises SIGPIPE on a closed socket, which would kill the server;
// send(MSG_NOSIGNAL) avoids that but fails on pipes, so fall back.
ssize_t write_some(int fd, const char* data, std::size_t n) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == ENOTSOCK) w = ::write(fd, data, n);
    return w;
}

void write_all(int fd, const char* data, std::size_t n) {
    std::size_t off = 0;
    while (off < n) {
        const ssize_t w = write_some(fd, data + off, n - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw std::system_error(errno, std::generic_category(), "frame write");
        }
        off += static_cast<std::size_t>(w);
    }
}

// false on EOF before the first byte; throws on EOF mid-buffer.
bool read_all(int fd, char* data, std::size_t n) {
    std::size_t off = 0;
    while (off < n) {
        const ssize_t r = ::read(fd, data + off, n - off);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw std::system_error(errno, std::generic_category(), "frame read");
        }
        if (r == 0) {
            if (off == 0) return false;
            throw BadFrame("stream ended inside a frame");
        }
        off += static_cast<std::size_t>(r);
    }
    return true;
}

}  // namespace

std::string encode_frame(std::string_view payload) {
    if (payload.size() > kMaxFrameBytes)
        throw BadFrame("payload exceeds the 64 MiB frame cap");
    std::string out(4 + payload.size(), '\0');
    write_be32(out.data(), static_cast<std::uint32_t>(payload.size()));
    std::memcpy(out.data() + 4, payload.data(), payload.size());
    return out;
}

std::optional<std::string> FrameReader::next() {
    if (buf_.size() < 4) return std::nullopt;
    const std::uint32_t len = read_be32(buf_.data());
    if (len > kMaxFrameBytes) throw BadFrame("frame header exceeds the 64 MiB cap");
    if (buf_.size() < 4 + static_cast<std::size_t>(len)) return std::nullopt;
    std::string payload = buf_.substr(4, len);
    buf_.erase(0, 4 + static_cast<std::size_t>(len));
    return payload;
}

void write_frame_fd(int fd, std::string_view payload) {
    const std::string framed = encode_frame(payload);
    write_all(fd, framed.data(), framed.size());
}

std::optional<std::string> read_frame_fd(int fd) {
    char header[4];
    if (!read_all(fd, header, 4)) return std::nullopt;
    const std::uint32_t len = read_be32(header);
    if (len > kMaxFrameBytes) throw BadFrame("frame header exceeds the 64 MiB cap");
    std::string payload(len, '\0');
    if (len > 0 && !read_all(fd, payload.data(), len))
        throw BadFrame("stream ended inside a frame");
    return payload;
}

}  // namespace mos::proto
