#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mos/core/error.hpp"

namespace mos::proto {

// Wire unit: a 4-byte big-endian unsigned payload length followed by that
// many bytes of UTF-8 JSON.  Anything larger than the cap is rejected before
// allocation so a hostile header cannot exhaust memory.
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;  // 64 MiB

// Prepends the length header.  Throws BadFrame when the payload exceeds the
// cap.
std::string encode_frame(std::string_view payload);

// Incremental frame splitter for byte streams delivered in arbitrary
// chunks.  feed() appends bytes; next() pops one complete payload, or
// nullopt when more bytes are needed.  Throws BadFrame as soon as a header
// announces an oversized frame.
class FrameReader {
public:
    void feed(std::string_view bytes) { buf_.append(bytes.data(), bytes.size()); }
    std::optional<std::string> next();
    std::size_t buffered() const { return buf_.size(); }

private:
    std::string buf_;
};

// Blocking frame I/O over a file descriptor (socket or pipe).  read_frame_fd
// returns nullopt on a clean end of stream (EOF at a frame boundary) and
// throws BadFrame on an oversized header or a mid-frame EOF.  Write errors
// surface as std::system_error; SIGPIPE is suppressed for sockets.
void write_frame_fd(int fd, std::string_view payload);
std::optional<std::string> read_frame_fd(int fd);

}  // namespace mos::proto
