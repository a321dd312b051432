#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

// RFC 6455 framing for the browser endpoint. Message bodies carried in text
// frames are the same canonical JSON as the length-prefixed TCP protocol.
namespace holotable::ws {

struct UpgradeRequest {
  std::string path;
  std::string key;  // Sec-WebSocket-Key
};

// Parses an HTTP/1.1 request head (everything up to and including the blank
// line). Returns an error description when it is not a valid upgrade.
std::variant<UpgradeRequest, std::string> parse_upgrade(std::string_view head);

std::string accept_key(std::string_view client_key);
std::string upgrade_response(std::string_view client_key);
std::string bad_request_response(std::string_view reason);
std::string not_found_response(std::string_view path);

enum class Opcode : std::uint8_t { kContinuation = 0, kText = 1, kBinary = 2, kClose = 8, kPing = 9, kPong = 10 };

struct Frame {
  Opcode opcode = Opcode::kText;
  std::string payload;
};

using Mask = std::array<std::uint8_t, 4>;

// A single FIN frame. Server frames are unmasked; clients pass a mask.
std::string encode_frame(Opcode op, std::string_view payload, std::optional<Mask> mask = std::nullopt);

// Reassembles fragmented data messages; control frames are returned as they
// arrive. Any violation leaves the decoder failed.
class FrameDecoder {
 public:
  FrameDecoder(bool require_mask, std::size_t max_message);

  void feed(std::string_view bytes) { buffer_.append(bytes); }
  // nullopt: need more bytes, or already failed. A string is a protocol error.
  std::optional<std::variant<Frame, std::string>> next();
  bool failed() const { return failed_; }

 private:
  std::optional<std::variant<Frame, std::string>> fail(std::string why);

  bool require_mask_;
  std::size_t max_message_;
  std::string buffer_;
  std::optional<Opcode> partial_op_;
  std::string partial_;
  bool failed_ = false;
};

}  // namespace holotable::ws
