#include "holotable/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace holotable::ws {
namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool has_token(std::string_view list, std::string_view token) {
  const std::string l = lower(list);
  std::size_t pos = 0;
  while (pos <= l.size()) {
    std::size_t comma = l.find(',', pos);
    if (comma == std::string::npos) comma = l.size();
    if (trim(std::string_view(l).substr(pos, comma - pos)) == token) return true;
    pos = comma + 1;
  }
  return false;
}

}  // namespace

std::variant<UpgradeRequest, std::string> parse_upgrade(std::string_view head) {
  const std::size_t line_end = head.find("\r\n");
  if (line_end == std::string_view::npos) return std::string("incomplete request line");
  std::string_view line = head.substr(0, line_end);
  if (!line.starts_with("GET ")) return std::string("method must be GET");
  line.remove_prefix(4);
  const std::size_t sp = line.find(' ');
  if (sp == std::string_view::npos || line.substr(sp + 1) != "HTTP/1.1") return std::string("expected HTTP/1.1");
  UpgradeRequest req;
  req.path = std::string(line.substr(0, sp));

  bool upgrade = false, connection = false, version = false;
  std::size_t pos = line_end + 2;
  while (pos < head.size()) {
    std::size_t end = head.find("\r\n", pos);
    if (end == std::string_view::npos) end = head.size();
    std::string_view h = head.substr(pos, end - pos);
    pos = end + 2;
    if (h.empty()) break;
    const std::size_t colon = h.find(':');
    if (colon == std::string_view::npos) return std::string("malformed header");
    const std::string name = lower(trim(h.substr(0, colon)));
    const std::string_view value = trim(h.substr(colon + 1));
    if (name == "upgrade") upgrade = lower(value) == "websocket";
    else if (name == "connection") connection = has_token(value, "upgrade");
    else if (name == "sec-websocket-version") version = value == "13";
    else if (name == "sec-websocket-key") req.key = std::string(value);
  }
  if (!upgrade || !connection) return std::string("not a websocket upgrade");
  if (!version) return std::string("unsupported websocket version");
  if (req.key.empty()) return std::string("missing Sec-WebSocket-Key");
  return req;
}

std::string accept_key(std::string_view client_key) {
  std::string input(client_key);
  input += kGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

std::string upgrade_response(std::string_view client_key) {
  std::ostringstream os;
  os << "HTTP/1.1 101 Switching Protocols\r\n"
     << "Upgrade: websocket\r\n"
     << "Connection: Upgrade\r\n"
     << "Sec-WebSocket-Accept: " << accept_key(client_key) << "\r\n\r\n";
  return os.str();
}

std::string bad_request_response(std::string_view reason) {
  std::ostringstream os;
  os << "HTTP/1.1 400 Bad Request\r\nContent-Type: text/plain\r\nConnection: close\r\nContent-Length: " << reason.size()
     << "\r\n\r\n"
     << reason;
  return os.str();
}

std::string not_found_response(std::string_view path) {
  const std::string body = "no endpoint " + std::string(path) + "; use /seat, /table or /admin";
  std::ostringstream os;
  os << "HTTP/1.1 404 Not Found\r\nContent-Type: text/plain\r\nConnection: close\r\nContent-Length: " << body.size()
     << "\r\n\r\n"
     << body;
  return os.str();
}

std::string encode_frame(Opcode op, std::string_view payload, std::optional<Mask> mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>(n >> 8));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  }
  if (!mask) {
    out.append(payload);
    return out;
  }
  for (auto b : *mask) out.push_back(static_cast<char>(b));
  for (std::size_t i = 0; i < payload.size(); ++i)
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ (*mask)[i % 4]));
  return out;
}

FrameDecoder::FrameDecoder(bool require_mask, std::size_t max_message)
    : require_mask_(require_mask), max_message_(max_message) {}

std::optional<std::variant<Frame, std::string>> FrameDecoder::fail(std::string why) {
  failed_ = true;
  buffer_.clear();
  partial_.clear();
  return std::variant<Frame, std::string>(std::move(why));
}

std::optional<std::variant<Frame, std::string>> FrameDecoder::next() {
  while (!failed_) {
    if (buffer_.size() < 2) return std::nullopt;
    const auto* p = reinterpret_cast<const std::uint8_t*>(buffer_.data());
    const bool fin = p[0] & 0x80;
    if (p[0] & 0x70) return fail("reserved bits set");
    const std::uint8_t raw_op = p[0] & 0x0F;
    const bool masked = p[1] & 0x80;
    if (require_mask_ && !masked) return fail("client frame not masked");
    std::uint64_t len = p[1] & 0x7F;
    std::size_t header = 2;
    if (len == 126) {
      if (buffer_.size() < 4) return std::nullopt;
      len = (std::uint64_t{p[2]} << 8) | p[3];
      header = 4;
    } else if (len == 127) {
      if (buffer_.size() < 10) return std::nullopt;
      len = 0;
      for (int i = 0; i < 8; ++i) len = (len << 8) | p[2 + i];
      header = 10;
    }
    const bool control = raw_op >= 8;
    if (control && (len > 125 || !fin)) return fail("invalid control frame");
    if (!control && len + partial_.size() > max_message_) return fail("message too large");
    if (raw_op != 0 && raw_op != 1 && raw_op != 2 && raw_op != 8 && raw_op != 9 && raw_op != 10)
      return fail("unknown opcode");
    if (masked) header += 4;
    if (buffer_.size() < header + len) return std::nullopt;

    std::string payload = buffer_.substr(header, static_cast<std::size_t>(len));
    if (masked) {
      const std::uint8_t* m = p + header - 4;
      for (std::size_t i = 0; i < payload.size(); ++i)
        payload[i] = static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ m[i % 4]);
    }
    buffer_.erase(0, header + static_cast<std::size_t>(len));

    const auto op = static_cast<Opcode>(raw_op);
    if (control) return std::variant<Frame, std::string>(Frame{op, std::move(payload)});
    if (op == Opcode::kContinuation) {
      if (!partial_op_) return fail("continuation without a started message");
      partial_ += payload;
    } else {
      if (partial_op_) return fail("new message inside a fragmented one");
      partial_op_ = op;
      partial_ = std::move(payload);
    }
    if (fin) {
      Frame f{*partial_op_, std::move(partial_)};
      partial_op_.reset();
      partial_.clear();
      return std::variant<Frame, std::string>(std::move(f));
    }
  }
  return std::nullopt;
}

}  // namespace holotable::ws
