#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "holotable/engine.hpp"

// Offline checks over a session's event log and recorded client traffic.
namespace holotable::audit {

// Re-executes every hand of the log through a fresh engine, rebuilding the
// deck from the dealt cards and the blinds and stacks from the hand_start,
// stack and post records. Each problem is reported with its hand and seq.
std::vector<std::string> replay_verify(const std::vector<Event>& log);

// Pot chain, chip conservation and engine invariants for one state.
std::vector<std::string> check_state(const HandState& h);

// Online redaction check for one server-to-client byte stream
// (length-prefixed frames). A card token is allowed only once the stream
// itself has revealed it: the viewer's own deal, a show record, or a board
// record. Anything else (another seat's hole cards before showdown, cards
// not yet turned, undealt cards) is a violation. viewer is a seat id, or
// nullopt for a spectator.
class TranscriptAuditor {
 public:
  explicit TranscriptAuditor(std::optional<SeatId> viewer);
  void feed(std::string_view bytes);
  const std::vector<std::string>& violations() const { return violations_; }
  std::int64_t frames() const { return frames_; }
  std::int64_t card_tokens() const { return tokens_; }

 private:
  void check_frame(std::string_view body);

  std::optional<SeatId> viewer_;
  std::string who_;
  std::string buffer_;
  std::map<std::int64_t, std::set<int>> revealed_;  // hand -> card indexes
  std::vector<std::string> violations_;
  std::int64_t frames_ = 0;
  std::int64_t tokens_ = 0;
};

std::vector<std::string> audit_transcript(std::string_view bytes, std::optional<SeatId> viewer);

// Lowercase hex SHA-256 of the event log in its JSON-lines form.
std::string log_digest(const std::vector<Event>& log);
std::string sha256_hex(std::string_view data);

}  // namespace holotable::audit
