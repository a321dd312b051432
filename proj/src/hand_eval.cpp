#include "holotable/hand_eval.hpp"

#include <algorithm>
#include <stdexcept>

namespace holotable {
namespace {

using RankMask = std::uint16_t;  // bit r set for rank r; bit 1 doubles as the low ace

// Highest straight top rank contained in the mask, or 0.
int straight_high(RankMask mask) {
  if (mask & (1u << 14)) mask |= 1u << 1;
  for (int high = kMaxRank; high >= 5; --high) {
    const RankMask run = static_cast<RankMask>(0x1Fu << (high - 4));
    if ((mask & run) == run) return high;
  }
  return 0;
}

void check_distinct(std::span<const Card> cards) {
  std::uint64_t seen = 0;
  for (const auto& c : cards) {
    const std::uint64_t bit = 1ULL << c.index();
    if (seen & bit) throw std::invalid_argument("duplicate card " + c.str());
    seen |= bit;
  }
}

}  // namespace

std::string_view category_name(HandCategory c) {
  switch (c) {
    case HandCategory::kHighCard: return "high_card";
    case HandCategory::kOnePair: return "one_pair";
    case HandCategory::kTwoPair: return "two_pair";
    case HandCategory::kThreeOfAKind: return "three_of_a_kind";
    case HandCategory::kStraight: return "straight";
    case HandCategory::kFlush: return "flush";
    case HandCategory::kFullHouse: return "full_house";
    case HandCategory::kFourOfAKind: return "four_of_a_kind";
    case HandCategory::kStraightFlush: return "straight_flush";
  }
  return "?";
}

HandValue::HandValue(HandCategory category, std::span<const int> tiebreak) : category_(category) {
  if (static_cast<int>(tiebreak.size()) != tiebreak_length(category))
    throw std::invalid_argument("tiebreak length does not match category");
  for (std::size_t i = 0; i < tiebreak.size(); ++i) ranks_[i] = static_cast<std::uint8_t>(tiebreak[i]);
}

std::string HandValue::str() const {
  std::string out(category_name(category_));
  out += " [";
  bool first = true;
  for (auto r : tiebreak()) {
    if (!first) out += ",";
    out += std::to_string(r);
    first = false;
  }
  return out + "]";
}

HandValue evaluate_best(std::span<const Card> cards) {
  if (cards.size() < 5 || cards.size() > 7) throw std::invalid_argument("need 5 to 7 cards");
  check_distinct(cards);

  std::array<int, kMaxRank + 1> count{};
  std::array<int, 4> suit_count{};
  std::array<RankMask, 4> suit_mask{};
  RankMask all_mask = 0;
  for (const auto& c : cards) {
    ++count[c.rank()];
    const int s = static_cast<int>(c.suit());
    ++suit_count[s];
    suit_mask[s] |= static_cast<RankMask>(1u << c.rank());
    all_mask |= static_cast<RankMask>(1u << c.rank());
  }

  // Ranks grouped by multiplicity, each list descending.
  std::vector<int> quads, trips, pairs, singles;
  for (int r = kMaxRank; r >= kMinRank; --r) {
    switch (count[r]) {
      case 4: quads.push_back(r); break;
      case 3: trips.push_back(r); break;
      case 2: pairs.push_back(r); break;
      case 1: singles.push_back(r); break;
      default: break;
    }
  }
  // Highest ranks present, excluding up to two given ranks.
  auto kickers = [&](int n, int skip_a, int skip_b) {
    std::vector<int> out;
    for (int r = kMaxRank; r >= kMinRank && static_cast<int>(out.size()) < n; --r)
      if (count[r] > 0 && r != skip_a && r != skip_b) out.push_back(r);
    return out;
  };

  int flush_suit = -1;
  for (int s = 0; s < 4; ++s)
    if (suit_count[s] >= 5) flush_suit = s;

  if (flush_suit >= 0) {
    if (int high = straight_high(suit_mask[flush_suit])) {
      const int tb[] = {high};
      return HandValue(HandCategory::kStraightFlush, tb);
    }
  }
  if (!quads.empty()) {
    const int tb[] = {quads[0], kickers(1, quads[0], 0)[0]};
    return HandValue(HandCategory::kFourOfAKind, tb);
  }
  if (!trips.empty() && (trips.size() >= 2 || !pairs.empty())) {
    const int pair_rank = std::max(trips.size() >= 2 ? trips[1] : 0, pairs.empty() ? 0 : pairs[0]);
    const int tb[] = {trips[0], pair_rank};
    return HandValue(HandCategory::kFullHouse, tb);
  }
  if (flush_suit >= 0) {
    int tb[5];
    int n = 0;
    for (int r = kMaxRank; r >= kMinRank && n < 5; --r)
      if (suit_mask[flush_suit] & (1u << r)) tb[n++] = r;
    return HandValue(HandCategory::kFlush, tb);
  }
  if (int high = straight_high(all_mask)) {
    const int tb[] = {high};
    return HandValue(HandCategory::kStraight, tb);
  }
  if (!trips.empty()) {
    const auto k = kickers(2, trips[0], 0);
    const int tb[] = {trips[0], k[0], k[1]};
    return HandValue(HandCategory::kThreeOfAKind, tb);
  }
  if (pairs.size() >= 2) {
    const int tb[] = {pairs[0], pairs[1], kickers(1, pairs[0], pairs[1])[0]};
    return HandValue(HandCategory::kTwoPair, tb);
  }
  if (pairs.size() == 1) {
    const auto k = kickers(3, pairs[0], 0);
    const int tb[] = {pairs[0], k[0], k[1], k[2]};
    return HandValue(HandCategory::kOnePair, tb);
  }
  const int tb[] = {singles[0], singles[1], singles[2], singles[3], singles[4]};
  return HandValue(HandCategory::kHighCard, tb);
}

HandValue evaluate5(std::span<const Card> cards) {
  if (cards.size() != 5) throw std::invalid_argument("evaluate5 needs exactly 5 cards");
  return evaluate_best(cards);
}

HandValue best_of_seven(std::span<const Card, 2> hole, std::span<const Card, 5> board) {
  std::array<Card, 7> all = {hole[0], hole[1], board[0], board[1], board[2], board[3], board[4]};
  return evaluate_best(all);
}

}  // namespace holotable
