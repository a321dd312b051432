#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>

#include "holotable/card.hpp"

namespace holotable {

enum class HandCategory : std::uint8_t {
  kHighCard = 0,
  kOnePair = 1,
  kTwoPair = 2,
  kThreeOfAKind = 3,
  kStraight = 4,
  kFlush = 5,
  kFullHouse = 6,
  kFourOfAKind = 7,
  kStraightFlush = 8,
};

std::string_view category_name(HandCategory c);

// Number of tiebreak ranks carried by each category.
constexpr int tiebreak_length(HandCategory c) {
  constexpr std::array<int, 9> kLengths = {5, 4, 3, 3, 1, 5, 2, 2, 1};
  return kLengths[static_cast<int>(c)];
}

// Totally ordered hand strength. Unused tiebreak slots are zero, so the
// defaulted comparison is lexicographic on (category, tiebreak).
class HandValue {
 public:
  HandValue() = default;
  HandValue(HandCategory category, std::span<const int> tiebreak);

  HandCategory category() const { return category_; }
  std::span<const std::uint8_t> tiebreak() const {
    return {ranks_.data(), static_cast<std::size_t>(tiebreak_length(category_))};
  }
  std::string str() const;

  auto operator<=>(const HandValue&) const = default;
  bool operator==(const HandValue&) const = default;

 private:
  HandCategory category_ = HandCategory::kHighCard;
  std::array<std::uint8_t, 5> ranks_{};
};

// Both throw std::invalid_argument on wrong count or duplicate cards.
HandValue evaluate5(std::span<const Card> cards);
HandValue best_of_seven(std::span<const Card, 2> hole, std::span<const Card, 5> board);

// Best hand among 5..7 distinct cards; the 7-card path used by best_of_seven.
HandValue evaluate_best(std::span<const Card> cards);

inline std::strong_ordering compare(const HandValue& a, const HandValue& b) { return a <=> b; }

}  // namespace holotable
