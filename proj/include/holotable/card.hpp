#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace holotable {

enum class Suit : std::uint8_t { kClubs = 0, kDiamonds = 1, kHearts = 2, kSpades = 3 };

inline constexpr int kMinRank = 2;
inline constexpr int kMaxRank = 14;  // ace
inline constexpr int kDeckSize = 52;

// A playing card. Rank is 2..14 with 14 the ace. Text form is rank character
// ("23456789TJQKA") followed by suit character ("cdhs"), e.g. "As", "Td".
class Card {
 public:
  constexpr Card(int rank, Suit suit) : rank_(static_cast<std::uint8_t>(rank)), suit_(suit) {
    if (rank < kMinRank || rank > kMaxRank) throw std::invalid_argument("card rank out of range");
  }

  // Index into the canonical order: clubs 2..A, diamonds 2..A, hearts 2..A, spades 2..A.
  static constexpr Card from_index(int index) {
    if (index < 0 || index >= kDeckSize) throw std::invalid_argument("card index out of range");
    return Card(index % 13 + kMinRank, static_cast<Suit>(index / 13));
  }
  static std::optional<Card> parse(std::string_view text);

  constexpr int rank() const { return rank_; }
  constexpr Suit suit() const { return suit_; }
  constexpr int index() const { return static_cast<int>(suit_) * 13 + (rank_ - kMinRank); }
  std::string str() const;

  constexpr bool operator==(const Card&) const = default;

 private:
  std::uint8_t rank_;
  Suit suit_;
};

std::vector<Card> parse_cards(std::string_view text);  // whitespace-separated; throws on bad input
std::string cards_str(std::span<const Card> cards, char sep = ' ');

}  // namespace holotable
