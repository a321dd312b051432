#include "holotable/card.hpp"

#include <sstream>

namespace holotable {
namespace {

constexpr std::string_view kRankChars = "23456789TJQKA";
constexpr std::string_view kSuitChars = "cdhs";

}  // namespace

std::optional<Card> Card::parse(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const auto r = kRankChars.find(text[0]);
  const auto s = kSuitChars.find(text[1]);
  if (r == std::string_view::npos || s == std::string_view::npos) return std::nullopt;
  return Card(static_cast<int>(r) + kMinRank, static_cast<Suit>(s));
}

std::string Card::str() const {
  return {kRankChars[rank_ - kMinRank], kSuitChars[static_cast<int>(suit_)]};
}

std::vector<Card> parse_cards(std::string_view text) {
  std::vector<Card> out;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    auto card = Card::parse(token);
    if (!card) throw std::invalid_argument("bad card text: " + token);
    out.push_back(*card);
  }
  return out;
}

std::string cards_str(std::span<const Card> cards, char sep) {
  std::string out;
  for (const auto& c : cards) {
    if (!out.empty()) out.push_back(sep);
    out += c.str();
  }
  return out;
}

}  // namespace holotable
