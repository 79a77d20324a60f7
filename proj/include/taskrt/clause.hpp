#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace taskrt {

// Opaque identity of a declared datum. Two clauses conflict only when their
// tokens are equal; there is no notion of overlapping ranges.
enum class Token : std::uint64_t {};

inline Token token_of(const void* datum) noexcept {
  return Token{reinterpret_cast<std::uintptr_t>(datum)};
}

constexpr Token token_from(std::uint64_t id) noexcept { return Token{id}; }

enum class Direction : std::uint8_t { In, Out, InOut };

constexpr bool writes(Direction d) noexcept { return d != Direction::In; }

// IN joined with anything that writes is INOUT; OUT joined with IN is INOUT.
constexpr Direction join(Direction a, Direction b) noexcept {
  return a == b ? a : Direction::InOut;
}

std::string_view to_string(Direction d) noexcept;

struct DependenceClause {
  Token token{};
  Direction direction = Direction::In;

  friend bool operator==(const DependenceClause&, const DependenceClause&) = default;
};

inline DependenceClause in(Token t) noexcept { return {t, Direction::In}; }
inline DependenceClause out(Token t) noexcept { return {t, Direction::Out}; }
inline DependenceClause inout(Token t) noexcept { return {t, Direction::InOut}; }

// Collapses repeated tokens into one clause whose direction is the join of
// all occurrences. Order of first occurrence is kept.
std::vector<DependenceClause> merge_clauses(std::vector<DependenceClause> clauses);

}  // namespace taskrt
