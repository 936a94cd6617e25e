#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "craspkit/formula.hpp"

namespace craspkit {

// Parses one formula.  When an alphabet is given, Q(.) symbols outside it are
// rejected.  Errors carry a 1-based line and column.
Formula parse_formula(std::string_view text, const std::optional<Alphabet>& alphabet = std::nullopt);
Term parse_term(std::string_view text, const std::optional<Alphabet>& alphabet = std::nullopt);

// Canonical text.  parse(print(f)) reproduces f exactly whenever f has the
// shape the parser builds (left-nested sums whose right operands are factors
// or negated factors); other shapes print as an equivalent canonical term.
std::string print(const Formula& f);
std::string print(const Term& t);

}  // namespace craspkit
