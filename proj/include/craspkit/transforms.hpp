#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "craspkit/formula.hpp"

namespace craspkit {

// Rewrites #, #<o, #o> into #< and #> with conditional corrections.
Formula eliminate_count_sugar(const Formula& f);
// Removes every conditional term by splitting the enclosing comparison.
Formula eliminate_ite(const Formula& f);
// Rewrites <=, >, >=, =, != and || into <, ! and &&.
Formula normalize_to_minimal_basis(const Formula& f);
// Full sugar removal: the result uses only Q, !, &&, <, #<, #>, + and integer
// constants (plus Y and MOD when the input has them).
Formula desugar(const Formula& f);

// Y-normal form over the given alphabet.  Requires no future counts under Y.
Formula y_normal_form(const Formula& f, const Alphabet& alphabet);
bool is_y_normal_form(const Formula& f);

struct NeutralReduction {
  std::int64_t padding = 1;
  Formula reduced;
};
// f(w) = e^x w1 e^(x-1) ... wn e^(x-1).
std::string neutral_pad(std::string_view w, char e, std::int64_t x);
// alphabet includes e; the reduced formula ranges over alphabet minus e.
NeutralReduction neutral_letter_reduce(const Formula& f, char e, const Alphabet& alphabet);

// Constant folding and trivial Boolean identities.  May lower the depth
// when a folded branch held the only deep subformula.
Formula simplify(const Formula& f);

// Signed unit decomposition of an Ite-free term: every count atom with its
// integer coefficient (duplicates kept, zero coefficients kept) plus the
// summed constant.
struct SignedAtoms {
  std::vector<std::pair<Term, std::int64_t>> atoms;
  std::int64_t constant = 0;
};
SignedAtoms signed_atoms(const Term& t);

// Coefficients merged per structurally distinct atom, first-occurrence order.
struct LinearForm {
  std::vector<std::pair<Term, std::int64_t>> coeffs;
  std::int64_t constant = 0;
};
LinearForm linear_form(const Term& t);

// Left-nested sum of the given terms; empty list gives constant 0.
Term sum_all(const std::vector<Term>& ts);

}  // namespace craspkit
