#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "craspkit/formula.hpp"
#include "craspkit/transformer.hpp"

namespace craspkit {

// Where each live truth value sits in the residual stream.  layouts[l] labels
// the slots of h^(l); scratch[l-1] lists the slots that receive layer l's
// attention output.
struct CompilationUnit {
  Formula source;  // desugared
  int depth = 0;
  std::vector<std::vector<std::string>> layouts;
  std::vector<std::vector<int>> scratch;
};

// Compiles a past-only formula without Y or MOD into a transformer of the
// same depth that accepts BOS.w iff w satisfies f.  Requires 1 <= s <= p-2
// and all coefficients and thresholds representable at prec.
Transformer compile(const Formula& f, const Alphabet& alphabet, Precision prec, CompilationUnit* unit = nullptr);

// Formulas for the bits of a vector of fixed-point values: bits[c][b-1] holds
// at a position iff bit b of coordinate c is 1 there.
struct BitFormulaBank {
  Precision prec;
  std::vector<std::vector<Formula>> bits;

  int width() const { return static_cast<int>(bits.size()); }
  // Concatenation of coordinates (same precision).
  BitFormulaBank concat(const BitFormulaBank& other) const;
};

// Every vector in F^n, in lexicographic significand order.
std::vector<FixedVec> all_vectors(int n, Precision prec);

// Bank for g(x) where x ranges over the vectors the input bank can take.
// Points outside the domain (or where g returns nullopt) are don't-cares.
// An empty domain means all of F^n.
using VectorFunction = std::function<std::optional<FixedVec>(const FixedVec&)>;
BitFormulaBank synth_function_formula(const BitFormulaBank& in, const VectorFunction& g, Precision out_prec,
                                      const std::vector<FixedVec>& domain = {});
// Same for a predicate; the result holds iff pred(x).
Formula synth_predicate(const BitFormulaBank& in, const std::function<std::optional<bool>(const FixedVec&)>& pred,
                        const std::vector<FixedVec>& domain = {});

// Bits (b = 1..p) of round_quotient(num, den, prec) at every position where
// den > 0, built with the long-division chain.
std::vector<Formula> division_bits(const Term& num, const Term& den, Precision prec);

struct DecompileLimits {
  int max_d = 2;
  int max_p = 4;
  int max_depth = 2;
};

// Formula of depth depth(t) that holds on w iff t accepts BOS.w.
Formula decompile(const Transformer& t, const DecompileLimits& limits = {});

}  // namespace craspkit
