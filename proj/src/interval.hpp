#pragma once

// Outward-rounded dyadic interval arithmetic, used to decide floors of
// transcendental values exactly.  An interval [lo, hi] stands for
// [lo * 2^-prec, hi * 2^-prec].

#include <gmpxx.h>

namespace craspkit::detail {

struct Dyadic {
  mpz_class lo;
  mpz_class hi;
  long prec = 0;
};

Dyadic exp_enclosure(const mpq_class& x, long prec);
// Enclosures of cos(2*pi*t) and sin(2*pi*t).
Dyadic cos_turn_enclosure(const mpq_class& t, long prec);
Dyadic sin_turn_enclosure(const mpq_class& t, long prec);
Dyadic pi_enclosure(long prec);

}  // namespace craspkit::detail
