#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace craspkit {

// Exact rationals.  mpq_class keeps values canonical as long as they are
// produced by arithmetic; make_rational canonicalizes explicit fractions.
using ExactRational = mpq_class;

ExactRational make_rational(long long num, long long den = 1);
// Accepts "n", "n/d" and finite decimals such as "-0.375".
ExactRational parse_rational(std::string_view text);
// floor(x) as an mpz.
mpz_class floor_of(const ExactRational& x);

using i128 = __int128;

struct Precision {
  int p = 8;
  int s = 4;

  Precision() = default;
  Precision(int p_, int s_);

  std::int64_t min_m() const { return -(std::int64_t{1} << (p - 1)); }
  std::int64_t max_m() const { return (std::int64_t{1} << (p - 1)) - 1; }
  // Significand of the real number 1 at this precision (may be out of range).
  std::int64_t unit() const { return std::int64_t{1} << s; }
  std::int64_t saturate(i128 m) const;
  bool contains(i128 m) const { return m >= min_m() && m <= max_m(); }

  bool operator==(const Precision&) const = default;
};

class Fixed {
 public:
  Fixed(std::int64_t m, Precision prec);

  std::int64_t significand() const { return m_; }
  Precision precision() const { return prec_; }
  ExactRational value() const;
  // Bit b in 1..p of the two's-complement view; b = p is the sign bit.
  int bit(int b) const;
  // Exact decimal expansion of m * 2^-s (always terminates).
  std::string to_decimal() const;

  bool operator==(const Fixed& o) const { return m_ == o.m_ && prec_ == o.prec_; }
  std::strong_ordering operator<=>(const Fixed& o) const { return m_ <=> o.m_; }

 private:
  std::int64_t m_;
  Precision prec_;
};

// Greatest grid point <= x, saturating at both ends of the range.
Fixed round(const ExactRational& x, Precision prec);
std::int64_t round_significand(const ExactRational& x, Precision prec);
// Same for a quotient of integers scaled by 2^-s: floor(2^s * num / den) clamped.
std::int64_t round_quotient(i128 num, i128 den, Precision prec);

int bit(const Fixed& x, int b);
int bit_of_significand(std::int64_t m, int b);
// Significand whose bit pattern (b = 1..p) is given; bits[b-1] is bit b.
std::int64_t significand_from_bits(const std::vector<int>& bits, Precision prec);

// round(e^x) at precision prec.
Fixed exp_round(const Fixed& x, Precision prec);
// Significand of round(e^x * v); e^x is never rounded on its own.
std::int64_t exp_times_round(const ExactRational& x, const ExactRational& v, Precision prec);

// round(sum(nums) / sum(dens)); nullopt when the denominators sum to zero.
std::optional<Fixed> sumdiv_round(const std::vector<ExactRational>& nums,
                                  const std::vector<ExactRational>& dens, Precision prec);

// Rounded cos(2*pi*t) and sin(2*pi*t) for rational t.
std::int64_t cos_turns_round(const ExactRational& t, Precision prec);
std::int64_t sin_turns_round(const ExactRational& t, Precision prec);

std::int64_t floor_div(i128 a, i128 b);

}  // namespace craspkit
