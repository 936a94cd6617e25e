#include "craspkit/fixed.hpp"

#include <cctype>

#include "craspkit/error.hpp"
#include "interval.hpp"

namespace craspkit {
namespace {

mpz_class to_mpz(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  mpz_class hi = static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64));
  mpz_class lo = static_cast<unsigned long>(static_cast<std::uint64_t>(u));
  mpz_class r = (hi << 64) + lo;
  return neg ? mpz_class(-r) : r;
}

std::int64_t clamp_mpz(const mpz_class& z, Precision prec) {
  if (z < prec.min_m()) return prec.min_m();
  if (z > prec.max_m()) return prec.max_m();
  return z.get_si();
}

// Floor of (num * 2^s) / (den * 2^prec) for an mpz numerator.
mpz_class scaled_floor(const mpz_class& num, const mpz_class& den, int s, long prec) {
  mpz_class n = num << s;
  mpz_class d = den << prec;
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  return q;
}

// Decide floor(2^s * X * v) where X is known only through enclosures.
template <class Enclose>
std::int64_t decide_floor(Enclose enclose, const ExactRational& v, Precision prec) {
  const mpz_class a = v.get_num();
  const mpz_class b = v.get_den();
  for (long bits = 64;; bits *= 2) {
    detail::Dyadic e = enclose(bits);
    const mpz_class& lo_end = sgn(a) > 0 ? e.lo : e.hi;
    const mpz_class& hi_end = sgn(a) > 0 ? e.hi : e.lo;
    std::int64_t lo = clamp_mpz(scaled_floor(lo_end * a, b, prec.s, bits), prec);
    std::int64_t hi = clamp_mpz(scaled_floor(hi_end * a, b, prec.s, bits), prec);
    if (lo == hi) return lo;
    if (bits > (1L << 20)) throw Error("interval refinement did not converge");
  }
}

}  // namespace

ExactRational make_rational(long long num, long long den) {
  if (den == 0) throw DomainError("zero denominator");
  ExactRational r(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
  r.canonicalize();
  return r;
}

ExactRational parse_rational(std::string_view text) {
  std::string t(text);
  auto slash = t.find('/');
  try {
    if (slash != std::string::npos) {
      ExactRational r(mpz_class(t.substr(0, slash), 10), mpz_class(t.substr(slash + 1), 10));
      if (r.get_den() == 0) throw DomainError("zero denominator");
      r.canonicalize();
      return r;
    }
    auto dot = t.find('.');
    if (dot == std::string::npos) return ExactRational(mpz_class(t, 10));
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < t.size(); ++i) den *= 10;
    ExactRational r(mpz_class(digits, 10), den);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw DomainError("not a rational number: " + t);
  }
}

mpz_class floor_of(const ExactRational& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

std::int64_t floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<std::int64_t>(q);
}

Precision::Precision(int p_, int s_) : p(p_), s(s_) {
  if (p < 2 || p > 32) throw DomainError("precision p must lie in [2, 32]");
  if (s < 0 || s >= p) throw DomainError("precision s must lie in [0, p)");
}

std::int64_t Precision::saturate(i128 m) const {
  if (m < min_m()) return min_m();
  if (m > max_m()) return max_m();
  return static_cast<std::int64_t>(m);
}

Fixed::Fixed(std::int64_t m, Precision prec) : m_(m), prec_(prec) {
  if (!prec.contains(m)) throw DomainError("significand " + std::to_string(m) + " outside F_{" +
                                           std::to_string(prec.p) + "," + std::to_string(prec.s) + "}");
}

ExactRational Fixed::value() const {
  ExactRational r(mpz_class(static_cast<long>(m_)), mpz_class(1) << prec_.s);
  r.canonicalize();
  return r;
}

int Fixed::bit(int b) const {
  if (b < 1 || b > prec_.p) throw DomainError("bit index out of range");
  return bit_of_significand(m_, b);
}

std::string Fixed::to_decimal() const {
  // m * 2^-s = m * 5^s / 10^s
  mpz_class scaled = mpz_class(static_cast<long>(m_ < 0 ? -m_ : m_));
  mpz_class five;
  mpz_ui_pow_ui(five.get_mpz_t(), 5, static_cast<unsigned long>(prec_.s));
  scaled *= five;
  std::string digits = scaled.get_str();
  const std::size_t s = static_cast<std::size_t>(prec_.s);
  if (digits.size() <= s) digits = std::string(s + 1 - digits.size(), '0') + digits;
  std::string whole = digits.substr(0, digits.size() - s);
  std::string frac = digits.substr(digits.size() - s);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = m_ < 0 ? "-" : "";
  out += whole;
  if (!frac.empty()) out += "." + frac;
  return out;
}

int bit_of_significand(std::int64_t m, int b) { return static_cast<int>((m >> (b - 1)) & 1); }

int bit(const Fixed& x, int b) { return x.bit(b); }

std::int64_t significand_from_bits(const std::vector<int>& bits, Precision prec) {
  if (static_cast<int>(bits.size()) != prec.p) throw DomainError("bit vector width mismatch");
  std::int64_t m = bits[prec.p - 1] ? prec.min_m() : 0;
  for (int b = 1; b < prec.p; ++b)
    if (bits[b - 1]) m += std::int64_t{1} << (b - 1);
  return m;
}

std::int64_t round_significand(const ExactRational& x, Precision prec) {
  mpz_class n = x.get_num() << prec.s;
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), x.get_den_mpz_t());
  return clamp_mpz(q, prec);
}

Fixed round(const ExactRational& x, Precision prec) { return Fixed(round_significand(x, prec), prec); }

std::int64_t round_quotient(i128 num, i128 den, Precision prec) {
  if (den == 0) throw DomainError("zero denominator");
  // num is already in units of 2^-s, as is den, so the quotient of values
  // is num/den and its significand is floor(2^s * num / den).
  const i128 lim = i128{1} << 90;
  if (num > -lim && num < lim) return prec.saturate(floor_div(num << prec.s, den));
  mpz_class q;
  mpz_class n = to_mpz(num) << prec.s;
  mpz_class d = to_mpz(den);
  mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  return clamp_mpz(q, prec);
}

std::int64_t exp_times_round(const ExactRational& x, const ExactRational& v, Precision prec) {
  if (sgn(v) == 0) return 0;
  if (sgn(x) == 0) return round_significand(v, prec);
  const ExactRational grid(1, mpz_class(1) << prec.s);
  const ExactRational abs_v = abs(v);
  const ExactRational top(mpz_class(1) << (prec.p - 1), mpz_class(1) << prec.s);
  // e^x >= e^p > 2^p pushes any |v| >= 2^-s past the range.
  if (x >= prec.p && abs_v >= grid) return sgn(v) > 0 ? prec.max_m() : prec.min_m();
  // e^x < 2^-(p+s+1) keeps |e^x v| below one grid step for |v| within range.
  if (x <= -(prec.p + prec.s + 1) && abs_v <= top) return sgn(v) > 0 ? 0 : -1;
  return decide_floor([&](long bits) { return detail::exp_enclosure(x, bits); }, v, prec);
}

Fixed exp_round(const Fixed& x, Precision prec) {
  return Fixed(exp_times_round(x.value(), ExactRational(1), prec), prec);
}

std::optional<Fixed> sumdiv_round(const std::vector<ExactRational>& nums,
                                  const std::vector<ExactRational>& dens, Precision prec) {
  if (nums.size() != dens.size() || nums.empty()) throw DomainError("sumdiv needs equal non-empty lists");
  ExactRational n = 0, d = 0;
  for (const auto& x : nums) n += x;
  for (const auto& x : dens) d += x;
  if (sgn(d) == 0) return std::nullopt;
  return round(n / d, prec);
}

namespace {

ExactRational reduce_turn(const ExactRational& t) {
  ExactRational r = t - ExactRational(floor_of(t));
  r.canonicalize();
  return r;
}

// cos(2 pi t) is rational only at the Niven points; these are decided exactly.
std::optional<ExactRational> exact_cos(const ExactRational& t) {
  const ExactRational r = reduce_turn(t);
  const long den = r.get_den().fits_slong_p() ? r.get_den().get_si() : 0;
  const long num = r.get_num().get_si();
  switch (den) {
    case 1: return ExactRational(1);
    case 2: return ExactRational(-1);
    case 4: return ExactRational(0);
    case 3: return ExactRational(-1, 2);
    case 6: return (num == 1 || num == 5) ? ExactRational(1, 2) : ExactRational(-1, 2);
    default: return std::nullopt;
  }
}

}  // namespace

std::int64_t cos_turns_round(const ExactRational& t, Precision prec) {
  if (auto c = exact_cos(t)) return round_significand(*c, prec);
  return decide_floor([&](long bits) { return detail::cos_turn_enclosure(t, bits); }, ExactRational(1), prec);
}

std::int64_t sin_turns_round(const ExactRational& t, Precision prec) {
  // sin(2 pi t) = cos(2 pi (t - 1/4))
  const ExactRational shifted = t - ExactRational(1, 4);
  if (auto c = exact_cos(shifted)) return round_significand(*c, prec);
  return decide_floor([&](long bits) { return detail::sin_turn_enclosure(t, bits); }, ExactRational(1), prec);
}

}  // namespace craspkit
