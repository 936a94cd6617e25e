#include "interval.hpp"

#include <stdexcept>

namespace craspkit::detail {
namespace {

mpz_class fdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

mpz_class cdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

mpz_class pow2(long e) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
  return r;
}

Dyadic from_rational(const mpq_class& x, long prec) {
  mpz_class num = x.get_num() * pow2(prec);
  return {fdiv(num, x.get_den()), cdiv(num, x.get_den()), prec};
}

Dyadic add(const Dyadic& a, const Dyadic& b) { return {a.lo + b.lo, a.hi + b.hi, a.prec}; }

Dyadic mul(const Dyadic& a, const Dyadic& b) {
  const mpz_class scale = pow2(a.prec);
  mpz_class c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  mpz_class mn = c[0], mx = c[0];
  for (auto& v : c) {
    if (v < mn) mn = v;
    if (v > mx) mx = v;
  }
  return {fdiv(mn, scale), cdiv(mx, scale), a.prec};
}

Dyadic div_int(const Dyadic& a, long k) {
  mpz_class kk = k;
  if (k > 0) return {fdiv(a.lo, kk), cdiv(a.hi, kk), a.prec};
  return {fdiv(a.hi, kk), cdiv(a.lo, kk), a.prec};
}

mpz_class abs_max(const Dyadic& a) {
  mpz_class l = abs(a.lo), h = abs(a.hi);
  return l > h ? l : h;
}

// atan(1/n) for integer n >= 2 via the alternating series.
Dyadic atan_inv(long n, long prec) {
  const mpz_class one = pow2(prec);
  const mpz_class nn = n;
  const mpz_class n2 = nn * nn;
  mpz_class power = fdiv(one, nn);  // floor(2^prec / n^(2k+1))
  mpz_class sum = 0;
  long terms = 0;
  for (long k = 0; power != 0; ++k) {
    mpz_class term = power / (2 * k + 1);
    if (k % 2 == 0) sum += term; else sum -= term;
    power = fdiv(power, n2);
    ++terms;
  }
  // Each term was truncated by at most 2 units; the tail is below one unit.
  mpz_class slack = 2 * terms + 2;
  return {sum - slack, sum + slack, prec};
}

// Taylor series of sin or cos on an interval argument; first_power is 1 for
// sin and 0 for cos.
Dyadic trig_series(const Dyadic& theta, int first_power) {
  const long prec = theta.prec;
  const mpz_class one = pow2(prec);
  Dyadic term = first_power == 0 ? Dyadic{one, one, prec} : theta;
  Dyadic sum = term;
  const Dyadic theta2 = mul(theta, theta);
  const mpz_class bound = abs_max(theta) / one + 1;  // ceil(|theta|) roughly
  for (long k = first_power + 2;; k += 2) {
    term = mul(term, theta2);
    term = div_int(term, k * (k - 1));
    term = Dyadic{-term.hi, -term.lo, prec};
    sum = add(sum, term);
    if (k > bound + 2 && abs_max(term) <= 1) {
      // Remaining tail is dominated by the first omitted term.
      mpz_class slack = abs_max(term) + 2;
      sum.lo -= slack;
      sum.hi += slack;
      return sum;
    }
  }
}

Dyadic turn_angle(const mpq_class& t, long prec) {
  // theta = 2*pi*t with t already reduced into [0, 1).
  Dyadic pi = pi_enclosure(prec);
  Dyadic tt = from_rational(t, prec);
  Dyadic two_pi{2 * pi.lo, 2 * pi.hi, prec};
  return mul(two_pi, tt);
}

mpq_class reduce_turns(const mpq_class& t) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
  mpq_class r = t - mpq_class(fl);
  r.canonicalize();
  return r;
}

}  // namespace

Dyadic pi_enclosure(long prec) {
  const long work = prec + 8;
  Dyadic a = atan_inv(5, work);
  Dyadic b = atan_inv(239, work);
  Dyadic pi{16 * a.lo - 4 * b.hi, 16 * a.hi - 4 * b.lo, work};
  const mpz_class shift = pow2(8);
  return {fdiv(pi.lo, shift), cdiv(pi.hi, shift), prec};
}

Dyadic exp_enclosure(const mpq_class& x, long prec) {
  if (sgn(x) < 0) {
    Dyadic pos = exp_enclosure(-x, prec);
    const mpz_class one2 = pow2(2 * prec);
    return {fdiv(one2, pos.hi), cdiv(one2, pos.lo), prec};
  }
  // Halve until y = x / 2^r <= 1/2, sum the series, then square back r times.
  long r = 0;
  mpq_class y = x;
  const mpq_class half(1, 2);
  while (y > half) {
    y /= 2;
    ++r;
  }
  const long work = prec + 2 * r + 16;
  const mpz_class one = pow2(work);
  Dyadic yy = from_rational(y, work);
  Dyadic term{one, one, work};
  Dyadic sum = term;
  for (long k = 1;; ++k) {
    term = mul(term, yy);
    term = div_int(term, k);
    sum = add(sum, term);
    if (term.hi <= 1) {
      // y <= 1/2, so the tail is at most twice the last term.
      sum.hi += 2 * term.hi + 2;
      break;
    }
  }
  for (long i = 0; i < r; ++i) sum = mul(sum, sum);
  const mpz_class shift = pow2(work - prec);
  return {fdiv(sum.lo, shift), cdiv(sum.hi, shift), prec};
}

Dyadic cos_turn_enclosure(const mpq_class& t, long prec) {
  const long work = prec + 16;
  Dyadic r = trig_series(turn_angle(reduce_turns(t), work), 0);
  const mpz_class shift = pow2(16);
  return {fdiv(r.lo, shift), cdiv(r.hi, shift), prec};
}

Dyadic sin_turn_enclosure(const mpq_class& t, long prec) {
  const long work = prec + 16;
  Dyadic r = trig_series(turn_angle(reduce_turns(t), work), 1);
  const mpz_class shift = pow2(16);
  return {fdiv(r.lo, shift), cdiv(r.hi, shift), prec};
}

}  // namespace craspkit::detail
