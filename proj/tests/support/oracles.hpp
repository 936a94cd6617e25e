#pragma once

// Reference implementations used only by tests.  Each one follows the
// definitions literally and shares no code with the library evaluators.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gmpxx.h>

#include "craspkit/formula.hpp"
#include "craspkit/maj2.hpp"

namespace oracle {

using craspkit::CmpOp;
using craspkit::Formula;
using craspkit::FormulaKind;
using craspkit::Maj2;
using craspkit::Maj2Kind;
using craspkit::Term;
using craspkit::TermKind;
using craspkit::Var;

inline bool cmp(std::int64_t a, CmpOp op, std::int64_t b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
  }
  throw std::logic_error("op");
}

bool holds(const Formula& f, std::string_view w, std::int64_t i);

// Positions are 1-based; every count is a fresh loop over the word.
inline std::int64_t value(const Term& t, std::string_view w, std::int64_t i) {
  const auto n = static_cast<std::int64_t>(w.size());
  auto count = [&](std::int64_t lo, std::int64_t hi) {
    std::int64_t c = 0;
    for (std::int64_t j = lo; j <= hi; ++j) c += holds(t->body, w, j);
    return c;
  };
  switch (t->kind) {
    case TermKind::CountLeft: return count(1, i);
    case TermKind::CountRight: return count(i, n);
    case TermKind::CountAll: return count(1, n);
    case TermKind::CountLeftStrict: return count(1, i - 1);
    case TermKind::CountRightStrict: return count(i + 1, n);
    case TermKind::Sum: return value(t->a, w, i) + value(t->b, w, i);
    case TermKind::Neg: return -value(t->a, w, i);
    case TermKind::Scale: return t->constant * value(t->a, w, i);
    case TermKind::IntConst: return t->constant;
    case TermKind::Ite: return holds(t->body, w, i) ? value(t->a, w, i) : value(t->b, w, i);
  }
  throw std::logic_error("term");
}

inline bool holds(const Formula& f, std::string_view w, std::int64_t i) {
  switch (f->kind) {
    case FormulaKind::Sym: return w[static_cast<std::size_t>(i - 1)] == f->symbol;
    case FormulaKind::Const: return f->value;
    case FormulaKind::Not: return !holds(f->a, w, i);
    case FormulaKind::And: return holds(f->a, w, i) && holds(f->b, w, i);
    case FormulaKind::Or: return holds(f->a, w, i) || holds(f->b, w, i);
    case FormulaKind::Compare: return cmp(value(f->lhs, w, i), f->op, value(f->rhs, w, i));
    case FormulaKind::Prev: return i > 1 && holds(f->a, w, i - 1);
    case FormulaKind::Mod: return i % f->modulus == f->residue;
  }
  throw std::logic_error("formula");
}

inline std::vector<bool> holds_all(const Formula& f, std::string_view w) {
  std::vector<bool> out;
  for (std::int64_t i = 1; i <= static_cast<std::int64_t>(w.size()); ++i) out.push_back(holds(f, w, i));
  return out;
}

// Literal MAJ semantics: enumerate every (position, formula index) pair.
inline bool maj_holds(const Maj2& g, std::string_view w, std::int64_t x, std::int64_t y) {
  const auto n = static_cast<std::int64_t>(w.size());
  auto pos = [&](Var v) { return v == Var::X ? x : y; };
  auto with = [&](Var v, std::int64_t p, const Maj2& body) {
    return v == Var::X ? maj_holds(body, w, p, y) : maj_holds(body, w, x, p);
  };
  switch (g->kind) {
    case Maj2Kind::Sym: return w[static_cast<std::size_t>(pos(g->var) - 1)] == g->symbol;
    case Maj2Kind::Less: return pos(g->var) < pos(g->var2);
    case Maj2Kind::Const: return g->value;
    case Maj2Kind::Not: return !maj_holds(g->a, w, x, y);
    case Maj2Kind::And: return maj_holds(g->a, w, x, y) && maj_holds(g->b, w, x, y);
    case Maj2Kind::Or: return maj_holds(g->a, w, x, y) || maj_holds(g->b, w, x, y);
    case Maj2Kind::Maj: {
      std::int64_t pairs = 0;
      for (std::int64_t p = 1; p <= n; ++p)
        for (const auto& item : g->items) pairs += with(g->var, p, item);
      const auto m = static_cast<std::int64_t>(g->items.size());
      return 2 * pairs > n * m;
    }
    case Maj2Kind::Exists:
      for (std::int64_t p = 1; p <= n; ++p)
        if (with(g->var, p, g->a)) return true;
      return false;
    case Maj2Kind::Forall:
      for (std::int64_t p = 1; p <= n; ++p)
        if (!with(g->var, p, g->a)) return false;
      return true;
  }
  throw std::logic_error("maj2");
}

// Number of maximal runs of w (over {a,b}) if it starts with a, else nullopt.
inline std::optional<int> blocks(std::string_view w) {
  if (w.empty() || w[0] != 'a') return std::nullopt;
  int runs = 1;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] != 'a' && w[i] != 'b') return std::nullopt;
    if (w[i] != w[i - 1]) ++runs;
  }
  return runs;
}

inline bool in_altplus(int k, std::string_view w) {
  auto b = blocks(w);
  return b && *b == k;
}

inline bool in_altplus_tilde(int k, std::string_view w) {
  std::string s;
  for (char c : w)
    if (c != 'e') s.push_back(c);
  return in_altplus(k, s);
}

inline bool has_subsequence(std::string_view w, std::string_view pattern) {
  std::size_t j = 0;
  for (char c : w)
    if (j < pattern.size() && c == pattern[j]) ++j;
  return j == pattern.size();
}

inline bool balanced(std::string_view w) {
  std::vector<char> stack;
  for (char c : w) {
    if (c == '(') stack.push_back(c);
    else if (c == ')') {
      if (stack.empty()) return false;
      stack.pop_back();
    } else {
      return false;
    }
  }
  return stack.empty();
}

// All words over sigma with lengths lo..hi.
inline std::vector<std::string> words(std::string_view sigma, int lo, int hi) {
  std::vector<std::string> out;
  std::vector<std::string> layer{""};
  for (int len = 1; len <= hi; ++len) {
    std::vector<std::string> next;
    for (const auto& w : layer)
      for (char c : sigma) next.push_back(w + c);
    layer = std::move(next);
    if (len >= lo) out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

// 100-digit decimal reference for grid floors of transcendental values.
using Dec = boost::multiprecision::cpp_dec_float_100;

inline Dec to_dec(const mpq_class& q) {
  return Dec(q.get_num().get_str()) / Dec(q.get_den().get_str());
}

// floor(2^s * x) clamped to [-2^(p-1), 2^(p-1) - 1].
inline std::int64_t grid_floor(const Dec& x, int p, int s) {
  Dec scaled = boost::multiprecision::floor(x * boost::multiprecision::pow(Dec(2), s));
  Dec lo = -boost::multiprecision::pow(Dec(2), p - 1), hi = boost::multiprecision::pow(Dec(2), p - 1) - 1;
  if (scaled < lo) scaled = lo;
  if (scaled > hi) scaled = hi;
  return scaled.convert_to<std::int64_t>();
}

inline std::int64_t exp_floor(std::int64_t m, int p, int s) {
  Dec x = Dec(m) / boost::multiprecision::pow(Dec(2), s);
  return grid_floor(boost::multiprecision::exp(x), p, s);
}

// cos and sin of rational turns are rational only at multiples of 1/2
// (Niven); the 100-digit value is snapped there so the floor is exact.
inline Dec snap_half(const Dec& x) {
  Dec h = boost::multiprecision::round(x * 2) / 2;
  return boost::multiprecision::abs(x - h) < Dec("1e-80") ? h : x;
}

inline std::int64_t cos_turns_floor(const mpq_class& t, int p, int s) {
  return grid_floor(snap_half(boost::multiprecision::cos(2 * boost::math::constants::pi<Dec>() * to_dec(t))), p, s);
}

inline std::int64_t sin_turns_floor(const mpq_class& t, int p, int s) {
  return grid_floor(snap_half(boost::multiprecision::sin(2 * boost::math::constants::pi<Dec>() * to_dec(t))), p, s);
}

}  // namespace oracle
