#include <map>
#include <utility>

#include "craspkit/error.hpp"
#include "craspkit/maj2.hpp"
#include "craspkit/transforms.hpp"

namespace craspkit {

namespace {

// TL -> MAJ2.  A linear condition sum(l_a * count_a) + K > 0 becomes one MAJ
// whose items come in pairs: (F, TRUE) adds count(F) to the majority margin,
// (!F, FALSE) subtracts it.  F(u = v) has count 1 and carries the constant.
class ToMaj2 {
 public:
  Maj2 formula(const Formula& f, Var v) {
    auto key = std::make_pair(static_cast<const void*>(f.get()), v);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second.second;
    Maj2 out;
    switch (f->kind) {
      case FormulaKind::Sym: out = m_sym(f->symbol, v); break;
      case FormulaKind::Const: out = m_const(f->value); break;
      case FormulaKind::Not: out = m_not(formula(f->a, v)); break;
      case FormulaKind::And: out = m_and(formula(f->a, v), formula(f->b, v)); break;
      case FormulaKind::Or: out = m_or(formula(f->a, v), formula(f->b, v)); break;
      case FormulaKind::Prev: throw DomainError("Y has no MAJ2 translation");
      case FormulaKind::Mod: throw DomainError("MOD has no MAJ2 translation");
      case FormulaKind::Compare: out = compare(f, v); break;
    }
    memo_.emplace(key, std::make_pair(f, out));
    return out;
  }

 private:
  // The key node is held so its address cannot be reused while memoized.
  std::map<std::pair<const void*, Var>, std::pair<Formula, Maj2>> memo_;

  Maj2 compare(const Formula& f, Var v) {
    switch (f->op) {
      case CmpOp::Lt: return positive(f->lhs, f->rhs, 0, v);
      case CmpOp::Gt: return positive(f->rhs, f->lhs, 0, v);
      case CmpOp::Le: return positive(f->lhs, f->rhs, 1, v);
      case CmpOp::Ge: return positive(f->rhs, f->lhs, 1, v);
      case CmpOp::Eq: return m_and(positive(f->lhs, f->rhs, 1, v), positive(f->rhs, f->lhs, 1, v));
      case CmpOp::Ne: return m_or(positive(f->lhs, f->rhs, 0, v), positive(f->rhs, f->lhs, 0, v));
    }
    throw DomainError("unknown comparison");
  }

  // Formula for (hi - lo + slack > 0).
  Maj2 positive(const Term& lo, const Term& hi, std::int64_t slack, Var v) {
    LinearForm l = linear_form(lo), h = linear_form(hi);
    std::vector<std::pair<Term, std::int64_t>> coeffs;
    auto add = [&](const Term& atom, std::int64_t c) {
      for (auto& [a, k] : coeffs)
        if (structurally_equal(a, atom)) {
          k += c;
          return;
        }
      coeffs.emplace_back(atom, c);
    };
    for (const auto& [a, c] : h.coeffs) add(a, c);
    for (const auto& [a, c] : l.coeffs) add(a, -c);
    std::int64_t k = h.constant - l.constant + slack;

    std::vector<Maj2> items;
    const Var u = other(v);
    auto emit = [&](const Maj2& atom, std::int64_t c) {
      for (std::int64_t j = 0; j < c; ++j) {
        items.push_back(atom);
        items.push_back(m_const(true));
      }
      for (std::int64_t j = 0; j < -c; ++j) {
        items.push_back(m_not(atom));
        items.push_back(m_const(false));
      }
    };
    for (const auto& [a, c] : coeffs)
      if (c != 0) emit(count_atom(a, v), c);
    if (items.empty()) return m_const(k > 0);
    emit(m_eq(u, v), k);
    return m_maj(u, std::move(items));
  }

  Maj2 count_atom(const Term& t, Var v) {
    const Var u = other(v);
    Maj2 body = formula(t->body, u);
    switch (t->kind) {
      case TermKind::CountLeft: return m_and(m_not(m_less(v, u)), body);
      case TermKind::CountRight: return m_and(m_not(m_less(u, v)), body);
      case TermKind::CountAll: return body;
      case TermKind::CountLeftStrict: return m_and(m_less(u, v), body);
      case TermKind::CountRightStrict: return m_and(m_less(v, u), body);
      default: throw DomainError("unexpected term in linear form");
    }
  }
};

enum class Order { Before, Same, After };  // position of u relative to v

// MAJ2 -> TL.  Input has been through desugar_quantifiers.
class ToTl {
 public:
  Formula formula(const Maj2& g, Var v) {
    auto key = std::make_pair(static_cast<const void*>(g.get()), v);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second.second;
    if (g->free & var_bit(other(v))) throw DomainError("subformula has an unexpected free variable");
    Formula out;
    switch (g->kind) {
      case Maj2Kind::Sym: out = sym(g->symbol); break;
      case Maj2Kind::Less: out = truth(false); break;  // only v < v is possible here
      case Maj2Kind::Const: out = truth(g->value); break;
      case Maj2Kind::Not: out = lnot(formula(g->a, v)); break;
      case Maj2Kind::And: out = land(formula(g->a, v), formula(g->b, v)); break;
      case Maj2Kind::Or: out = lor(formula(g->a, v), formula(g->b, v)); break;
      case Maj2Kind::Maj: out = majority(g, v); break;
      case Maj2Kind::Exists:
      case Maj2Kind::Forall: throw DomainError("quantifier left after desugaring");
    }
    memo_.emplace(key, std::make_pair(g, out));
    return out;
  }

 private:
  std::map<std::pair<const void*, Var>, std::pair<Maj2, Formula>> memo_;

  Formula majority(const Maj2& g, Var v) {
    const Var bound = g->var;
    std::vector<Term> counts;
    for (const auto& item : g->items) {
      if (bound == v) counts.push_back(count_all(formula(item, v)));
      else counts.push_back(count_with_outer(item, v, bound));
    }
    auto m = static_cast<std::int64_t>(g->items.size());
    return cmp(scale(m, count_all(truth(true))), CmpOp::Lt, scale(2, sum_all(counts)));
  }

  struct Split {
    std::vector<Maj2> v_atoms;  // free in v or closed
    bool has_order = false;
  };

  void classify(const Maj2& g, Var v, Var u, Split& s) {
    switch (g->kind) {
      case Maj2Kind::Not: classify(g->a, v, u, s); return;
      case Maj2Kind::And:
      case Maj2Kind::Or:
        classify(g->a, v, u, s);
        classify(g->b, v, u, s);
        return;
      case Maj2Kind::Const: return;
      case Maj2Kind::Less:
        if (g->var != g->var2) s.has_order = true;
        return;
      default: break;
    }
    if (g->free & var_bit(u)) return;
    for (const auto& a : s.v_atoms)
      if (structurally_equal(a, g)) return;
    s.v_atoms.push_back(g);
  }

  // Replaces v-atoms and order atoms by constants and folds.
  Maj2 substitute(const Maj2& g, Var v, Var u, const Split& s, std::uint64_t alpha, Order o) {
    switch (g->kind) {
      case Maj2Kind::Const: return g;
      case Maj2Kind::Not: {
        Maj2 a = substitute(g->a, v, u, s, alpha, o);
        return a->kind == Maj2Kind::Const ? m_const(!a->value) : m_not(a);
      }
      case Maj2Kind::And:
      case Maj2Kind::Or: {
        bool is_and = g->kind == Maj2Kind::And;
        Maj2 a = substitute(g->a, v, u, s, alpha, o);
        Maj2 b = substitute(g->b, v, u, s, alpha, o);
        for (const Maj2* p : {&a, &b})
          if ((*p)->kind == Maj2Kind::Const) {
            if ((*p)->value != is_and) return m_const(!is_and);
            return p == &a ? b : a;
          }
        return is_and ? m_and(a, b) : m_or(a, b);
      }
      case Maj2Kind::Less:
        if (g->var == g->var2) return m_const(false);
        if (g->var == u) return m_const(o == Order::Before);
        return m_const(o == Order::After);
      default: break;
    }
    if (g->free & var_bit(u)) return g;
    for (std::size_t i = 0; i < s.v_atoms.size(); ++i)
      if (structurally_equal(s.v_atoms[i], g)) return m_const((alpha >> i) & 1);
    throw DomainError("internal: unclassified atom");
  }

  // Number of positions u with g(v = current, u).
  Term count_with_outer(const Maj2& g, Var v, Var u) {
    Split s;
    classify(g, v, u, s);
    if (s.v_atoms.size() > 20) throw DomainError("too many outer atoms under one MAJ");
    std::vector<Term> parts;
    const std::uint64_t total = std::uint64_t{1} << s.v_atoms.size();
    for (std::uint64_t alpha = 0; alpha < total; ++alpha) {
      std::vector<Term> cases;
      auto body = [&](Order o) { return substitute(g, v, u, s, alpha, o); };
      if (!s.has_order) {
        Maj2 chi = body(Order::Same);
        if (!(chi->kind == Maj2Kind::Const && !chi->value)) cases.push_back(count_all(formula(chi, u)));
      } else {
        Maj2 before = body(Order::Before), same = body(Order::Same), after = body(Order::After);
        auto is_false = [](const Maj2& c) { return c->kind == Maj2Kind::Const && !c->value; };
        if (!is_false(before)) cases.push_back(count_left_strict(formula(before, u)));
        if (!is_false(same)) cases.push_back(ite(formula(same, u), constant(1), constant(0)));
        if (!is_false(after)) cases.push_back(count_right_strict(formula(after, u)));
      }
      if (cases.empty()) continue;
      Term t = sum_all(cases);
      if (s.v_atoms.empty()) {
        parts.push_back(t);
        continue;
      }
      std::vector<Formula> lits;
      for (std::size_t i = 0; i < s.v_atoms.size(); ++i) {
        Formula a = formula(s.v_atoms[i], v);
        lits.push_back((alpha >> i) & 1 ? a : lnot(a));
      }
      parts.push_back(ite(land_all(lits), t, constant(0)));
    }
    return sum_all(parts);
  }
};

}  // namespace

Maj2 tl_to_maj2(const Formula& f) { return ToMaj2().formula(eliminate_ite(f), Var::X); }

Formula maj2_to_tl(const Maj2& g) {
  if (g->free & var_bit(Var::Y)) throw DomainError("maj2_to_tl needs free variables within {x}");
  return eliminate_count_sugar(ToTl().formula(desugar_quantifiers(g), Var::X));
}

Maj2 closed_wrapper(const Maj2& f) {
  Maj2 last = m_not(m_exists(Var::Y, m_less(Var::X, Var::Y)));
  return m_exists(Var::X, m_and(last, f));
}

}  // namespace craspkit
