#pragma once

// Memoized bottom-up rewriting over formula DAGs.  Subclasses override the
// hooks for the node kinds they change; everything else is rebuilt only if a
// child changed, so untouched subgraphs keep their identity and sharing.

#include <unordered_map>

#include "craspkit/formula.hpp"

namespace craspkit::detail {

class Rebuilder {
 public:
  virtual ~Rebuilder() = default;

  Formula formula(const Formula& f) {
    auto it = fmemo_.find(f.get());
    if (it != fmemo_.end()) return it->second.second;
    Formula r = on_formula(f);
    fmemo_.emplace(f.get(), std::make_pair(f, r));
    return r;
  }

  Term term(const Term& t) {
    auto it = tmemo_.find(t.get());
    if (it != tmemo_.end()) return it->second.second;
    Term r = on_term(t);
    tmemo_.emplace(t.get(), std::make_pair(t, r));
    return r;
  }

 protected:
  virtual Formula on_formula(const Formula& f) { return rebuild(f); }
  virtual Term on_term(const Term& t) { return rebuild(t); }

  Formula rebuild(const Formula& f) {
    switch (f->kind) {
      case FormulaKind::Sym:
      case FormulaKind::Const:
      case FormulaKind::Mod: return f;
      case FormulaKind::Not: {
        Formula a = formula(f->a);
        return a == f->a ? f : lnot(a);
      }
      case FormulaKind::Prev: {
        Formula a = formula(f->a);
        return a == f->a ? f : prev(a);
      }
      case FormulaKind::And:
      case FormulaKind::Or: {
        Formula a = formula(f->a), b = formula(f->b);
        if (a == f->a && b == f->b) return f;
        return f->kind == FormulaKind::And ? land(a, b) : lor(a, b);
      }
      case FormulaKind::Compare: {
        Term l = term(f->lhs), r = term(f->rhs);
        return (l == f->lhs && r == f->rhs) ? f : cmp(l, f->op, r);
      }
    }
    return f;
  }

  Term rebuild(const Term& t) {
    switch (t->kind) {
      case TermKind::IntConst: return t;
      case TermKind::CountLeft:
      case TermKind::CountRight:
      case TermKind::CountAll:
      case TermKind::CountLeftStrict:
      case TermKind::CountRightStrict: {
        Formula b = formula(t->body);
        if (b == t->body) return t;
        switch (t->kind) {
          case TermKind::CountLeft: return count_left(b);
          case TermKind::CountRight: return count_right(b);
          case TermKind::CountAll: return count_all(b);
          case TermKind::CountLeftStrict: return count_left_strict(b);
          default: return count_right_strict(b);
        }
      }
      case TermKind::Sum: {
        Term a = term(t->a), b = term(t->b);
        return (a == t->a && b == t->b) ? t : sum(a, b);
      }
      case TermKind::Neg: {
        Term a = term(t->a);
        return a == t->a ? t : neg(a);
      }
      case TermKind::Scale: {
        Term a = term(t->a);
        return a == t->a ? t : scale(t->constant, a);
      }
      case TermKind::Ite: {
        Formula c = formula(t->body);
        Term a = term(t->a), b = term(t->b);
        return (c == t->body && a == t->a && b == t->b) ? t : ite(c, a, b);
      }
    }
    return t;
  }

 private:
  // Keys are kept alive alongside the results so addresses cannot be reused.
  std::unordered_map<const void*, std::pair<Formula, Formula>> fmemo_;
  std::unordered_map<const void*, std::pair<Term, Term>> tmemo_;
};

}  // namespace craspkit::detail
