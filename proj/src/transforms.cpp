#include "craspkit/transforms.hpp"

#include <functional>
#include <map>
#include <numeric>
#include <unordered_map>

#include "craspkit/error.hpp"
#include "craspkit/eval.hpp"
#include "rebuild.hpp"

namespace craspkit {
namespace {

Term indicator(const Formula& f) { return ite(f, constant(1), constant(0)); }

class CountSugar : public detail::Rebuilder {
 protected:
  Term on_term(const Term& t) override {
    switch (t->kind) {
      case TermKind::CountAll: {
        Formula b = formula(t->body);
        return sum(sum(count_left(b), count_right(b)), neg(indicator(b)));
      }
      case TermKind::CountLeftStrict: {
        Formula b = formula(t->body);
        return sum(count_left(b), neg(indicator(b)));
      }
      case TermKind::CountRightStrict: {
        Formula b = formula(t->body);
        return sum(count_right(b), neg(indicator(b)));
      }
      default: return rebuild(t);
    }
  }
};

// Innermost conditional reachable from t without entering count bodies or
// conditions.
const TermNode* find_ite(const Term& t) {
  switch (t->kind) {
    case TermKind::Sum: {
      if (auto r = find_ite(t->a)) return r;
      return find_ite(t->b);
    }
    case TermKind::Neg:
    case TermKind::Scale: return find_ite(t->a);
    case TermKind::Ite: {
      if (auto r = find_ite(t->a)) return r;
      if (auto r = find_ite(t->b)) return r;
      return t.get();
    }
    default: return nullptr;
  }
}

Term replace(const Term& t, const TermNode* target, const Term& with) {
  if (t.get() == target) return with;
  switch (t->kind) {
    case TermKind::Sum: {
      Term a = replace(t->a, target, with), b = replace(t->b, target, with);
      return (a == t->a && b == t->b) ? t : sum(a, b);
    }
    case TermKind::Neg: {
      Term a = replace(t->a, target, with);
      return a == t->a ? t : neg(a);
    }
    case TermKind::Scale: {
      Term a = replace(t->a, target, with);
      return a == t->a ? t : scale(t->constant, a);
    }
    case TermKind::Ite: {
      Term a = replace(t->a, target, with), b = replace(t->b, target, with);
      return (a == t->a && b == t->b) ? t : ite(t->body, a, b);
    }
    default: return t;
  }
}

class IteElimination : public detail::Rebuilder {
 protected:
  Formula on_formula(const Formula& f) override {
    if (f->kind != FormulaKind::Compare) return rebuild(f);
    Term l = term(f->lhs), r = term(f->rhs);
    return split(l, f->op, r, f);
  }

 private:
  Formula split(const Term& l, CmpOp op, const Term& r, const Formula& original) {
    const TermNode* target = find_ite(l);
    if (!target) target = find_ite(r);
    if (!target) {
      if (original && l == original->lhs && r == original->rhs) return original;
      return cmp(l, op, r);
    }
    Formula cond = target->body;
    Term then_t = target->a, else_t = target->b;
    Formula yes = split(replace(l, target, then_t), op, replace(r, target, then_t), nullptr);
    Formula no = split(replace(l, target, else_t), op, replace(r, target, else_t), nullptr);
    return lor(land(cond, yes), land(lnot(cond), no));
  }
};

// Builds l < r, moving negated and scaled parts across the comparison so no
// Neg/Scale remains.  Atoms are never cancelled, keeping the depth intact.
Formula strict_less(const Term& l, const Term& r) {
  if (((l->features | r->features) & kArithSugar) == 0) return cmp(l, CmpOp::Lt, r);
  SignedAtoms sl = signed_atoms(l), sr = signed_atoms(r);
  std::vector<Term> left, right;
  auto place = [](const SignedAtoms& s, std::vector<Term>& same, std::vector<Term>& other) {
    for (const auto& [atom, c] : s.atoms) {
      if (c == 0) {
        same.push_back(atom);
        other.push_back(atom);
      }
      for (std::int64_t k = 0; k < c; ++k) same.push_back(atom);
      for (std::int64_t k = 0; k < -c; ++k) other.push_back(atom);
    }
  };
  place(sl, left, right);
  place(sr, right, left);
  std::int64_t k = sr.constant - sl.constant;  // l < r  <=>  L + (-k) < R
  if (k > 0) right.push_back(constant(k));
  if (k < 0) left.push_back(constant(-k));
  return cmp(sum_all(left), CmpOp::Lt, sum_all(right));
}

class MinimalBasis : public detail::Rebuilder {
 public:
  explicit MinimalBasis(bool full) : full_(full) {}

 protected:
  Formula on_formula(const Formula& f) override {
    switch (f->kind) {
      case FormulaKind::Or: return lnot(land(lnot(formula(f->a)), lnot(formula(f->b))));
      case FormulaKind::Const:
        if (!full_) return f;
        return f->value ? cmp(constant(0), CmpOp::Lt, constant(1)) : cmp(constant(1), CmpOp::Lt, constant(0));
      case FormulaKind::Compare: {
        Term l = term(f->lhs), r = term(f->rhs);
        auto lt = [&](const Term& a, const Term& b) {
          if (full_) return strict_less(a, b);
          return cmp(a, CmpOp::Lt, b);
        };
        switch (f->op) {
          case CmpOp::Lt:
            if (l == f->lhs && r == f->rhs && !(full_ && (f->features & kArithSugar))) return f;
            return lt(l, r);
          case CmpOp::Gt: return lt(r, l);
          case CmpOp::Le: return lnot(lt(r, l));
          case CmpOp::Ge: return lnot(lt(l, r));
          case CmpOp::Eq: return land(lnot(lt(l, r)), lnot(lt(r, l)));
          case CmpOp::Ne: return lnot(land(lnot(lt(l, r)), lnot(lt(r, l))));
        }
        return f;
      }
      default: return rebuild(f);
    }
  }

 private:
  bool full_;
};

void collect_signed(const Term& t, std::int64_t coef, SignedAtoms& out) {
  switch (t->kind) {
    case TermKind::IntConst: out.constant += coef * t->constant; return;
    case TermKind::Sum:
      collect_signed(t->a, coef, out);
      collect_signed(t->b, coef, out);
      return;
    case TermKind::Neg: collect_signed(t->a, -coef, out); return;
    case TermKind::Scale: collect_signed(t->a, coef * t->constant, out); return;
    case TermKind::Ite: throw DomainError("linear decomposition needs an Ite-free term");
    default: out.atoms.emplace_back(t, coef); return;
  }
}

// ------------------------------------------------------------ Y-normal form

class YNormalizer {
 public:
  explicit YNormalizer(const Alphabet& alphabet) : alphabet_(alphabet) {}

  Formula formula(const Formula& f, int c) {
    auto key = std::make_pair(static_cast<const void*>(f.get()), c);
    auto it = fmemo_.find(key);
    if (it != fmemo_.end()) return it->second.second;
    Formula r = build(f, c);
    fmemo_.emplace(key, std::make_pair(f, r));
    return r;
  }

 private:
  const Alphabet& alphabet_;
  std::map<std::pair<const void*, int>, std::pair<Formula, Formula>> fmemo_;
  std::map<std::pair<const void*, int>, std::pair<Term, Term>> tmemo_;
  std::map<int, Formula> guards_;

  static Formula shifted(Formula f, int c) {
    for (int k = 0; k < c; ++k) f = prev(f);
    return f;
  }

  // True exactly at positions i > c.
  Formula guard(int c) {
    auto it = guards_.find(c);
    if (it != guards_.end()) return it->second;
    std::vector<Formula> parts;
    for (char s : alphabet_.symbols()) parts.push_back(shifted(sym(s), c));
    Formula g = lor_all(parts);
    guards_.emplace(c, g);
    return g;
  }

  Formula build(const Formula& f, int c) {
    switch (f->kind) {
      case FormulaKind::Sym:
        if (!alphabet_.contains(f->symbol)) throw DomainError(std::string("symbol '") + f->symbol + "' not in alphabet");
        return shifted(f, c);
      case FormulaKind::Mod: return shifted(f, c);
      case FormulaKind::Const:
        if (c == 0 || !f->value) return f;
        return guard(c);
      case FormulaKind::Prev: return formula(f->a, c + 1);
      case FormulaKind::Not: {
        Formula a = formula(f->a, c);
        if (c == 0) return a == f->a ? f : lnot(a);
        return land(guard(c), lnot(a));
      }
      case FormulaKind::And:
      case FormulaKind::Or: {
        Formula a = formula(f->a, c), b = formula(f->b, c);
        if (c == 0 && a == f->a && b == f->b) return f;
        return f->kind == FormulaKind::And ? land(a, b) : lor(a, b);
      }
      case FormulaKind::Compare: {
        Term l = term(f->lhs, c), r = term(f->rhs, c);
        Formula core = (c == 0 && l == f->lhs && r == f->rhs) ? f : cmp(l, f->op, r);
        return c == 0 ? core : land(guard(c), core);
      }
    }
    return f;
  }

  Term term(const Term& t, int c) {
    auto key = std::make_pair(static_cast<const void*>(t.get()), c);
    auto it = tmemo_.find(key);
    if (it != tmemo_.end()) return it->second.second;
    Term r = build_term(t, c);
    tmemo_.emplace(key, std::make_pair(t, r));
    return r;
  }

  Term build_term(const Term& t, int c) {
    switch (t->kind) {
      case TermKind::IntConst: return t;
      case TermKind::CountLeft: {
        Formula b = formula(t->body, c);
        return b == t->body ? t : count_left(b);
      }
      case TermKind::CountLeftStrict: {
        Formula b = formula(t->body, c);
        return b == t->body ? t : count_left_strict(b);
      }
      case TermKind::CountRight:
      case TermKind::CountAll:
      case TermKind::CountRightStrict: {
        if (c > 0) throw DomainError("Y-normal form does not support future counts under Y");
        Formula b = formula(t->body, 0);
        if (b == t->body) return t;
        if (t->kind == TermKind::CountRight) return count_right(b);
        if (t->kind == TermKind::CountAll) return count_all(b);
        return count_right_strict(b);
      }
      case TermKind::Sum: {
        Term a = term(t->a, c), b = term(t->b, c);
        return (a == t->a && b == t->b) ? t : sum(a, b);
      }
      case TermKind::Neg: {
        Term a = term(t->a, c);
        return a == t->a ? t : neg(a);
      }
      case TermKind::Scale: {
        Term a = term(t->a, c);
        return a == t->a ? t : scale(t->constant, a);
      }
      case TermKind::Ite: {
        Formula k = formula(t->body, c);
        Term a = term(t->a, c), b = term(t->b, c);
        return (k == t->body && a == t->a && b == t->b) ? t : ite(k, a, b);
      }
    }
    return t;
  }
};

bool ynf_chain(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Sym:
    case FormulaKind::Mod: return true;
    case FormulaKind::Prev: return ynf_chain(f->a);
    default: return false;
  }
}

// ------------------------------------------------------- neutral reduction

class NeutralReducer {
 public:
  NeutralReducer(char e, const Alphabet& sigma, std::int64_t x) : e_(e), sigma_(sigma), x_(x) {}

  // Formula over sigma true at i iff the original holds at f(w)-position i*x + y.
  Formula t(const Formula& f, std::int64_t y) {
    auto key = std::make_pair(static_cast<const void*>(f.get()), y);
    auto it = fmemo_.find(key);
    if (it != fmemo_.end()) return it->second.second;
    Formula r = build(f, y);
    fmemo_.emplace(key, std::make_pair(f, r));
    return r;
  }

 private:
  char e_;
  const Alphabet& sigma_;
  std::int64_t x_;
  std::map<std::pair<const void*, std::int64_t>, std::pair<Formula, Formula>> fmemo_;
  std::map<std::pair<const void*, std::int64_t>, std::pair<Term, Term>> tmemo_;
  std::unordered_map<const void*, std::pair<Formula, std::vector<std::int64_t>>> prefix_counts_;

  // Number of positions y' <= upto of e^x satisfying f.
  std::int64_t padding_count(const Formula& f, std::int64_t upto) {
    auto it = prefix_counts_.find(f.get());
    if (it == prefix_counts_.end()) {
      auto vals = Program(f).run(std::string(static_cast<std::size_t>(x_), e_));
      std::vector<std::int64_t> pref(vals.size() + 1, 0);
      for (std::size_t i = 0; i < vals.size(); ++i) pref[i + 1] = pref[i] + (vals[i] != 0);
      it = prefix_counts_.emplace(f.get(), std::make_pair(f, std::move(pref))).first;
    }
    return it->second.second[static_cast<std::size_t>(upto)];
  }

  Formula build(const Formula& f, std::int64_t y) {
    switch (f->kind) {
      case FormulaKind::Const: return f;
      case FormulaKind::Sym:
      case FormulaKind::Mod:
      case FormulaKind::Prev: {
        // Y-normal form guarantees a chain Y^c atom.
        std::int64_t c = 0;
        Formula a = f;
        while (a->kind == FormulaKind::Prev) {
          ++c;
          a = a->a;
        }
        const std::int64_t offset = y - c;  // offset within the block, <= 0 means the block before
        if (a->kind == FormulaKind::Mod) {
          std::int64_t res = ((offset % a->modulus) + a->modulus) % a->modulus;
          return truth(res == a->residue);
        }
        if (a->kind != FormulaKind::Sym) throw DomainError("neutral reduction expects Y-normal form");
        if (a->symbol == e_) return truth(offset != 1);
        if (!sigma_.contains(a->symbol)) throw DomainError(std::string("symbol '") + a->symbol + "' not in alphabet");
        return offset == 1 ? sym(a->symbol) : truth(false);
      }
      case FormulaKind::Not: return lnot(t(f->a, y));
      case FormulaKind::And: return land(t(f->a, y), t(f->b, y));
      case FormulaKind::Or: return lor(t(f->a, y), t(f->b, y));
      case FormulaKind::Compare: return cmp(term(f->lhs, y), f->op, term(f->rhs, y));
    }
    return f;
  }

  Term term(const Term& tm, std::int64_t y) {
    auto key = std::make_pair(static_cast<const void*>(tm.get()), y);
    auto it = tmemo_.find(key);
    if (it != tmemo_.end()) return it->second.second;
    Term r = build_term(tm, y);
    tmemo_.emplace(key, std::make_pair(tm, r));
    return r;
  }

  Term count_split(const Formula& body, std::int64_t y, bool strict) {
    std::vector<Term> parts;
    parts.push_back(constant(padding_count(body, x_)));
    for (std::int64_t yy = 1; yy <= x_; ++yy) parts.push_back(count_left_strict(t(body, yy)));
    const std::int64_t last = strict ? y - 1 : y;
    for (std::int64_t yy = 1; yy <= last; ++yy) parts.push_back(indicator(t(body, yy)));
    return sum_all(parts);
  }

  Term build_term(const Term& tm, std::int64_t y) {
    switch (tm->kind) {
      case TermKind::IntConst: return tm;
      case TermKind::CountLeft: return count_split(tm->body, y, false);
      case TermKind::CountLeftStrict: return count_split(tm->body, y, true);
      case TermKind::Sum: return sum(term(tm->a, y), term(tm->b, y));
      case TermKind::Neg: return neg(term(tm->a, y));
      case TermKind::Scale: return scale(tm->constant, term(tm->a, y));
      case TermKind::Ite: return ite(t(tm->body, y), term(tm->a, y), term(tm->b, y));
      default: throw DomainError("neutral reduction supports past counts only");
    }
  }
};

class Simplifier : public detail::Rebuilder {
 protected:
  Formula on_formula(const Formula& f) override {
    Formula g = rebuild(f);
    auto is = [](const Formula& h, bool v) { return h->kind == FormulaKind::Const && h->value == v; };
    switch (g->kind) {
      case FormulaKind::Not:
        if (g->a->kind == FormulaKind::Const) return truth(!g->a->value);
        if (g->a->kind == FormulaKind::Not) return g->a->a;
        return g;
      case FormulaKind::And:
        if (is(g->a, false) || is(g->b, false)) return truth(false);
        if (is(g->a, true)) return g->b;
        if (is(g->b, true)) return g->a;
        if (structurally_equal(g->a, g->b)) return g->a;
        return g;
      case FormulaKind::Or:
        if (is(g->a, true) || is(g->b, true)) return truth(true);
        if (is(g->a, false)) return g->b;
        if (is(g->b, false)) return g->a;
        if (structurally_equal(g->a, g->b)) return g->a;
        return g;
      case FormulaKind::Prev:
        if (is(g->a, false)) return g->a;
        return g;
      case FormulaKind::Compare:
        if (g->lhs->kind == TermKind::IntConst && g->rhs->kind == TermKind::IntConst)
          return truth(compare(g->lhs->constant, g->op, g->rhs->constant));
        return g;
      default: return g;
    }
  }

  Term on_term(const Term& t) override {
    Term u = rebuild(t);
    switch (u->kind) {
      case TermKind::Ite:
        if (u->body->kind == FormulaKind::Const) return u->body->value ? u->a : u->b;
        return u;
      case TermKind::Sum:
        if (u->a->kind == TermKind::IntConst && u->b->kind == TermKind::IntConst)
          return constant(u->a->constant + u->b->constant);
        if (u->b->kind == TermKind::IntConst && u->b->constant == 0) return u->a;
        if (u->a->kind == TermKind::IntConst && u->a->constant == 0) return u->b;
        return u;
      case TermKind::Neg:
        if (u->a->kind == TermKind::IntConst) return constant(-u->a->constant);
        return u;
      case TermKind::Scale:
        if (u->a->kind == TermKind::IntConst) return constant(u->constant * u->a->constant);
        return u;
      default: return u;
    }
  }
};

}  // namespace

Formula eliminate_count_sugar(const Formula& f) { return CountSugar().formula(f); }
Formula eliminate_ite(const Formula& f) { return IteElimination().formula(f); }
Formula normalize_to_minimal_basis(const Formula& f) { return MinimalBasis(false).formula(f); }

Formula desugar(const Formula& f) {
  Formula g = eliminate_count_sugar(f);
  g = eliminate_ite(g);
  return MinimalBasis(true).formula(g);
}

SignedAtoms signed_atoms(const Term& t) {
  SignedAtoms out;
  collect_signed(t, 1, out);
  return out;
}

LinearForm linear_form(const Term& t) {
  SignedAtoms s = signed_atoms(t);
  LinearForm out;
  out.constant = s.constant;
  std::unordered_map<Term, std::size_t, TermHash, TermEq> index;
  for (const auto& [atom, c] : s.atoms) {
    auto [it, fresh] = index.emplace(atom, out.coeffs.size());
    if (fresh) out.coeffs.emplace_back(atom, c);
    else out.coeffs[it->second].second += c;
  }
  return out;
}

Term sum_all(const std::vector<Term>& ts) {
  if (ts.empty()) return constant(0);
  Term acc = ts[0];
  for (std::size_t i = 1; i < ts.size(); ++i) acc = sum(acc, ts[i]);
  return acc;
}

Formula y_normal_form(const Formula& f, const Alphabet& alphabet) { return YNormalizer(alphabet).formula(f, 0); }

bool is_y_normal_form(const Formula& f) {
  bool ok = true;
  std::unordered_map<const void*, bool> seen;
  std::function<void(const Formula&)> visit_f;
  std::function<void(const Term&)> visit_t;
  visit_f = [&](const Formula& g) {
    if (!ok || !seen.emplace(g.get(), true).second) return;
    if (g->kind == FormulaKind::Prev) {
      if (!ynf_chain(g->a)) ok = false;
      return;
    }
    if (g->a) visit_f(g->a);
    if (g->b) visit_f(g->b);
    if (g->lhs) visit_t(g->lhs);
    if (g->rhs) visit_t(g->rhs);
  };
  visit_t = [&](const Term& t) {
    if (!ok || !seen.emplace(t.get(), true).second) return;
    if (t->body) visit_f(t->body);
    if (t->a) visit_t(t->a);
    if (t->b) visit_t(t->b);
  };
  visit_f(f);
  return ok;
}

std::string neutral_pad(std::string_view w, char e, std::int64_t x) {
  std::string out(static_cast<std::size_t>(x), e);
  for (char c : w) {
    out += c;
    out.append(static_cast<std::size_t>(x - 1), e);
  }
  return out;
}

NeutralReduction neutral_letter_reduce(const Formula& f, char e, const Alphabet& alphabet) {
  if (!alphabet.contains(e)) throw DomainError(std::string("neutral letter '") + e + "' not in alphabet");
  std::string rest;
  for (char c : alphabet.symbols())
    if (c != e) rest += c;
  if (rest.empty()) throw DomainError("neutral reduction needs at least one non-neutral symbol");
  if (!is_past_only(f)) throw DomainError("neutral reduction supports past counts only");
  Alphabet sigma(rest);
  std::int64_t m = 1;
  for (std::int64_t k : moduli(f)) m = std::lcm(m, k);
  const std::int64_t x = m * (prev_depth(f) + 1);
  Formula ynf = y_normal_form(f, alphabet);
  NeutralReducer reducer(e, sigma, x);
  return {x, reducer.t(ynf, x)};
}

Formula simplify(const Formula& f) { return Simplifier().formula(f); }

}  // namespace craspkit
