#include "craspkit/formula.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_set>

#include "craspkit/error.hpp"

namespace craspkit {
namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::shared_ptr<FormulaNode> fnode(FormulaKind k) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  return n;
}

std::shared_ptr<TermNode> tnode(TermKind k) {
  auto n = std::make_shared<TermNode>();
  n->kind = k;
  return n;
}

Formula seal(std::shared_ptr<FormulaNode> n) {
  std::size_t h = mix(0x51ed27, static_cast<std::size_t>(n->kind));
  h = mix(h, static_cast<unsigned char>(n->symbol));
  h = mix(h, n->value);
  h = mix(h, static_cast<std::size_t>(n->modulus));
  h = mix(h, static_cast<std::size_t>(n->residue));
  h = mix(h, static_cast<std::size_t>(n->op));
  int d = 0;
  Features f = 0;
  for (const Formula* c : {&n->a, &n->b})
    if (*c) {
      h = mix(h, (*c)->hash);
      d = std::max(d, (*c)->depth);
      f |= (*c)->features;
    } else {
      h = mix(h, 1);
    }
  for (const Term* c : {&n->lhs, &n->rhs})
    if (*c) {
      h = mix(h, (*c)->hash);
      d = std::max(d, (*c)->depth);
      f |= (*c)->features;
    } else {
      h = mix(h, 2);
    }
  switch (n->kind) {
    case FormulaKind::Or:
    case FormulaKind::Const: f |= kLogicSugar; break;
    case FormulaKind::Compare:
      if (n->op != CmpOp::Lt) f |= kLogicSugar;
      break;
    case FormulaKind::Prev: f |= kPrev; break;
    case FormulaKind::Mod: f |= kMod; break;
    default: break;
  }
  n->depth = d;
  n->features = f;
  n->hash = h;
  return n;
}

Term seal(std::shared_ptr<TermNode> n) {
  std::size_t h = mix(0x7e3a11, static_cast<std::size_t>(n->kind));
  h = mix(h, static_cast<std::size_t>(n->constant));
  int d = 0;
  Features f = 0;
  if (n->body) {
    h = mix(h, n->body->hash);
    d = n->body->depth;
    f = n->body->features;
  } else {
    h = mix(h, 3);
  }
  for (const Term* c : {&n->a, &n->b})
    if (*c) {
      h = mix(h, (*c)->hash);
      d = std::max(d, (*c)->depth);
      f |= (*c)->features;
    } else {
      h = mix(h, 4);
    }
  switch (n->kind) {
    case TermKind::CountLeft: d = n->body->depth + 1; break;
    case TermKind::CountRight: d = n->body->depth + 1; f |= kRightCount; break;
    case TermKind::CountAll: d = n->body->depth + 1; f |= kRightCount | kCountSugar; break;
    case TermKind::CountLeftStrict: d = n->body->depth + 1; f |= kCountSugar; break;
    case TermKind::CountRightStrict: d = n->body->depth + 1; f |= kRightCount | kCountSugar; break;
    case TermKind::Neg:
    case TermKind::Scale: f |= kArithSugar; break;
    case TermKind::Ite: f |= kIte; break;
    default: break;
  }
  n->depth = d;
  n->features = f;
  n->hash = h;
  return n;
}

Term make_count(TermKind k, Formula f) {
  if (!f) throw DomainError("null formula");
  auto n = tnode(k);
  n->body = std::move(f);
  return seal(std::move(n));
}

// Visits every node of the DAG once.
void walk(const Formula& root, const std::function<void(const FormulaNode&)>& on_formula,
          const std::function<void(const TermNode&)>& on_term) {
  std::unordered_set<const void*> seen;
  std::vector<const FormulaNode*> fstack{root.get()};
  std::vector<const TermNode*> tstack;
  while (!fstack.empty() || !tstack.empty()) {
    if (!fstack.empty()) {
      const FormulaNode* n = fstack.back();
      fstack.pop_back();
      if (!seen.insert(n).second) continue;
      if (on_formula) on_formula(*n);
      if (n->a) fstack.push_back(n->a.get());
      if (n->b) fstack.push_back(n->b.get());
      if (n->lhs) tstack.push_back(n->lhs.get());
      if (n->rhs) tstack.push_back(n->rhs.get());
    } else {
      const TermNode* n = tstack.back();
      tstack.pop_back();
      if (!seen.insert(n).second) continue;
      if (on_term) on_term(*n);
      if (n->body) fstack.push_back(n->body.get());
      if (n->a) tstack.push_back(n->a.get());
      if (n->b) tstack.push_back(n->b.get());
    }
  }
}

}  // namespace

Alphabet::Alphabet(std::string_view symbols) : symbols_(symbols) {
  if (symbols_.empty()) throw DomainError("alphabet must be non-empty");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    char c = symbols_[i];
    if (c == kBos) throw DomainError("BOS '^' cannot be an alphabet symbol");
    if (std::isspace(static_cast<unsigned char>(c))) throw DomainError("whitespace cannot be an alphabet symbol");
    if (symbols_.find(c) != i) throw DomainError(std::string("duplicate alphabet symbol '") + c + "'");
  }
}

void Alphabet::check_word(std::string_view w) const {
  for (char c : w)
    if (!contains(c)) throw DomainError(std::string("symbol '") + c + "' is not in the alphabet {" + symbols_ + "}");
}

Alphabet Alphabet::merged(const Alphabet& other) const {
  std::string s = symbols_;
  for (char c : other.symbols_)
    if (s.find(c) == std::string::npos) s += c;
  return Alphabet(s);
}

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

bool compare(std::int64_t a, CmpOp op, std::int64_t b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
  }
  return false;
}

std::string describe_features(Features f) {
  std::vector<std::string> names;
  if (f & kRightCount) names.push_back("future-count");
  if (f & kPrev) names.push_back("Y");
  if (f & kMod) names.push_back("MOD");
  if (f & kIte) names.push_back("?:");
  if (f & kCountSugar) names.push_back("count-sugar");
  if (f & kArithSugar) names.push_back("arith-sugar");
  if (f & kLogicSugar) names.push_back("logic-sugar");
  std::string out;
  for (auto& n : names) out += (out.empty() ? "" : ",") + n;
  return out;
}

Formula sym(char c) {
  if (std::isspace(static_cast<unsigned char>(c)) || c == 0) throw DomainError("invalid symbol");
  auto n = fnode(FormulaKind::Sym);
  n->symbol = c;
  return seal(std::move(n));
}

Formula truth(bool v) {
  auto n = fnode(FormulaKind::Const);
  n->value = v;
  return seal(std::move(n));
}

Formula lnot(Formula f) {
  auto n = fnode(FormulaKind::Not);
  n->a = std::move(f);
  return seal(std::move(n));
}

Formula land(Formula f, Formula g) {
  auto n = fnode(FormulaKind::And);
  n->a = std::move(f);
  n->b = std::move(g);
  return seal(std::move(n));
}

Formula lor(Formula f, Formula g) {
  auto n = fnode(FormulaKind::Or);
  n->a = std::move(f);
  n->b = std::move(g);
  return seal(std::move(n));
}

Formula cmp(Term l, CmpOp op, Term r) {
  auto n = fnode(FormulaKind::Compare);
  n->lhs = std::move(l);
  n->op = op;
  n->rhs = std::move(r);
  return seal(std::move(n));
}

Formula prev(Formula f) {
  auto n = fnode(FormulaKind::Prev);
  n->a = std::move(f);
  return seal(std::move(n));
}

Formula mod(std::int64_t m, std::int64_t r) {
  if (m < 1) throw DomainError("MOD modulus must be positive");
  if (r < 0 || r >= m) throw DomainError("MOD residue must lie in [0, m)");
  auto n = fnode(FormulaKind::Mod);
  n->modulus = m;
  n->residue = r;
  return seal(std::move(n));
}

Term count_left(Formula f) { return make_count(TermKind::CountLeft, std::move(f)); }
Term count_right(Formula f) { return make_count(TermKind::CountRight, std::move(f)); }
Term count_all(Formula f) { return make_count(TermKind::CountAll, std::move(f)); }
Term count_left_strict(Formula f) { return make_count(TermKind::CountLeftStrict, std::move(f)); }
Term count_right_strict(Formula f) { return make_count(TermKind::CountRightStrict, std::move(f)); }

Term sum(Term a, Term b) {
  auto n = tnode(TermKind::Sum);
  n->a = std::move(a);
  n->b = std::move(b);
  return seal(std::move(n));
}

Term neg(Term a) {
  auto n = tnode(TermKind::Neg);
  n->a = std::move(a);
  return seal(std::move(n));
}

Term scale(std::int64_t c, Term a) {
  auto n = tnode(TermKind::Scale);
  n->constant = c;
  n->a = std::move(a);
  return seal(std::move(n));
}

Term constant(std::int64_t c) {
  auto n = tnode(TermKind::IntConst);
  n->constant = c;
  return seal(std::move(n));
}

Term ite(Formula cond, Term then_t, Term else_t) {
  auto n = tnode(TermKind::Ite);
  n->body = std::move(cond);
  n->a = std::move(then_t);
  n->b = std::move(else_t);
  return seal(std::move(n));
}

Formula land_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return truth(true);
  Formula acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = land(acc, fs[i]);
  return acc;
}

Formula lor_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return truth(false);
  Formula acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = lor(acc, fs[i]);
  return acc;
}

bool structurally_equal(const Term& s, const Term& t);

bool structurally_equal(const Formula& f, const Formula& g) {
  if (f == g) return true;
  if (!f || !g) return false;
  if (f->hash != g->hash || f->kind != g->kind) return false;
  if (f->symbol != g->symbol || f->value != g->value || f->modulus != g->modulus || f->residue != g->residue ||
      f->op != g->op)
    return false;
  if (bool(f->a) != bool(g->a) || bool(f->b) != bool(g->b) || bool(f->lhs) != bool(g->lhs) ||
      bool(f->rhs) != bool(g->rhs))
    return false;
  if (f->a && !structurally_equal(f->a, g->a)) return false;
  if (f->b && !structurally_equal(f->b, g->b)) return false;
  if (f->lhs && !structurally_equal(f->lhs, g->lhs)) return false;
  if (f->rhs && !structurally_equal(f->rhs, g->rhs)) return false;
  return true;
}

bool structurally_equal(const Term& s, const Term& t) {
  if (s == t) return true;
  if (!s || !t) return false;
  if (s->hash != t->hash || s->kind != t->kind || s->constant != t->constant) return false;
  if (bool(s->body) != bool(t->body) || bool(s->a) != bool(t->a) || bool(s->b) != bool(t->b)) return false;
  if (s->body && !structurally_equal(s->body, t->body)) return false;
  if (s->a && !structurally_equal(s->a, t->a)) return false;
  if (s->b && !structurally_equal(s->b, t->b)) return false;
  return true;
}

std::string mentioned_symbols(const Formula& f) {
  std::string out;
  walk(
      f,
      [&](const FormulaNode& n) {
        if (n.kind == FormulaKind::Sym && out.find(n.symbol) == std::string::npos) out += n.symbol;
      },
      nullptr);
  std::sort(out.begin(), out.end());
  return out;
}

int prev_depth(const Formula& f) {
  // Longest chain of nested Y along any path; memoized on the DAG.
  std::unordered_map<const void*, int> memo;
  std::function<int(const Formula&)> pf;
  std::function<int(const Term&)> pt;
  pf = [&](const Formula& n) -> int {
    auto it = memo.find(n.get());
    if (it != memo.end()) return it->second;
    int r = 0;
    if (n->a) r = std::max(r, pf(n->a));
    if (n->b) r = std::max(r, pf(n->b));
    if (n->lhs) r = std::max(r, pt(n->lhs));
    if (n->rhs) r = std::max(r, pt(n->rhs));
    if (n->kind == FormulaKind::Prev) r += 1;
    memo[n.get()] = r;
    return r;
  };
  pt = [&](const Term& n) -> int {
    auto it = memo.find(n.get());
    if (it != memo.end()) return it->second;
    int r = 0;
    if (n->body) r = std::max(r, pf(n->body));
    if (n->a) r = std::max(r, pt(n->a));
    if (n->b) r = std::max(r, pt(n->b));
    memo[n.get()] = r;
    return r;
  };
  return pf(f);
}

std::vector<std::int64_t> moduli(const Formula& f) {
  std::vector<std::int64_t> out;
  walk(
      f,
      [&](const FormulaNode& n) {
        if (n.kind == FormulaKind::Mod) out.push_back(n.modulus);
      },
      nullptr);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t dag_size(const Formula& f) {
  std::size_t count = 0;
  walk(
      f, [&](const FormulaNode&) { ++count; }, [&](const TermNode&) { ++count; });
  return count;
}

}  // namespace craspkit
