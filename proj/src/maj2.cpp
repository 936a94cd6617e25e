#include "craspkit/maj2.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "craspkit/error.hpp"

namespace craspkit {

namespace {

Maj2 make(Maj2Node n) {
  switch (n.kind) {
    case Maj2Kind::Sym: n.free = var_bit(n.var); break;
    case Maj2Kind::Less: n.free = var_bit(n.var) | var_bit(n.var2); break;
    case Maj2Kind::Const: break;
    case Maj2Kind::Not: n.depth = n.a->depth; n.free = n.a->free; break;
    case Maj2Kind::And:
    case Maj2Kind::Or:
      n.depth = std::max(n.a->depth, n.b->depth);
      n.free = n.a->free | n.b->free;
      break;
    case Maj2Kind::Maj: {
      if (n.items.empty()) throw DomainError("MAJ needs at least one formula");
      int d = 0;
      unsigned fr = 0;
      for (const auto& it : n.items) {
        d = std::max(d, it->depth);
        fr |= it->free;
      }
      n.depth = d + 1;
      n.free = fr & ~var_bit(n.var);
      break;
    }
    case Maj2Kind::Exists:
    case Maj2Kind::Forall:
      n.depth = n.a->depth + 1;
      n.free = n.a->free & ~var_bit(n.var);
      break;
  }
  return std::make_shared<const Maj2Node>(std::move(n));
}

}  // namespace

Maj2 m_sym(char c, Var v) {
  Maj2Node n{};
  n.kind = Maj2Kind::Sym;
  n.symbol = c;
  n.var = v;
  return make(std::move(n));
}

Maj2 m_less(Var l, Var r) {
  Maj2Node n{};
  n.kind = Maj2Kind::Less;
  n.var = l;
  n.var2 = r;
  return make(std::move(n));
}

Maj2 m_const(bool v) {
  Maj2Node n{};
  n.kind = Maj2Kind::Const;
  n.value = v;
  return make(std::move(n));
}

Maj2 m_not(Maj2 f) {
  Maj2Node n{};
  n.kind = Maj2Kind::Not;
  n.a = std::move(f);
  return make(std::move(n));
}

Maj2 m_and(Maj2 f, Maj2 g) {
  Maj2Node n{};
  n.kind = Maj2Kind::And;
  n.a = std::move(f);
  n.b = std::move(g);
  return make(std::move(n));
}

Maj2 m_or(Maj2 f, Maj2 g) {
  Maj2Node n{};
  n.kind = Maj2Kind::Or;
  n.a = std::move(f);
  n.b = std::move(g);
  return make(std::move(n));
}

Maj2 m_maj(Var v, std::vector<Maj2> items) {
  Maj2Node n{};
  n.kind = Maj2Kind::Maj;
  n.var = v;
  n.items = std::move(items);
  return make(std::move(n));
}

Maj2 m_exists(Var v, Maj2 f) {
  Maj2Node n{};
  n.kind = Maj2Kind::Exists;
  n.var = v;
  n.a = std::move(f);
  return make(std::move(n));
}

Maj2 m_forall(Var v, Maj2 f) {
  Maj2Node n{};
  n.kind = Maj2Kind::Forall;
  n.var = v;
  n.a = std::move(f);
  return make(std::move(n));
}

Maj2 m_le(Var l, Var r) { return m_not(m_less(r, l)); }
Maj2 m_eq(Var l, Var r) { return m_and(m_not(m_less(l, r)), m_not(m_less(r, l))); }

bool structurally_equal(const Maj2& f, const Maj2& g) {
  if (f == g) return true;
  if (f->kind != g->kind || f->depth != g->depth || f->free != g->free) return false;
  switch (f->kind) {
    case Maj2Kind::Sym: return f->symbol == g->symbol && f->var == g->var;
    case Maj2Kind::Less: return f->var == g->var && f->var2 == g->var2;
    case Maj2Kind::Const: return f->value == g->value;
    case Maj2Kind::Not: return structurally_equal(f->a, g->a);
    case Maj2Kind::And:
    case Maj2Kind::Or: return structurally_equal(f->a, g->a) && structurally_equal(f->b, g->b);
    case Maj2Kind::Exists:
    case Maj2Kind::Forall: return f->var == g->var && structurally_equal(f->a, g->a);
    case Maj2Kind::Maj:
      if (f->var != g->var || f->items.size() != g->items.size()) return false;
      for (std::size_t i = 0; i < f->items.size(); ++i)
        if (!structurally_equal(f->items[i], g->items[i])) return false;
      return true;
  }
  return false;
}

Maj2 desugar_quantifiers(const Maj2& f) {
  switch (f->kind) {
    case Maj2Kind::Sym:
    case Maj2Kind::Less:
    case Maj2Kind::Const: return f;
    case Maj2Kind::Not: {
      Maj2 a = desugar_quantifiers(f->a);
      return a == f->a ? f : m_not(a);
    }
    case Maj2Kind::And:
    case Maj2Kind::Or: {
      Maj2 a = desugar_quantifiers(f->a), b = desugar_quantifiers(f->b);
      if (a == f->a && b == f->b) return f;
      return f->kind == Maj2Kind::And ? m_and(a, b) : m_or(a, b);
    }
    case Maj2Kind::Maj: {
      std::vector<Maj2> items;
      bool same = true;
      for (const auto& it : f->items) {
        items.push_back(desugar_quantifiers(it));
        same = same && items.back() == it;
      }
      return same ? f : m_maj(f->var, std::move(items));
    }
    case Maj2Kind::Exists: return m_maj(f->var, {desugar_quantifiers(f->a), m_const(true)});
    case Maj2Kind::Forall: return m_not(m_maj(f->var, {m_not(desugar_quantifiers(f->a)), m_const(true)}));
  }
  return f;
}

namespace {

// Truth tables over (x, y) in [1, n]^2, stored row-major by x.
class TableEval {
 public:
  TableEval(std::string_view w) : w_(w), n_(static_cast<std::int64_t>(w.size())) {}

  const std::vector<char>& table(const Maj2& f) {
    auto it = memo_.find(f.get());
    if (it != memo_.end()) return it->second.second;
    std::vector<char> t(static_cast<std::size_t>(n_ * n_), 0);
    auto at = [&](std::int64_t x, std::int64_t y) -> char& { return t[static_cast<std::size_t>(x * n_ + y)]; };
    switch (f->kind) {
      case Maj2Kind::Sym:
        for (std::int64_t x = 0; x < n_; ++x)
          for (std::int64_t y = 0; y < n_; ++y) at(x, y) = w_[f->var == Var::X ? x : y] == f->symbol;
        break;
      case Maj2Kind::Less:
        for (std::int64_t x = 0; x < n_; ++x)
          for (std::int64_t y = 0; y < n_; ++y) {
            std::int64_t l = f->var == Var::X ? x : y, r = f->var2 == Var::X ? x : y;
            at(x, y) = l < r;
          }
        break;
      case Maj2Kind::Const: std::fill(t.begin(), t.end(), f->value); break;
      case Maj2Kind::Not: {
        const auto& a = table(f->a);
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = !a[k];
        break;
      }
      case Maj2Kind::And:
      case Maj2Kind::Or: {
        const auto& a = table(f->a);
        const auto& b = table(f->b);
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = f->kind == Maj2Kind::And ? (a[k] && b[k]) : (a[k] || b[k]);
        break;
      }
      case Maj2Kind::Maj:
      case Maj2Kind::Exists:
      case Maj2Kind::Forall: {
        std::vector<const std::vector<char>*> parts;
        if (f->kind == Maj2Kind::Maj)
          for (const auto& i : f->items) parts.push_back(&table(i));
        else
          parts.push_back(&table(f->a));
        const std::int64_t m = static_cast<std::int64_t>(parts.size());
        const bool over_x = f->var == Var::X;
        // The result depends only on the other variable.
        for (std::int64_t o = 0; o < n_; ++o) {
          std::int64_t count = 0;
          for (const auto* p : parts)
            for (std::int64_t b = 0; b < n_; ++b) count += (*p)[static_cast<std::size_t>(over_x ? b * n_ + o : o * n_ + b)];
          bool r;
          if (f->kind == Maj2Kind::Maj) r = 2 * count > n_ * m;
          else if (f->kind == Maj2Kind::Exists) r = count > 0;
          else r = count == n_;
          for (std::int64_t b = 0; b < n_; ++b) at(over_x ? b : o, over_x ? o : b) = r;
        }
        break;
      }
    }
    auto& slot = memo_[f.get()];
    slot = {f, std::move(t)};
    return slot.second;
  }

 private:
  std::string_view w_;
  std::int64_t n_;
  std::unordered_map<const Maj2Node*, std::pair<Maj2, std::vector<char>>> memo_;
};

void check_word_nonempty(std::string_view w) {
  if (w.empty()) throw DomainError("MAJ2 semantics are undefined on the empty word");
}

}  // namespace

bool eval_maj2(const Maj2& f, std::string_view w, const Assignment& xi) {
  check_word_nonempty(w);
  const auto n = static_cast<std::int64_t>(w.size());
  auto pick = [&](Var v, const std::optional<std::int64_t>& p) -> std::int64_t {
    if (!(f->free & var_bit(v))) return 0;
    if (!p) throw DomainError(std::string("free variable ") + var_name(v) + " is unassigned");
    if (*p < 1 || *p > n) throw DomainError(std::string("position for ") + var_name(v) + " out of range");
    return *p - 1;
  };
  std::int64_t x = pick(Var::X, xi.x), y = pick(Var::Y, xi.y);
  TableEval ev(w);
  return ev.table(f)[static_cast<std::size_t>(x * n + y)];
}

std::vector<bool> eval_maj2_positions(const Maj2& f, std::string_view w) {
  check_word_nonempty(w);
  if (f->free & var_bit(Var::Y)) throw DomainError("free variable y is unassigned");
  const auto n = static_cast<std::int64_t>(w.size());
  TableEval ev(w);
  const auto& t = ev.table(f);
  std::vector<bool> out(n);
  for (std::int64_t x = 0; x < n; ++x) out[x] = t[static_cast<std::size_t>(x * n)];
  return out;
}

bool Maj2Acceptor::accepts(std::string_view w) const {
  Assignment xi;
  xi.x = static_cast<std::int64_t>(w.size());
  return eval_maj2(f_, w, xi);
}

namespace {

class Maj2Parser {
 public:
  Maj2Parser(std::string_view src, const std::optional<Alphabet>& alphabet) : src_(src), alphabet_(alphabet) {}

  Maj2 whole() {
    Maj2 f = disj();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  const std::optional<Alphabet>& alphabet_;

  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool peek(std::string_view tok) {
    skip_ws();
    return src_.substr(pos_, tok.size()) == tok;
  }
  bool accept(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  Var var() {
    skip_ws();
    if (pos_ < src_.size() && (src_[pos_] == 'x' || src_[pos_] == 'y')) return src_[pos_++] == 'x' ? Var::X : Var::Y;
    fail("expected variable x or y");
  }

  Maj2 disj() {
    Maj2 f = conj();
    while (accept("||")) f = m_or(f, conj());
    return f;
  }
  Maj2 conj() {
    Maj2 f = unary();
    while (accept("&&")) f = m_and(f, unary());
    return f;
  }
  Maj2 unary() {
    if (accept("!")) return m_not(unary());
    return atom();
  }

  Maj2 atom() {
    skip_ws();
    if (accept("(")) {
      Maj2 f = disj();
      expect(")");
      return f;
    }
    if (accept("TRUE")) return m_const(true);
    if (accept("FALSE")) return m_const(false);
    if (accept("MAJ")) {
      Var v = var();
      expect("<");
      std::vector<Maj2> items{disj()};
      while (accept(";")) items.push_back(disj());
      expect(">");
      return m_maj(v, std::move(items));
    }
    if (peek("E") || peek("A")) {
      bool ex = src_[pos_] == 'E';
      ++pos_;
      Var v = var();
      expect("[");
      Maj2 f = disj();
      expect("]");
      return ex ? m_exists(v, f) : m_forall(v, f);
    }
    if (accept("Q")) {
      expect("(");
      skip_ws();
      if (pos_ >= src_.size()) fail("expected a symbol");
      char c = src_[pos_];
      if (c == kBos) fail("BOS is not a formula symbol");
      if (std::isspace(static_cast<unsigned char>(c))) fail("expected a symbol");
      if (alphabet_ && !alphabet_->contains(c)) fail(std::string("symbol '") + c + "' not in alphabet");
      ++pos_;
      expect(";");
      Var v = var();
      expect(")");
      return m_sym(c, v);
    }
    if (peek("x") || peek("y")) {
      Var l = var();
      if (accept("<=")) return m_le(l, var());
      if (accept("<")) return m_less(l, var());
      if (accept("=")) return m_eq(l, var());
      fail("expected '<', '<=' or '='");
    }
    fail("expected a MAJ2 formula");
  }
};

std::string wrap_binary(const Maj2& f) {
  std::string s = print(f);
  return f->kind == Maj2Kind::And || f->kind == Maj2Kind::Or ? "(" + s + ")" : s;
}

}  // namespace

Maj2 parse_maj2(std::string_view text, const std::optional<Alphabet>& alphabet) {
  return Maj2Parser(text, alphabet).whole();
}

std::string print(const Maj2& f) {
  switch (f->kind) {
    case Maj2Kind::Sym: return std::string("Q(") + f->symbol + "; " + var_name(f->var) + ")";
    case Maj2Kind::Less: return std::string(1, var_name(f->var)) + " < " + var_name(f->var2);
    case Maj2Kind::Const: return f->value ? "TRUE" : "FALSE";
    case Maj2Kind::Not: {
      const auto k = f->a->kind;
      bool bare = k == Maj2Kind::Sym || k == Maj2Kind::Const || k == Maj2Kind::Not || k == Maj2Kind::Maj ||
                  k == Maj2Kind::Exists || k == Maj2Kind::Forall;
      return bare ? "!" + print(f->a) : "!(" + print(f->a) + ")";
    }
    case Maj2Kind::And: {
      std::string l = f->a->kind == Maj2Kind::And ? print(f->a) : wrap_binary(f->a);
      return l + " && " + wrap_binary(f->b);
    }
    case Maj2Kind::Or: {
      std::string l = f->a->kind == Maj2Kind::Or ? print(f->a) : wrap_binary(f->a);
      return l + " || " + wrap_binary(f->b);
    }
    case Maj2Kind::Maj: {
      std::string s = std::string("MAJ") + var_name(f->var) + "<";
      for (std::size_t i = 0; i < f->items.size(); ++i) s += (i ? "; " : "") + print(f->items[i]);
      return s + ">";
    }
    case Maj2Kind::Exists:
    case Maj2Kind::Forall:
      return std::string(f->kind == Maj2Kind::Exists ? "E" : "A") + var_name(f->var) + "[" + print(f->a) + "]";
  }
  return "?";
}

std::string mentioned_symbols(const Maj2& f) {
  std::string out;
  std::vector<const Maj2Node*> stack{f.get()};
  std::unordered_map<const Maj2Node*, bool> seen;
  while (!stack.empty()) {
    const Maj2Node* n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = true;
    if (n->kind == Maj2Kind::Sym && out.find(n->symbol) == std::string::npos) out.push_back(n->symbol);
    if (n->a) stack.push_back(n->a.get());
    if (n->b) stack.push_back(n->b.get());
    for (auto it = n->items.rbegin(); it != n->items.rend(); ++it) stack.push_back(it->get());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace craspkit
