#include "craspkit/syntax.hpp"

#include <cctype>
#include <limits>
#include <vector>

#include "craspkit/error.hpp"

namespace craspkit {
namespace {

class Parser {
 public:
  Parser(std::string_view src, const std::optional<Alphabet>& alphabet) : src_(src), alphabet_(alphabet) {}

  Formula whole_formula() {
    Formula f = formula();
    finish();
    return f;
  }

  Term whole_term() {
    Term t = term();
    finish();
    return t;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  const std::optional<Alphabet>& alphabet_;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= src_.size();
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
    if (!accept(tok)) {
      std::string found = pos_ < src_.size() ? std::string("'") + src_[pos_] + "'" : "end of input";
      fail("expected '" + std::string(tok) + "', found " + found);
    }
  }

  void finish() {
    if (!at_end()) fail(std::string("unexpected '") + src_[pos_] + "'");
  }

  // Keyword followed by an opening parenthesis, allowing blanks in between.
  bool accept_call(std::string_view kw) {
    skip_ws();
    std::size_t save = pos_;
    if (src_.substr(pos_, kw.size()) != kw) return false;
    pos_ += kw.size();
    if (accept("(")) return true;
    pos_ = save;
    return false;
  }

  bool accept_word(std::string_view kw) {
    skip_ws();
    if (src_.substr(pos_, kw.size()) != kw) return false;
    std::size_t end = pos_ + kw.size();
    if (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) return false;
    pos_ = end;
    return true;
  }

  bool peek_int() {
    skip_ws();
    std::size_t i = pos_;
    if (i < src_.size() && src_[i] == '-') ++i;
    return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
  }

  std::int64_t integer() {
    skip_ws();
    std::size_t start = pos_;
    bool negative = false;
    if (pos_ < src_.size() && src_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) fail("expected an integer");
    unsigned long long v = 0;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      unsigned d = static_cast<unsigned>(src_[pos_] - '0');
      if (v > (static_cast<unsigned long long>(std::numeric_limits<std::int64_t>::max()) - d) / 10)
        fail("integer literal out of range", start);
      v = v * 10 + d;
      ++pos_;
    }
    return negative ? -static_cast<std::int64_t>(v) : static_cast<std::int64_t>(v);
  }

  Formula formula() { return disjunction(); }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept("||")) f = lor(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept("&&")) f = land(f, unary());
    return f;
  }

  Formula unary() {
    skip_ws();
    if (peek("!=")) fail("unexpected '!='");
    if (accept("!")) return lnot(unary());
    if (accept_call("Y")) {
      Formula f = formula();
      expect(")");
      return prev(f);
    }
    if (accept_call("MOD")) {
      std::size_t at = pos_;
      std::int64_t m = integer();
      expect(",");
      std::int64_t r = integer();
      expect(")");
      if (m < 1) fail("MOD modulus must be positive", at);
      if (r < 0 || r >= m) fail("MOD residue must satisfy 0 <= r < m", at);
      return mod(m, r);
    }
    if (accept_call("Q")) {
      skip_ws();
      if (pos_ >= src_.size()) fail("expected a symbol");
      char c = src_[pos_];
      if (alphabet_ && !alphabet_->contains(c))
        fail(std::string("unknown symbol '") + c + "' (alphabet {" + alphabet_->symbols() + "})");
      if (c == kBos) fail("'^' is reserved for BOS");
      ++pos_;
      expect(")");
      return sym(c);
    }
    if (accept_word("TRUE")) return truth(true);
    if (accept_word("FALSE")) return truth(false);
    if (peek("(")) {
      std::size_t open = pos_;
      ++pos_;
      Formula inner = formula();
      if (accept(")")) return inner;
      if (!accept("?")) fail("expected ')' or '?' to close '(' opened", open);
      Term then_t = term();
      expect(":");
      Term else_t = term();
      expect(")");
      return comparison(term_tail(ite(inner, then_t, else_t)));
    }
    return comparison(term());
  }

  Formula comparison(Term lhs) {
    CmpOp op;
    if (accept("<=")) op = CmpOp::Le;
    else if (accept(">=")) op = CmpOp::Ge;
    else if (accept("!=")) op = CmpOp::Ne;
    else if (accept("<")) op = CmpOp::Lt;
    else if (accept(">")) op = CmpOp::Gt;
    else if (accept("=")) op = CmpOp::Eq;
    else fail("expected a comparison operator");
    return cmp(lhs, op, term());
  }

  Term term() { return term_tail(factor()); }

  Term term_tail(Term acc) {
    for (;;) {
      if (accept("+")) acc = sum(acc, factor());
      else if (accept("-")) acc = sum(acc, neg(factor()));
      else return acc;
    }
  }

  Term bracketed(Term (*make)(Formula)) {
    Formula f = formula();
    expect("]");
    return make(f);
  }

  Term factor() {
    skip_ws();
    if (peek_int()) {
      std::int64_t c = integer();
      if (accept("*")) return scale(c, factor());
      return constant(c);
    }
    if (accept("#<o[")) return bracketed(&count_left_strict);
    if (accept("#o>[")) return bracketed(&count_right_strict);
    if (accept("#<[")) return bracketed(&count_left);
    if (accept("#>[")) return bracketed(&count_right);
    if (accept("#[")) return bracketed(&count_all);
    if (peek("(")) {
      std::size_t open = pos_;
      ++pos_;
      Formula c = formula();
      if (!accept("?")) fail("expected '?' in conditional term opened", open);
      Term then_t = term();
      expect(":");
      Term else_t = term();
      expect(")");
      return ite(c, then_t, else_t);
    }
    if (pos_ >= src_.size()) fail("unexpected end of input");
    fail(std::string("unexpected '") + src_[pos_] + "'");
  }
};

// ---------------------------------------------------------------- printing

std::string formula_str(const Formula& f);
std::string term_str(const Term& t);

bool is_factor(const Term& t) {
  switch (t->kind) {
    case TermKind::IntConst:
    case TermKind::CountLeft:
    case TermKind::CountRight:
    case TermKind::CountAll:
    case TermKind::CountLeftStrict:
    case TermKind::CountRightStrict:
    case TermKind::Ite: return true;
    case TermKind::Scale: return is_factor(t->a);
    default: return false;
  }
}

std::string factor_str(const Term& t) {
  switch (t->kind) {
    case TermKind::IntConst: return std::to_string(t->constant);
    case TermKind::Scale: return std::to_string(t->constant) + " * " + factor_str(t->a);
    case TermKind::CountLeft: return "#<[" + formula_str(t->body) + "]";
    case TermKind::CountRight: return "#>[" + formula_str(t->body) + "]";
    case TermKind::CountAll: return "#[" + formula_str(t->body) + "]";
    case TermKind::CountLeftStrict: return "#<o[" + formula_str(t->body) + "]";
    case TermKind::CountRightStrict: return "#o>[" + formula_str(t->body) + "]";
    case TermKind::Ite: return "(" + formula_str(t->body) + " ? " + term_str(t->a) + " : " + term_str(t->b) + ")";
    default: return term_str(t);
  }
}

// Signed factor list of an arbitrary term, distributing Neg and Scale.
void flatten(const Term& t, std::int64_t coef, std::vector<std::pair<std::int64_t, Term>>& out) {
  switch (t->kind) {
    case TermKind::Sum:
      flatten(t->a, coef, out);
      flatten(t->b, coef, out);
      return;
    case TermKind::Neg: flatten(t->a, -coef, out); return;
    case TermKind::Scale:
      if (!is_factor(t->a)) {
        flatten(t->a, coef * t->constant, out);
        return;
      }
      break;
    default: break;
  }
  out.emplace_back(coef, t);
}

std::string flat_term_str(const Term& t) {
  std::vector<std::pair<std::int64_t, Term>> items;
  flatten(t, 1, items);
  std::string out;
  for (auto& [c, f] : items) {
    if (c == 0) continue;
    if (out.empty()) {
      out = c == 1 ? factor_str(f) : std::to_string(c) + " * " + factor_str(f);
      continue;
    }
    std::int64_t mag = c < 0 ? -c : c;
    out += c < 0 ? " - " : " + ";
    out += mag == 1 ? factor_str(f) : std::to_string(mag) + " * " + factor_str(f);
  }
  return out.empty() ? "0" : out;
}

std::string term_str(const Term& t) {
  if (t->kind == TermKind::Sum) {
    const Term& b = t->b;
    if (is_factor(b)) return term_str(t->a) + " + " + factor_str(b);
    if (b->kind == TermKind::Neg && is_factor(b->a)) return term_str(t->a) + " - " + factor_str(b->a);
    return flat_term_str(t);
  }
  if (is_factor(t)) return factor_str(t);
  return flat_term_str(t);
}

std::string wrap(const std::string& s) { return "(" + s + ")"; }

std::string formula_str(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Sym: return std::string("Q(") + f->symbol + ")";
    case FormulaKind::Const: return f->value ? "TRUE" : "FALSE";
    case FormulaKind::Mod: return "MOD(" + std::to_string(f->modulus) + "," + std::to_string(f->residue) + ")";
    case FormulaKind::Prev: return "Y(" + formula_str(f->a) + ")";
    case FormulaKind::Not: {
      const Formula& a = f->a;
      bool atomic = a->kind == FormulaKind::Sym || a->kind == FormulaKind::Const || a->kind == FormulaKind::Mod ||
                    a->kind == FormulaKind::Prev || a->kind == FormulaKind::Not;
      return "!" + (atomic ? formula_str(a) : wrap(formula_str(a)));
    }
    case FormulaKind::And: {
      auto side = [](const Formula& g, bool right) {
        bool paren = g->kind == FormulaKind::Or || g->kind == FormulaKind::Compare ||
                     (right && g->kind == FormulaKind::And);
        return paren ? wrap(formula_str(g)) : formula_str(g);
      };
      return side(f->a, false) + " && " + side(f->b, true);
    }
    case FormulaKind::Or: {
      auto side = [](const Formula& g, bool right) {
        bool paren = g->kind == FormulaKind::Compare || (right && g->kind == FormulaKind::Or);
        return paren ? wrap(formula_str(g)) : formula_str(g);
      };
      return side(f->a, false) + " || " + side(f->b, true);
    }
    case FormulaKind::Compare: return term_str(f->lhs) + " " + to_string(f->op) + " " + term_str(f->rhs);
  }
  return "?";
}

}  // namespace

Formula parse_formula(std::string_view text, const std::optional<Alphabet>& alphabet) {
  return Parser(text, alphabet).whole_formula();
}

Term parse_term(std::string_view text, const std::optional<Alphabet>& alphabet) {
  return Parser(text, alphabet).whole_term();
}

std::string print(const Formula& f) { return formula_str(f); }
std::string print(const Term& t) { return term_str(t); }

}  // namespace craspkit
