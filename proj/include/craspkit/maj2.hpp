#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "craspkit/equiv.hpp"
#include "craspkit/formula.hpp"

namespace craspkit {

// Two-variable majority logic over positions.
enum class Var : std::uint8_t { X, Y };
inline Var other(Var v) { return v == Var::X ? Var::Y : Var::X; }
inline char var_name(Var v) { return v == Var::X ? 'x' : 'y'; }
inline unsigned var_bit(Var v) { return v == Var::X ? 1u : 2u; }

enum class Maj2Kind : std::uint8_t { Sym, Less, Const, Not, And, Or, Maj, Exists, Forall };

struct Maj2Node;
using Maj2 = std::shared_ptr<const Maj2Node>;

struct Maj2Node {
  Maj2Kind kind;
  char symbol = 0;
  Var var = Var::X;   // Sym variable; bound variable of Maj/Exists/Forall; left of Less
  Var var2 = Var::Y;  // right of Less
  bool value = false;
  Maj2 a, b;
  std::vector<Maj2> items;  // Maj

  int depth = 0;
  unsigned free = 0;  // bit set of var_bit
};

Maj2 m_sym(char c, Var v);
Maj2 m_less(Var l, Var r);
Maj2 m_const(bool v);
Maj2 m_not(Maj2 f);
Maj2 m_and(Maj2 f, Maj2 g);
Maj2 m_or(Maj2 f, Maj2 g);
Maj2 m_maj(Var v, std::vector<Maj2> items);
Maj2 m_exists(Var v, Maj2 f);
Maj2 m_forall(Var v, Maj2 f);
// l <= r as !(r < l); l = r as !(l < r) && !(r < l).
Maj2 m_le(Var l, Var r);
Maj2 m_eq(Var l, Var r);

inline int depth(const Maj2& f) { return f->depth; }
inline unsigned free_vars(const Maj2& f) { return f->free; }
bool structurally_equal(const Maj2& f, const Maj2& g);

// Rewrites Ex[f] as MAJx<f; TRUE> and Ax[f] as !MAJx<!f; TRUE>.
Maj2 desugar_quantifiers(const Maj2& f);

struct Assignment {
  std::optional<std::int64_t> x, y;
};
// Throws DomainError on the empty word, unassigned free variables or
// positions outside [1, |w|].
bool eval_maj2(const Maj2& f, std::string_view w, const Assignment& xi = {});
// Truth value with x bound to each position 1..|w| (y unbound).
std::vector<bool> eval_maj2_positions(const Maj2& f, std::string_view w);

// Text syntax: Q(a; x), x < y, x <= y, x = y, TRUE, FALSE, !, &&, ||,
// MAJx< f; g; ... >, Ex[ f ], Ax[ f ].
Maj2 parse_maj2(std::string_view text, const std::optional<Alphabet>& alphabet = std::nullopt);
std::string print(const Maj2& f);
std::string mentioned_symbols(const Maj2& f);  // sorted

// Formula with free variable x that holds at x = i iff f holds at i.  Future
// counts are allowed; Y and MOD are not.
Maj2 tl_to_maj2(const Formula& f);
// Formula that holds at i iff g holds with x = i.  g may be closed.
Formula maj2_to_tl(const Maj2& g);
// Closed formula accepting w iff f holds with x at the last position.
Maj2 closed_wrapper(const Maj2& f);

// Accepts w iff the formula holds with x at the last position (closed
// formulas ignore x).
class Maj2Acceptor : public Acceptor {
 public:
  explicit Maj2Acceptor(Maj2 f, std::string label = "maj2") : f_(std::move(f)), label_(std::move(label)) {}
  std::string name() const override { return label_; }
  bool accepts(std::string_view w) const override;

 private:
  Maj2 f_;
  std::string label_;
};

}  // namespace craspkit
