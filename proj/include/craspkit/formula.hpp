#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace craspkit {

inline constexpr char kBos = '^';

class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::string_view symbols);

  const std::string& symbols() const { return symbols_; }
  bool contains(char c) const { return symbols_.find(c) != std::string::npos; }
  std::size_t size() const { return symbols_.size(); }
  // Throws DomainError naming the first symbol of w outside the alphabet.
  void check_word(std::string_view w) const;
  Alphabet merged(const Alphabet& other) const;

  bool operator==(const Alphabet&) const = default;

 private:
  std::string symbols_;
};

enum class CmpOp : std::uint8_t { Lt, Le, Gt, Ge, Eq, Ne };
const char* to_string(CmpOp op);
bool compare(std::int64_t a, CmpOp op, std::int64_t b);

enum class FormulaKind : std::uint8_t { Sym, Const, Not, And, Or, Compare, Prev, Mod };
enum class TermKind : std::uint8_t {
  CountLeft,
  CountRight,
  CountAll,
  CountLeftStrict,
  CountRightStrict,
  Sum,
  Neg,
  Scale,
  IntConst,
  Ite
};

// Feature bits a formula uses; callers check them against the dialect they
// accept.
enum Feature : unsigned {
  kRightCount = 1u << 0,  // #>, #, #o>
  kPrev = 1u << 1,
  kMod = 1u << 2,
  kIte = 1u << 3,
  kCountSugar = 1u << 4,   // #, #<o, #o>
  kArithSugar = 1u << 5,   // Neg, Scale
  kLogicSugar = 1u << 6,   // ||, TRUE/FALSE, comparisons other than <
};
using Features = unsigned;
std::string describe_features(Features f);

struct FormulaNode;
struct TermNode;
using Formula = std::shared_ptr<const FormulaNode>;
using Term = std::shared_ptr<const TermNode>;

// Immutable AST nodes.  Build them only through the factory functions below,
// which fill the cached depth, feature and hash fields.
struct FormulaNode {
  FormulaKind kind;
  char symbol = 0;
  bool value = false;
  std::int64_t modulus = 0;
  std::int64_t residue = 0;
  CmpOp op = CmpOp::Lt;
  Formula a, b;
  Term lhs, rhs;

  int depth = 0;
  Features features = 0;
  std::size_t hash = 0;
};

struct TermNode {
  TermKind kind;
  Formula body;          // counts; Ite condition
  Term a, b;             // Sum operands; Neg/Scale operand; Ite branches
  std::int64_t constant = 0;  // IntConst value; Scale factor

  int depth = 0;
  Features features = 0;
  std::size_t hash = 0;
};

Formula sym(char c);
Formula truth(bool v);
Formula lnot(Formula f);
Formula land(Formula f, Formula g);
Formula lor(Formula f, Formula g);
Formula cmp(Term l, CmpOp op, Term r);
Formula prev(Formula f);
Formula mod(std::int64_t m, std::int64_t r);

Term count_left(Formula f);
Term count_right(Formula f);
Term count_all(Formula f);
Term count_left_strict(Formula f);
Term count_right_strict(Formula f);
Term sum(Term a, Term b);
Term neg(Term a);
Term scale(std::int64_t c, Term a);
Term constant(std::int64_t c);
Term ite(Formula cond, Term then_t, Term else_t);

// Conjunction/disjunction of a list, left-nested; empty lists give TRUE/FALSE.
Formula land_all(const std::vector<Formula>& fs);
Formula lor_all(const std::vector<Formula>& fs);

inline int depth(const Formula& f) { return f->depth; }
inline int depth(const Term& t) { return t->depth; }
inline Features features(const Formula& f) { return f->features; }
inline bool is_past_only(const Formula& f) { return (f->features & kRightCount) == 0; }
inline bool is_core_past(const Formula& f) { return (f->features & (kRightCount | kPrev | kMod)) == 0; }

bool structurally_equal(const Formula& f, const Formula& g);
bool structurally_equal(const Term& s, const Term& t);

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f->hash; }
};
struct FormulaEq {
  bool operator()(const Formula& f, const Formula& g) const { return structurally_equal(f, g); }
};
struct TermHash {
  std::size_t operator()(const Term& t) const { return t->hash; }
};
struct TermEq {
  bool operator()(const Term& s, const Term& t) const { return structurally_equal(s, t); }
};

// Symbols mentioned by Q(.) atoms, sorted.
std::string mentioned_symbols(const Formula& f);
// Maximum nesting of Y.
int prev_depth(const Formula& f);
// All moduli used by MOD atoms.
std::vector<std::int64_t> moduli(const Formula& f);
// Number of distinct nodes in the DAG.
std::size_t dag_size(const Formula& f);

}  // namespace craspkit
