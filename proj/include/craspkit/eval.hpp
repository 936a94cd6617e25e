#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "craspkit/formula.hpp"

namespace craspkit {

// A formula or term DAG flattened into topological order.  Running it on a
// word evaluates every node at every position in one sweep.
class Program {
 public:
  enum class Code : std::uint8_t {
    Sym, Const, Not, And, Or, Cmp, Prev, Mod,
    CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict,
    Sum, Neg, Scale, IntConst, Ite
  };
  struct Op {
    Code code;
    int a = -1, b = -1, c = -1;
    std::int64_t k = 0;  // constant, scale factor, modulus
    std::int64_t r = 0;  // residue
    char symbol = 0;
    CmpOp op = CmpOp::Lt;
  };

  explicit Program(const Formula& root);
  explicit Program(const Term& root);

  const std::vector<Op>& ops() const { return ops_; }
  bool past_only() const { return past_only_; }
  // Root value at positions 1..|w| (Booleans as 0/1).
  std::vector<std::int64_t> run(std::string_view w) const;

 private:
  std::vector<Op> ops_;
  bool past_only_ = true;
};

// Left-to-right evaluator for formulas without future counts: feeding the
// symbols of w one at a time yields w,i |= phi for i = 1, 2, ...
class PastEvaluator {
 public:
  explicit PastEvaluator(const Formula& f);
  explicit PastEvaluator(std::shared_ptr<const Program> program);

  void reset();
  std::int64_t push(char c);
  std::int64_t position() const { return position_; }

 private:
  std::shared_ptr<const Program> program_;
  std::vector<std::int64_t> value_;
  std::vector<std::int64_t> state_;
  std::int64_t position_ = 0;
};

bool eval_formula(const Formula& f, std::string_view w, std::int64_t i);
std::int64_t eval_term(const Term& t, std::string_view w, std::int64_t i);
bool accepts(const Formula& f, std::string_view w);

// Truth value at every position (batch evaluator).
std::vector<bool> eval_positions(const Formula& f, std::string_view w);
std::vector<std::int64_t> eval_term_positions(const Term& t, std::string_view w);
// Truth value at every position computed by the left-to-right evaluator;
// requires a formula without future counts.
std::vector<bool> eval_positions_streaming(const Formula& f, std::string_view w);

}  // namespace craspkit
