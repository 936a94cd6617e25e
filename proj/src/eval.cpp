#include "craspkit/eval.hpp"

#include <string>
#include <unordered_map>

#include "craspkit/error.hpp"

namespace craspkit {
namespace {

using Code = Program::Code;

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw DomainError("integer overflow in term evaluation");
  return r;
}

std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw DomainError("integer overflow in term evaluation");
  return r;
}

class Builder {
 public:
  explicit Builder(std::vector<Program::Op>& ops) : ops_(ops) {}

  int visit(const Formula& f) {
    auto it = index_.find(f.get());
    if (it != index_.end()) return it->second;
    Program::Op op{};
    switch (f->kind) {
      case FormulaKind::Sym: op.code = Code::Sym; op.symbol = f->symbol; break;
      case FormulaKind::Const: op.code = Code::Const; op.k = f->value; break;
      case FormulaKind::Not: op.code = Code::Not; op.a = visit(f->a); break;
      case FormulaKind::And: op.code = Code::And; op.a = visit(f->a); op.b = visit(f->b); break;
      case FormulaKind::Or: op.code = Code::Or; op.a = visit(f->a); op.b = visit(f->b); break;
      case FormulaKind::Compare:
        op.code = Code::Cmp;
        op.a = visit(f->lhs);
        op.b = visit(f->rhs);
        op.op = f->op;
        break;
      case FormulaKind::Prev: op.code = Code::Prev; op.a = visit(f->a); break;
      case FormulaKind::Mod: op.code = Code::Mod; op.k = f->modulus; op.r = f->residue; break;
    }
    return push(f.get(), op);
  }

  int visit(const Term& t) {
    auto it = index_.find(t.get());
    if (it != index_.end()) return it->second;
    Program::Op op{};
    switch (t->kind) {
      case TermKind::CountLeft: op.code = Code::CountLeft; op.a = visit(t->body); break;
      case TermKind::CountRight: op.code = Code::CountRight; op.a = visit(t->body); break;
      case TermKind::CountAll: op.code = Code::CountAll; op.a = visit(t->body); break;
      case TermKind::CountLeftStrict: op.code = Code::CountLeftStrict; op.a = visit(t->body); break;
      case TermKind::CountRightStrict: op.code = Code::CountRightStrict; op.a = visit(t->body); break;
      case TermKind::Sum: op.code = Code::Sum; op.a = visit(t->a); op.b = visit(t->b); break;
      case TermKind::Neg: op.code = Code::Neg; op.a = visit(t->a); break;
      case TermKind::Scale: op.code = Code::Scale; op.a = visit(t->a); op.k = t->constant; break;
      case TermKind::IntConst: op.code = Code::IntConst; op.k = t->constant; break;
      case TermKind::Ite:
        op.code = Code::Ite;
        op.c = visit(t->body);
        op.a = visit(t->a);
        op.b = visit(t->b);
        break;
    }
    return push(t.get(), op);
  }

 private:
  std::vector<Program::Op>& ops_;
  std::unordered_map<const void*, int> index_;

  int push(const void* key, const Program::Op& op) {
    int id = static_cast<int>(ops_.size());
    ops_.push_back(op);
    index_.emplace(key, id);
    return id;
  }
};

void check_word(std::string_view w) {
  if (w.empty()) throw DomainError("the empty word has no positions");
}

void check_position(std::string_view w, std::int64_t i) {
  check_word(w);
  if (i < 1 || i > static_cast<std::int64_t>(w.size()))
    throw DomainError("position " + std::to_string(i) + " outside [1, " + std::to_string(w.size()) + "]");
}

}  // namespace

Program::Program(const Formula& root) {
  Builder(ops_).visit(root);
  past_only_ = is_past_only(root);
}

Program::Program(const Term& root) {
  Builder(ops_).visit(root);
  past_only_ = (root->features & kRightCount) == 0;
}

std::vector<std::int64_t> Program::run(std::string_view w) const {
  const std::size_t n = w.size();
  std::vector<std::int64_t> vals(ops_.size() * n);
  for (std::size_t id = 0; id < ops_.size(); ++id) {
    const Op& op = ops_[id];
    std::int64_t* out = vals.data() + id * n;
    const std::int64_t* a = op.a >= 0 ? vals.data() + static_cast<std::size_t>(op.a) * n : nullptr;
    const std::int64_t* b = op.b >= 0 ? vals.data() + static_cast<std::size_t>(op.b) * n : nullptr;
    switch (op.code) {
      case Code::Sym:
        for (std::size_t i = 0; i < n; ++i) out[i] = w[i] == op.symbol;
        break;
      case Code::Const:
      case Code::IntConst:
        for (std::size_t i = 0; i < n; ++i) out[i] = op.k;
        break;
      case Code::Not:
        for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
        break;
      case Code::And:
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] && b[i];
        break;
      case Code::Or:
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] || b[i];
        break;
      case Code::Cmp:
        for (std::size_t i = 0; i < n; ++i) out[i] = compare(a[i], op.op, b[i]);
        break;
      case Code::Prev:
        for (std::size_t i = 0; i < n; ++i) out[i] = i > 0 ? a[i - 1] : 0;
        break;
      case Code::Mod:
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::int64_t>(i + 1) % op.k == op.r;
        break;
      case Code::CountLeft: {
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < n; ++i) out[i] = (acc += a[i] != 0);
        break;
      }
      case Code::CountLeftStrict: {
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
          out[i] = acc;
          acc += a[i] != 0;
        }
        break;
      }
      case Code::CountRight: {
        std::int64_t acc = 0;
        for (std::size_t i = n; i-- > 0;) out[i] = (acc += a[i] != 0);
        break;
      }
      case Code::CountRightStrict: {
        std::int64_t acc = 0;
        for (std::size_t i = n; i-- > 0;) {
          out[i] = acc;
          acc += a[i] != 0;
        }
        break;
      }
      case Code::CountAll: {
        std::int64_t total = 0;
        for (std::size_t i = 0; i < n; ++i) total += a[i] != 0;
        for (std::size_t i = 0; i < n; ++i) out[i] = total;
        break;
      }
      case Code::Sum:
        for (std::size_t i = 0; i < n; ++i) out[i] = add(a[i], b[i]);
        break;
      case Code::Neg:
        for (std::size_t i = 0; i < n; ++i) out[i] = mul(a[i], -1);
        break;
      case Code::Scale:
        for (std::size_t i = 0; i < n; ++i) out[i] = mul(op.k, a[i]);
        break;
      case Code::Ite: {
        const std::int64_t* c = vals.data() + static_cast<std::size_t>(op.c) * n;
        for (std::size_t i = 0; i < n; ++i) out[i] = c[i] ? a[i] : b[i];
        break;
      }
    }
  }
  return std::vector<std::int64_t>(vals.end() - static_cast<std::ptrdiff_t>(n), vals.end());
}

PastEvaluator::PastEvaluator(const Formula& f) : PastEvaluator(std::make_shared<const Program>(f)) {}

PastEvaluator::PastEvaluator(std::shared_ptr<const Program> program) : program_(std::move(program)) {
  if (!program_->past_only()) throw DomainError("left-to-right evaluation needs a formula without future counts");
  reset();
}

void PastEvaluator::reset() {
  value_.assign(program_->ops().size(), 0);
  state_.assign(program_->ops().size(), 0);
  position_ = 0;
}

std::int64_t PastEvaluator::push(char ch) {
  ++position_;
  const auto& ops = program_->ops();
  for (std::size_t id = 0; id < ops.size(); ++id) {
    const Program::Op& op = ops[id];
    std::int64_t& out = value_[id];
    switch (op.code) {
      case Code::Sym: out = ch == op.symbol; break;
      case Code::Const:
      case Code::IntConst: out = op.k; break;
      case Code::Not: out = !value_[op.a]; break;
      case Code::And: out = value_[op.a] && value_[op.b]; break;
      case Code::Or: out = value_[op.a] || value_[op.b]; break;
      case Code::Cmp: out = compare(value_[op.a], op.op, value_[op.b]); break;
      case Code::Prev:
        out = state_[id];
        state_[id] = value_[op.a];
        break;
      case Code::Mod: out = position_ % op.k == op.r; break;
      case Code::CountLeft: out = (state_[id] += value_[op.a] != 0); break;
      case Code::CountLeftStrict:
        out = state_[id];
        state_[id] += value_[op.a] != 0;
        break;
      case Code::Sum: out = add(value_[op.a], value_[op.b]); break;
      case Code::Neg: out = mul(value_[op.a], -1); break;
      case Code::Scale: out = mul(op.k, value_[op.a]); break;
      case Code::Ite: out = value_[op.c] ? value_[op.a] : value_[op.b]; break;
      default: throw DomainError("future count in left-to-right evaluation");
    }
  }
  return value_.back();
}

bool eval_formula(const Formula& f, std::string_view w, std::int64_t i) {
  check_position(w, i);
  return Program(f).run(w)[static_cast<std::size_t>(i - 1)] != 0;
}

std::int64_t eval_term(const Term& t, std::string_view w, std::int64_t i) {
  check_position(w, i);
  return Program(t).run(w)[static_cast<std::size_t>(i - 1)];
}

bool accepts(const Formula& f, std::string_view w) {
  check_word(w);
  return Program(f).run(w).back() != 0;
}

std::vector<bool> eval_positions(const Formula& f, std::string_view w) {
  check_word(w);
  auto v = Program(f).run(w);
  return std::vector<bool>(v.begin(), v.end());
}

std::vector<std::int64_t> eval_term_positions(const Term& t, std::string_view w) {
  check_word(w);
  return Program(t).run(w);
}

std::vector<bool> eval_positions_streaming(const Formula& f, std::string_view w) {
  check_word(w);
  PastEvaluator ev(f);
  std::vector<bool> out;
  out.reserve(w.size());
  for (char c : w) out.push_back(ev.push(c) != 0);
  return out;
}

}  // namespace craspkit
