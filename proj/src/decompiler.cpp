#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "craspkit/compiler.hpp"
#include "craspkit/error.hpp"
#include "craspkit/transforms.hpp"

namespace craspkit {

namespace {

bool is_const(const Formula& f, bool v) { return f->kind == FormulaKind::Const && f->value == v; }

// Decision-diagram style synthesis over bit variables.  A point is a packed
// bit pattern (variable k = bit k) with its output; points outside the list
// are don't-cares, which lets a split be skipped when one side is empty.
class Synth {
 public:
  explicit Synth(const std::vector<Formula>& vars) : vars_(vars) {}

  Formula build(const std::vector<std::pair<std::uint64_t, bool>>& pts) { return rec(pts, 0); }

 private:
  const std::vector<Formula>& vars_;
  std::unordered_map<std::string, Formula> memo_;

  Formula rec(const std::vector<std::pair<std::uint64_t, bool>>& pts, std::size_t k) {
    if (pts.empty()) return nullptr;
    bool all1 = true, all0 = true;
    for (const auto& [_, o] : pts) (o ? all0 : all1) = false;
    if (all1) return truth(true);
    if (all0) return truth(false);

    std::string key;
    key.reserve(pts.size() * 9 + 4);
    key.append(reinterpret_cast<const char*>(&k), sizeof k);
    for (const auto& [bits, o] : pts) {
      std::uint64_t suffix = bits >> k;
      key.append(reinterpret_cast<const char*>(&suffix), sizeof suffix);
      key.push_back(o ? '1' : '0');
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::vector<std::pair<std::uint64_t, bool>> ones, zeros;
    for (const auto& p : pts) ((p.first >> k) & 1 ? ones : zeros).push_back(p);
    Formula r;
    if (ones.empty()) {
      r = rec(zeros, k + 1);
    } else if (zeros.empty()) {
      r = rec(ones, k + 1);
    } else {
      Formula f1 = rec(ones, k + 1), f0 = rec(zeros, k + 1);
      const Formula& x = vars_.at(k);
      if (f1 == f0 || structurally_equal(f1, f0)) r = f1;
      else if (is_const(f1, true) && is_const(f0, false)) r = x;
      else if (is_const(f1, false) && is_const(f0, true)) r = lnot(x);
      else if (is_const(f1, true)) r = lor(x, f0);
      else if (is_const(f1, false)) r = land(lnot(x), f0);
      else if (is_const(f0, true)) r = lor(lnot(x), f1);
      else if (is_const(f0, false)) r = land(x, f1);
      else r = lor(land(x, f1), land(lnot(x), f0));
    }
    memo_.emplace(std::move(key), r);
    return r;
  }
};

std::vector<Formula> flatten(const BitFormulaBank& in) {
  std::vector<Formula> vars;
  for (const auto& coord : in.bits) vars.insert(vars.end(), coord.begin(), coord.end());
  if (vars.size() > 64) throw DomainError("synthesis supports at most 64 input bits");
  return vars;
}

std::uint64_t pattern(const FixedVec& x, const BitFormulaBank& in) {
  if (static_cast<int>(x.size()) != in.width()) throw DomainError("synthesis: input width mismatch");
  const int p = in.prec.p;
  std::uint64_t bits = 0;
  for (std::size_t c = 0; c < x.size(); ++c)
    for (int b = 1; b <= p; ++b)
      if (bit_of_significand(x[c], b)) bits |= std::uint64_t{1} << (c * p + (b - 1));
  return bits;
}

Term pow2_scale(int e, const Term& t) { return e == 0 ? t : scale(std::int64_t{1} << e, t); }

// Sum over j <= i of the two's-complement value encoded by the bit formulas.
Term bits_sum(const std::vector<Formula>& bits) {
  const int p = static_cast<int>(bits.size());
  std::vector<Term> parts;
  for (int b = 1; b <= p; ++b) {
    if (is_const(bits[b - 1], false)) continue;
    std::int64_t w = b == p ? -(std::int64_t{1} << (p - 1)) : std::int64_t{1} << (b - 1);
    parts.push_back(w == 1 ? count_left(bits[b - 1]) : scale(w, count_left(bits[b - 1])));
  }
  return sum_all(parts);
}

Term plus_const(const Term& t, std::int64_t c) { return c == 0 ? t : sum(t, constant(c)); }

template <class F>
auto defined(F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

// Tautology of the given depth.
Formula deep_true(int k) {
  Formula f = truth(true);
  for (int i = 0; i < k; ++i) f = cmp(constant(0), CmpOp::Lt, sum(count_left(f), constant(1)));
  return f;
}

}  // namespace

BitFormulaBank BitFormulaBank::concat(const BitFormulaBank& other) const {
  if (!(prec == other.prec)) throw DomainError("bank precision mismatch");
  BitFormulaBank r = *this;
  r.bits.insert(r.bits.end(), other.bits.begin(), other.bits.end());
  return r;
}

std::vector<FixedVec> all_vectors(int n, Precision prec) {
  std::vector<FixedVec> out;
  FixedVec x(n, prec.min_m());
  const std::uint64_t per = std::uint64_t{1} << prec.p;
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > (std::uint64_t{1} << 24) / per) throw DomainError("too many vectors to enumerate");
    total *= per;
  }
  out.reserve(total);
  for (std::uint64_t k = 0; k < total; ++k) {
    out.push_back(x);
    for (int c = n - 1; c >= 0; --c) {
      if (x[c] < prec.max_m()) {
        ++x[c];
        break;
      }
      x[c] = prec.min_m();
    }
  }
  return out;
}

BitFormulaBank synth_function_formula(const BitFormulaBank& in, const VectorFunction& g, Precision out_prec,
                                      const std::vector<FixedVec>& domain) {
  const std::vector<FixedVec> all = domain.empty() ? all_vectors(in.width(), in.prec) : std::vector<FixedVec>{};
  const std::vector<FixedVec>& dom = domain.empty() ? all : domain;
  const std::vector<Formula> vars = flatten(in);

  std::vector<std::pair<std::uint64_t, FixedVec>> pts;
  std::set<std::uint64_t> seen;
  int m = -1;
  for (const auto& x : dom) {
    std::uint64_t pat = pattern(x, in);
    if (!seen.insert(pat).second) continue;
    auto y = g(x);
    if (!y) continue;
    if (m < 0) m = static_cast<int>(y->size());
    if (static_cast<int>(y->size()) != m) throw DomainError("synthesis: ragged function outputs");
    for (auto v : *y)
      if (!out_prec.contains(v)) throw DomainError("synthesis: output outside the target precision");
    pts.emplace_back(pat, std::move(*y));
  }

  BitFormulaBank out;
  out.prec = out_prec;
  if (m < 0) return out;
  Synth synth(vars);
  std::vector<std::pair<std::uint64_t, bool>> col(pts.size());
  for (int c = 0; c < m; ++c) {
    std::vector<Formula> bits;
    for (int b = 1; b <= out_prec.p; ++b) {
      for (std::size_t k = 0; k < pts.size(); ++k) col[k] = {pts[k].first, bit_of_significand(pts[k].second[c], b) != 0};
      bits.push_back(synth.build(col));
    }
    out.bits.push_back(std::move(bits));
  }
  return out;
}

Formula synth_predicate(const BitFormulaBank& in, const std::function<std::optional<bool>(const FixedVec&)>& pred,
                        const std::vector<FixedVec>& domain) {
  const std::vector<FixedVec> all = domain.empty() ? all_vectors(in.width(), in.prec) : std::vector<FixedVec>{};
  const std::vector<FixedVec>& dom = domain.empty() ? all : domain;
  const std::vector<Formula> vars = flatten(in);
  std::vector<std::pair<std::uint64_t, bool>> pts;
  std::set<std::uint64_t> seen;
  for (const auto& x : dom) {
    std::uint64_t pat = pattern(x, in);
    if (!seen.insert(pat).second) continue;
    if (auto v = pred(x)) pts.emplace_back(pat, *v);
  }
  Synth synth(vars);
  Formula f = synth.build(pts);
  return f ? f : truth(false);
}

std::vector<Formula> division_bits(const Term& num, const Term& den, Precision prec) {
  const int p = prec.p;
  const Term n = pow2_scale(prec.s, num);
  std::vector<Formula> bits(p);
  bits[p - 1] = cmp(n, CmpOp::Lt, constant(0));
  // t starts at the quotient's offset into [0, 2^(p-1)) and loses each
  // subtracted multiple of den; saturation falls out of the same chain.
  Term t = sum(n, ite(bits[p - 1], pow2_scale(p - 1, den), constant(0)));
  for (int b = p - 1; b >= 1; --b) {
    bits[b - 1] = cmp(t, CmpOp::Ge, pow2_scale(b - 1, den));
    if (b > 1) t = sum(t, ite(bits[b - 1], scale(-(std::int64_t{1} << (b - 1)), den), constant(0)));
  }
  return bits;
}

Formula decompile(const Transformer& t, const DecompileLimits& limits) {
  if (t.pe.kind != PositionalEncoding::Kind::None) throw DomainError("decompile: positional encodings are not supported");
  if (t.d > limits.max_d || t.precision.p > limits.max_p || t.depth() > limits.max_depth)
    throw DomainError("decompile: model exceeds the size limits (d <= " + std::to_string(limits.max_d) +
                      ", p <= " + std::to_string(limits.max_p) + ", depth <= " + std::to_string(limits.max_depth) +
                      "; got d=" + std::to_string(t.d) + ", p=" + std::to_string(t.precision.p) +
                      ", depth=" + std::to_string(t.depth()) + ")");
  const Precision prec = t.precision;
  const int L = t.depth();
  const int d = t.d;

  ForwardStream bos_run(t);
  bos_run.push(t.bos);
  const auto bos_k = bos_run.k();
  const auto bos_v = bos_run.v();

  // Layer 0: embeddings of the non-BOS symbols.
  std::vector<FixedVec> R;
  BitFormulaBank H;
  H.prec = prec;
  H.bits.assign(d, std::vector<Formula>(prec.p));
  for (int c = 0; c < d; ++c)
    for (int b = 1; b <= prec.p; ++b) {
      std::vector<Formula> syms;
      for (char s : t.alphabet.symbols())
        if (bit_of_significand(t.embedding.at(s)[c], b)) syms.push_back(sym(s));
      H.bits[c][b - 1] = lor_all(syms);
    }
  for (char s : t.alphabet.symbols())
    if (std::find(R.begin(), R.end(), t.embedding.at(s)) == R.end()) R.push_back(t.embedding.at(s));

  for (int l = 1; l <= L; ++l) {
    const Layer& layer = t.layers[l - 1];
    struct Row {
      FixedVec h, q, k, v;
    };
    std::vector<Row> rows;
    for (const auto& h : R) {
      auto q = defined([&] { return layer.wq.apply(h, prec); });
      auto k = defined([&] { return layer.wk.apply(h, prec); });
      auto v = defined([&] { return layer.wv.apply(h, prec); });
      if (q && k && v) rows.push_back({h, *q, *k, *v});
    }
    std::vector<FixedVec> dom;
    for (const auto& r : rows) dom.push_back(r.h);
    auto find_row = [&](const FixedVec& h) -> const Row* {
      for (const auto& r : rows)
        if (r.h == h) return &r;
      return nullptr;
    };
    std::vector<FixedVec> queries;
    for (const auto& r : rows)
      if (std::find(queries.begin(), queries.end(), r.q) == queries.end()) queries.push_back(r.q);

    std::vector<Term> A(d, constant(0));
    Term B = constant(0);
    bool maybe_zero = false;
    for (const auto& qv : queries) {
      Formula is_q = queries.size() == 1 ? truth(true)
                                         : synth_predicate(H, [&](const FixedVec& h) -> std::optional<bool> {
                                             const Row* r = find_row(h);
                                             if (!r) return std::nullopt;
                                             return r->q == qv;
                                           }, dom);
      const std::int64_t bos_score = apply_pe_scores(t, qv, bos_k[l - 1], 0, 0);
      auto score_of = [&](const Row& r) { return apply_pe_scores(t, qv, r.k, 0, 0); };

      BitFormulaBank beta = synth_function_formula(H, [&](const FixedVec& h) -> std::optional<FixedVec> {
        const Row* r = find_row(h);
        if (!r) return std::nullopt;
        return FixedVec{t.exp_times(score_of(*r), prec.unit())};
      }, prec, dom);
      const std::int64_t w_bos = t.exp_times(bos_score, prec.unit());
      if (w_bos == 0) maybe_zero = true;
      Term Bq = plus_const(beta.bits.empty() ? constant(0) : bits_sum(beta.bits[0]), w_bos);
      B = sum(B, queries.size() == 1 ? Bq : ite(is_q, Bq, constant(0)));

      for (int c = 0; c < d; ++c) {
        BitFormulaBank alpha = synth_function_formula(H, [&](const FixedVec& h) -> std::optional<FixedVec> {
          const Row* r = find_row(h);
          if (!r) return std::nullopt;
          return FixedVec{t.exp_times(score_of(*r), r->v[c])};
        }, prec, dom);
        Term Aq = plus_const(alpha.bits.empty() ? constant(0) : bits_sum(alpha.bits[0]), t.exp_times(bos_score, bos_v[l - 1][c]));
        A[c] = sum(A[c], queries.size() == 1 ? Aq : ite(is_q, Aq, constant(0)));
      }
    }

    BitFormulaBank C;
    C.prec = prec;
    const Formula zero = cmp(B, CmpOp::Lt, constant(1));
    const Term positions = sum(count_left(truth(true)), constant(1));
    for (int c = 0; c < d; ++c) {
      std::vector<Formula> bits = division_bits(A[c], B, prec);
      if (maybe_zero) {
        BitFormulaBank gamma = synth_function_formula(H, [&](const FixedVec& h) -> std::optional<FixedVec> {
          const Row* r = find_row(h);
          if (!r) return std::nullopt;
          return FixedVec{r->v[c]};
        }, prec, dom);
        Term V = plus_const(gamma.bits.empty() ? constant(0) : bits_sum(gamma.bits[0]), bos_v[l - 1][c]);
        std::vector<Formula> avg = division_bits(V, pow2_scale(prec.s, positions), prec);
        for (int b = 0; b < prec.p; ++b) bits[b] = lor(land(zero, avg[b]), land(lnot(zero), bits[b]));
      }
      C.bits.push_back(std::move(bits));
    }

    // Residual and f over (h, c) with c ranging over all of F^d.
    const std::vector<FixedVec> cs = all_vectors(d, prec);
    std::vector<FixedVec> pairs;
    std::vector<FixedVec> next;
    std::map<FixedVec, FixedVec> image;
    for (const auto& r : rows) {
      for (const auto& c : cs) {
        FixedVec res(d);
        for (int x = 0; x < d; ++x) res[x] = prec.saturate(static_cast<i128>(c[x]) + r.h[x]);
        auto y = defined([&] { return layer.f.apply(res, prec); });
        if (!y) continue;
        FixedVec key = r.h;
        key.insert(key.end(), c.begin(), c.end());
        pairs.push_back(key);
        image.emplace(key, *y);
        if (std::find(next.begin(), next.end(), *y) == next.end()) next.push_back(*y);
      }
    }
    H = synth_function_formula(H.concat(C), [&](const FixedVec& x) -> std::optional<FixedVec> {
      auto it = image.find(x);
      if (it == image.end()) return std::nullopt;
      return it->second;
    }, prec, pairs);
    if (H.bits.empty()) H.bits.assign(d, std::vector<Formula>(prec.p, truth(false)));
    R = std::move(next);
  }

  Formula out = synth_predicate(H, [&](const FixedVec& h) -> std::optional<bool> {
    auto y = defined([&] { return t.w_out.apply(h, prec); });
    if (!y) return std::nullopt;
    return y->at(0) > 0;
  }, R);
  if (depth(out) > L) throw Error("decompile: depth exceeded the layer count");
  if (depth(out) < L) out = land(out, deep_true(L));
  return out;
}

}  // namespace craspkit
