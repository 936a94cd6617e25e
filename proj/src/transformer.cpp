#include "craspkit/transformer.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "craspkit/error.hpp"

namespace craspkit {

namespace {

constexpr std::size_t kExpCacheLimit = std::size_t{1} << 20;

std::int64_t clamp_mpz(const mpz_class& z, Precision prec) {
  if (z < prec.min_m()) return prec.min_m();
  if (z > prec.max_m()) return prec.max_m();
  return z.get_si();
}

void check_value(std::int64_t m, Precision prec, const char* what) {
  if (!prec.contains(m)) throw DomainError(std::string(what) + ": significand " + std::to_string(m) + " outside range");
}

std::int64_t mod_nonneg(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

LocalMap::LocalMap(std::vector<Stage> stages) : stages_(std::move(stages)) {
  sparse_.resize(stages_.size());
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (auto* a = std::get_if<AffineStage>(&stages_[i])) {
      auto& rows = sparse_[i].rows;
      rows.resize(a->m.size());
      for (std::size_t r = 0; r < a->m.size(); ++r)
        for (std::size_t c = 0; c < a->m[r].size(); ++c)
          if (a->m[r][c] != 0) rows[r].emplace_back(static_cast<int>(c), a->m[r][c]);
    }
  }
}

LocalMap LocalMap::zero(int in, int out) {
  return affine(std::vector<std::vector<std::int64_t>>(out, std::vector<std::int64_t>(in, 0)),
                std::vector<std::int64_t>(out, 0));
}

LocalMap LocalMap::affine(std::vector<std::vector<std::int64_t>> m, std::vector<std::int64_t> b) {
  return LocalMap({AffineStage{std::move(m), std::move(b)}});
}

FixedVec LocalMap::apply(const FixedVec& x, Precision prec) const {
  FixedVec cur = x;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const Stage& st = stages_[i];
    if (auto* a = std::get_if<AffineStage>(&st)) {
      FixedVec out(a->b.size());
      const auto& rows = sparse_[i].rows;
      for (std::size_t r = 0; r < out.size(); ++r) {
        i128 acc = static_cast<i128>(a->b[r]) << prec.s;
        for (auto [c, w] : rows[r]) acc += static_cast<i128>(w) * cur[c];
        out[r] = prec.saturate(acc >> prec.s);
      }
      cur = std::move(out);
    } else if (std::holds_alternative<ReluStage>(st)) {
      for (auto& v : cur) v = std::max<std::int64_t>(v, 0);
    } else {
      const auto& t = std::get<TableStage>(st);
      auto it = t.entries.find(cur);
      if (it == t.entries.end()) throw DomainError("table stage has no entry for the given input");
      cur = it->second;
    }
  }
  return cur;
}

int LocalMap::check(int n, Precision prec) const {
  int width = n;
  for (const Stage& st : stages_) {
    if (auto* a = std::get_if<AffineStage>(&st)) {
      if (a->m.size() != a->b.size()) throw DomainError("affine stage: matrix rows and bias differ in length");
      for (const auto& row : a->m) {
        if (static_cast<int>(row.size()) != width) throw DomainError("affine stage: row width mismatch");
        for (auto v : row) check_value(v, prec, "affine weight");
      }
      for (auto v : a->b) check_value(v, prec, "affine bias");
      width = static_cast<int>(a->b.size());
    } else if (auto* t = std::get_if<TableStage>(&st)) {
      if (t->entries.empty()) throw DomainError("table stage is empty");
      int out = -1;
      for (const auto& [in, o] : t->entries) {
        if (static_cast<int>(in.size()) != width) throw DomainError("table stage: input width mismatch");
        if (out < 0) out = static_cast<int>(o.size());
        if (static_cast<int>(o.size()) != out) throw DomainError("table stage: ragged outputs");
        for (auto v : in) check_value(v, prec, "table input");
        for (auto v : o) check_value(v, prec, "table output");
      }
      width = out;
    }
  }
  return width;
}

const char* to_string(PositionalEncoding::Kind k) {
  switch (k) {
    case PositionalEncoding::Kind::None: return "none";
    case PositionalEncoding::Kind::Sinusoidal: return "sinusoidal";
    case PositionalEncoding::Kind::RoPE: return "rope";
    case PositionalEncoding::Kind::ALiBi: return "alibi";
  }
  return "?";
}

void Transformer::finalize() {
  precision = Precision(precision.p, precision.s);
  if (d < 1) throw DomainError("width d must be positive");
  if (alphabet.symbols().find(bos) != std::string::npos) throw DomainError("alphabet must not contain BOS");
  auto need = alphabet.symbols() + bos;
  for (char c : need) {
    auto it = embedding.find(c);
    if (it == embedding.end()) throw DomainError(std::string("missing embedding for '") + c + "'");
    if (static_cast<int>(it->second.size()) != d) throw DomainError("embedding width mismatch");
    for (auto v : it->second) check_value(v, precision, "embedding");
  }
  for (const auto& [c, _] : embedding)
    if (need.find(c) == std::string::npos) throw DomainError(std::string("embedding for unknown symbol '") + c + "'");

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& L = layers[l];
    int qw = L.wq.check(d, precision);
    int kw = L.wk.check(d, precision);
    if (qw != kw) throw DomainError("layer " + std::to_string(l + 1) + ": query and key widths differ");
    if (L.wv.check(d, precision) != d) throw DomainError("layer " + std::to_string(l + 1) + ": value width must be d");
    if (L.f.check(d, precision) != d) throw DomainError("layer " + std::to_string(l + 1) + ": f must map d to d");
    if (pe.kind == PositionalEncoding::Kind::RoPE && qw != 2 * static_cast<int>(pe.angles.pairs.size()))
      throw DomainError("rope: query width must be twice the number of angle pairs");
  }
  if (w_out.check(d, precision) != 1) throw DomainError("output map must produce a single value");

  auto tables = std::make_shared<AngleTables>();
  if (pe.kind == PositionalEncoding::Kind::Sinusoidal || pe.kind == PositionalEncoding::Kind::RoPE) {
    if (pe.kind == PositionalEncoding::Kind::Sinusoidal && d != 2 * static_cast<int>(pe.angles.pairs.size()))
      throw DomainError("sinusoidal: d must be twice the number of angle pairs");
    for (auto [m, r] : pe.angles.pairs) {
      if (m < 1) throw DomainError("angle period must be positive");
      AngleTables::Pair pr;
      pr.m = m;
      for (std::int64_t n = 0; n < m; ++n) {
        ExactRational turns = make_rational(mod_nonneg(r, m) * n % m, m);
        pr.cos.push_back(cos_turns_round(turns, precision));
        pr.sin.push_back(sin_turns_round(turns, precision));
        pr.neg_sin.push_back(sin_turns_round(-turns, precision));
      }
      tables->pairs.push_back(std::move(pr));
    }
  } else if (pe.kind == PositionalEncoding::Kind::ALiBi) {
    check_value(pe.alibi_slope, precision, "alibi slope");
  }
  tables_ = std::move(tables);
  cache_mutex_ = std::make_shared<std::shared_mutex>();
  cache_ = std::make_shared<std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::int64_t, PairHash>>();
}

std::int64_t Transformer::exp_times(std::int64_t s, std::int64_t v) const {
  const auto key = std::make_pair(s, v);
  {
    std::shared_lock lock(*cache_mutex_);
    auto it = cache_->find(key);
    if (it != cache_->end()) return it->second;
  }
  const long long unit = precision.unit();
  std::int64_t r = exp_times_round(make_rational(s, unit), make_rational(v, unit), precision);
  std::unique_lock lock(*cache_mutex_);
  if (cache_->size() >= kExpCacheLimit) cache_->clear();
  cache_->emplace(key, r);
  return r;
}

std::int64_t apply_pe_scores(const Transformer& t, const FixedVec& q, const FixedVec& k, std::int64_t i,
                             std::int64_t j) {
  const Precision prec = t.precision;
  if (t.pe.kind == PositionalEncoding::Kind::RoPE) {
    const auto& tabs = t.angle_tables().pairs;
    mpz_class acc = 0;
    for (std::size_t c = 0; c < tabs.size(); ++c) {
      const auto& pr = tabs[c];
      std::int64_t ri = mod_nonneg(i, pr.m), rj = mod_nonneg(j, pr.m);
      mpz_class q1 = q[2 * c], q2 = q[2 * c + 1], k1 = k[2 * c], k2 = k[2 * c + 1];
      mpz_class qa = pr.cos[ri] * q1 + pr.neg_sin[ri] * q2;
      mpz_class qb = pr.sin[ri] * q1 + pr.cos[ri] * q2;
      mpz_class ka = pr.cos[rj] * k1 + pr.neg_sin[rj] * k2;
      mpz_class kb = pr.sin[rj] * k1 + pr.cos[rj] * k2;
      acc += qa * ka + qb * kb;
    }
    // acc is at scale 2^-4s.
    mpz_class m;
    mpz_fdiv_q_2exp(m.get_mpz_t(), acc.get_mpz_t(), 3 * prec.s);
    return clamp_mpz(m, prec);
  }
  i128 dot = 0;
  for (std::size_t c = 0; c < q.size(); ++c) dot += static_cast<i128>(q[c]) * k[c];
  if (t.pe.kind == PositionalEncoding::Kind::ALiBi)
    dot -= (static_cast<i128>(t.pe.alibi_slope) * (i - j)) << prec.s;
  return prec.saturate(dot >> prec.s);
}

std::int64_t alibi_window(Precision prec, std::int64_t slope) {
  if (slope <= 0) return 0;
  // ln 2 < 6931471806 / 10^10.
  ExactRational ln2_upper = ExactRational(mpz_class(6931471806), mpz_class(10000000000));
  ln2_upper.canonicalize();
  ExactRational S = make_rational(prec.max_m(), prec.unit());
  ExactRational a = make_rational(slope, prec.unit());
  ExactRational delta = (S + (prec.s + 1) * ln2_upper) / a;
  mpz_class fl = floor_of(delta);
  if (fl != delta) fl += 1;
  return fl.get_si();
}

std::size_t ForwardStream::VecHash::operator()(const FixedVec& v) const {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (auto x : v) h ^= std::hash<std::int64_t>()(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

ForwardStream::ForwardStream(const Transformer& t, bool keep_history)
    : t_(t), keep_history_(keep_history), layers_(t.layers.size()) {
  positional_scores_ = t.pe.kind == PositionalEncoding::Kind::RoPE || t.pe.kind == PositionalEncoding::Kind::ALiBi;
  if (t.pe.kind == PositionalEncoding::Kind::RoPE) {
    for (const auto& pr : t.angle_tables().pairs) {
      residue_period_ = std::lcm(residue_period_, pr.m);
      if (residue_period_ > (std::int64_t{1} << 40)) residue_period_ = 0;  // no reduction
      if (residue_period_ == 0) break;
    }
  }
  if (t.pe.kind == PositionalEncoding::Kind::ALiBi && t.pe.alibi_slope > 0) {
    // Beyond this distance the exact score is below the minimum of F for any
    // q, k, so the rounded score is the minimum itself.
    const Precision prec = t.precision;
    std::size_t qw = 0;
    for (const auto& L : t.layers) {
      FixedVec zero(t.d, 0);
      qw = std::max(qw, L.wq.apply(zero, prec).size());
    }
    i128 dot_bound = static_cast<i128>(std::max<std::size_t>(qw, 1)) * (static_cast<i128>(1) << (2 * (prec.p - 1)));
    i128 need = dot_bound + (static_cast<i128>(-prec.min_m()) << prec.s);  // scale 2^-2s
    i128 per = static_cast<i128>(t.pe.alibi_slope) << prec.s;
    i128 dist = need / per + 1;
    alibi_window_ = dist > (static_cast<i128>(1) << 62) ? 0 : static_cast<std::int64_t>(dist);
  }
  for (auto& st : layers_) st.value_sum.assign(t.d, 0);
}

std::int64_t ForwardStream::push(char ch) {
  const Transformer& t = t_;
  const Precision prec = t.precision;
  if (position_ == 0 && ch != t.bos) throw DomainError("input must start with BOS");
  auto emb = t.embedding.find(ch);
  if (emb == t.embedding.end()) throw DomainError(std::string("symbol '") + ch + "' not in alphabet");
  ++position_;
  const std::int64_t i = position_;

  h_.assign(1, emb->second);
  if (t.pe.kind == PositionalEncoding::Kind::Sinusoidal) {
    const auto& tabs = t.angle_tables().pairs;
    for (std::size_t c = 0; c < tabs.size(); ++c) {
      std::int64_t n = mod_nonneg(i - 1, tabs[c].m);
      h_[0][2 * c] = prec.saturate(static_cast<i128>(h_[0][2 * c]) + tabs[c].neg_sin[n]);
      h_[0][2 * c + 1] = prec.saturate(static_cast<i128>(h_[0][2 * c + 1]) + tabs[c].cos[n]);
    }
  }
  q_.clear();
  k_.clear();
  v_.clear();
  c_.clear();
  scores_.clear();

  const std::int64_t residue_i = residue_period_ > 0 ? mod_nonneg(i, residue_period_) : i;
  for (std::size_t l = 0; l < t.layers.size(); ++l) {
    const Layer& L = t.layers[l];
    LayerState& st = layers_[l];
    const FixedVec& h = h_.back();
    FixedVec q = L.wq.apply(h, prec), k = L.wk.apply(h, prec), v = L.wv.apply(h, prec);
    const std::size_t dv = v.size();

    for (std::size_t c = 0; c < dv; ++c) st.value_sum[c] += v[c];
    if (keep_history_) st.history.emplace_back(k, v);

    std::vector<i128> num(dv, 0);
    i128 den = 0;
    auto accumulate = [&](std::int64_t score, const FixedVec& val, std::int64_t count) {
      den += static_cast<i128>(count) * exp_weight(score);
      for (std::size_t c = 0; c < dv; ++c) num[c] += static_cast<i128>(count) * t.exp_times(score, val[c]);
    };

    if (t.pe.kind == PositionalEncoding::Kind::ALiBi) {
      st.recent.push_back({k, v, i});
      while (alibi_window_ > 0 && !st.recent.empty() && i - st.recent.front().pos >= alibi_window_) {
        ++st.far[st.recent.front().v];
        st.recent.pop_front();
      }
      for (const auto& [val, cnt] : st.far) accumulate(prec.min_m(), val, cnt);
      for (const auto& e : st.recent) accumulate(apply_pe_scores(t, q, e.k, i, e.pos), e.v, 1);
    } else {
      FixedVec key = k;
      key.insert(key.end(), v.begin(), v.end());
      if (positional_scores_) key.push_back(residue_i);
      ++st.histogram[key];
      const std::size_t kw = k.size();
      FixedVec kk(kw), vv(dv);
      for (const auto& [hk, cnt] : st.histogram) {
        std::copy(hk.begin(), hk.begin() + kw, kk.begin());
        std::copy(hk.begin() + kw, hk.begin() + kw + dv, vv.begin());
        std::int64_t j = positional_scores_ ? hk.back() : 0;
        accumulate(apply_pe_scores(t, q, kk, residue_i, j), vv, cnt);
      }
    }

    FixedVec c(dv);
    if (den == 0) {
      for (std::size_t x = 0; x < dv; ++x) c[x] = round_quotient(st.value_sum[x], static_cast<i128>(i) << prec.s, prec);
    } else {
      for (std::size_t x = 0; x < dv; ++x) c[x] = round_quotient(num[x], den, prec);
    }

    if (keep_history_) {
      std::vector<std::int64_t> row;
      row.reserve(st.history.size());
      for (std::size_t j = 0; j < st.history.size(); ++j)
        row.push_back(apply_pe_scores(t, q, st.history[j].first, i, static_cast<std::int64_t>(j) + 1));
      scores_.push_back(std::move(row));
    }

    FixedVec res(t.d);
    for (int x = 0; x < t.d; ++x) res[x] = prec.saturate(static_cast<i128>(c[x]) + h[x]);
    FixedVec next = L.f.apply(res, prec);
    q_.push_back(std::move(q));
    k_.push_back(std::move(k));
    v_.push_back(std::move(v));
    c_.push_back(std::move(c));
    h_.push_back(std::move(next));
  }
  return t.w_out.apply(h_.back(), prec).at(0);
}

std::int64_t ForwardStream::exp_weight(std::int64_t score) const { return t_.exp_times(score, t_.precision.unit()); }

Activations forward(const Transformer& t, std::string_view w) {
  if (w.empty() || w.front() != t.bos) throw DomainError("input must start with BOS");
  ForwardStream fs(t, true);
  Activations a;
  const std::size_t L = t.layers.size();
  a.h.resize(L + 1);
  a.q.resize(L);
  a.k.resize(L);
  a.v.resize(L);
  a.c.resize(L);
  a.scores.resize(L);
  for (char ch : w) {
    a.outputs.push_back(fs.push(ch));
    for (std::size_t l = 0; l <= L; ++l) a.h[l].push_back(fs.h()[l]);
    for (std::size_t l = 0; l < L; ++l) {
      a.q[l].push_back(fs.q()[l]);
      a.k[l].push_back(fs.k()[l]);
      a.v[l].push_back(fs.v()[l]);
      a.c[l].push_back(fs.c()[l]);
      a.scores[l].push_back(fs.scores()[l]);
    }
  }
  return a;
}

std::int64_t output_score(const Transformer& t, std::string_view w) {
  if (w.empty() || w.front() != t.bos) throw DomainError("input must start with BOS");
  ForwardStream fs(t);
  std::int64_t out = 0;
  for (char ch : w) out = fs.push(ch);
  return out;
}

bool accepts(const Transformer& t, std::string_view w) { return output_score(t, w) > 0; }

bool TransformerAcceptor::accepts(std::string_view w) const {
  std::string s(1, t_->bos);
  s.append(w);
  return craspkit::accepts(*t_, s);
}

}  // namespace craspkit
