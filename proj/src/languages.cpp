#include "craspkit/languages.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "craspkit/error.hpp"
#include "craspkit/random.hpp"

namespace craspkit {

Dfa::Dfa(Alphabet alphabet, int states, int start, std::vector<std::vector<int>> delta, std::vector<bool> accepting)
    : alphabet_(std::move(alphabet)), start_(start), delta_(std::move(delta)), accepting_(std::move(accepting)) {
  if (static_cast<int>(delta_.size()) != states || static_cast<int>(accepting_.size()) != states)
    throw DomainError("malformed automaton");
  for (const auto& row : delta_)
    if (row.size() != alphabet_.size()) throw DomainError("malformed automaton");
}

int Dfa::step(int state, char c) const {
  auto idx = alphabet_.symbols().find(c);
  if (idx == std::string::npos) throw DomainError(std::string("symbol '") + c + "' is not in the alphabet {" +
                                                  alphabet_.symbols() + "}");
  return delta_[static_cast<std::size_t>(state)][idx];
}

bool Dfa::accepts(std::string_view w) const {
  int q = start_;
  for (char c : w) q = step(q, c);
  return accepting(q);
}

Alphabet BlockLanguage::alphabet() const { return Alphabet(variant == Variant::LTilde ? "abe" : "ab"); }

std::string BlockLanguage::label() const {
  switch (variant) {
    case Variant::L: return "L" + std::to_string(k);
    case Variant::A: return "A" + std::to_string(k);
    case Variant::B: return "B" + std::to_string(k);
    case Variant::L2: return "L2_" + std::to_string(k);
    case Variant::LTilde: return "L~" + std::to_string(k);
  }
  return "?";
}

std::string alternating(int k, char first) {
  std::string s;
  char other = first == 'a' ? 'b' : 'a';
  for (int i = 0; i < k; ++i) s += i % 2 == 0 ? first : other;
  return s;
}

Dfa subsequence_dfa(std::string_view pattern, const Alphabet& alphabet) {
  // State j = length of the longest matched prefix of the pattern.
  const int n = static_cast<int>(pattern.size());
  std::vector<std::vector<int>> delta(static_cast<std::size_t>(n + 1));
  std::vector<bool> acc(static_cast<std::size_t>(n + 1), false);
  acc[static_cast<std::size_t>(n)] = true;
  for (int j = 0; j <= n; ++j)
    for (char c : alphabet.symbols())
      delta[static_cast<std::size_t>(j)].push_back(j < n && pattern[static_cast<std::size_t>(j)] == c ? j + 1 : j);
  return Dfa(alphabet, n + 1, 0, std::move(delta), std::move(acc));
}

Dfa block_dfa(const BlockLanguage& lang) {
  if (lang.k < 1) throw DomainError("block languages need k >= 1");
  const Alphabet sigma = lang.alphabet();
  switch (lang.variant) {
    case BlockLanguage::Variant::A: return subsequence_dfa(alternating(lang.k, 'a'), sigma);
    case BlockLanguage::Variant::B: return subsequence_dfa(alternating(lang.k, 'b'), sigma);
    default: break;
  }
  const int k = lang.variant == BlockLanguage::Variant::L2 ? 2 * lang.k - 1 : lang.k;
  // States: 0 start, 1..k inside block j, k+1 dead.
  const int dead = k + 1;
  std::vector<std::vector<int>> delta(static_cast<std::size_t>(k + 2));
  std::vector<bool> acc(static_cast<std::size_t>(k + 2), false);
  acc[static_cast<std::size_t>(k)] = true;
  for (int q = 0; q <= dead; ++q) {
    for (char c : sigma.symbols()) {
      int next;
      if (c == 'e' || q == dead) {
        next = q;
      } else if (q == 0) {
        next = c == 'a' ? 1 : dead;
      } else {
        char block = q % 2 == 1 ? 'a' : 'b';
        next = c == block ? q : (q < k ? q + 1 : dead);
      }
      delta[static_cast<std::size_t>(q)].push_back(next);
    }
  }
  return Dfa(sigma, k + 2, 0, std::move(delta), std::move(acc));
}

bool member(const BlockLanguage& lang, std::string_view w) { return block_dfa(lang).accepts(w); }

namespace {

Formula at_least(Term t, std::int64_t c) { return cmp(std::move(t), CmpOp::Ge, constant(c)); }

// chi held at some position strictly before the current one, given that
// `exists` = (count(chi) >= 1) is the inclusive test.
Formula strictly_before(const Formula& chi, bool future) {
  Term count = future ? count_right(chi) : count_left(chi);
  return lor(land(chi, at_least(count, 2)), land(lnot(chi), at_least(count, 1)));
}

}  // namespace

Formula jexpr_formula(std::string_view symbols) {
  if (symbols.empty()) throw DomainError("J-expression needs at least one symbol");
  Formula chi = sym(symbols[0]);
  Formula phi = at_least(count_left(chi), 1);
  for (std::size_t j = 1; j < symbols.size(); ++j) {
    Formula before = symbols[j - 1] == symbols[j] ? strictly_before(chi, false) : phi;
    chi = land(before, sym(symbols[j]));
    phi = at_least(count_left(chi), 1);
  }
  return phi;
}

Formula jexpr_formula_bidirectional(std::string_view symbols) {
  if (symbols.size() % 2 == 0) throw DomainError("bidirectional J-expression needs an odd number of symbols");
  const std::size_t k = symbols.size() / 2;
  const char mid = symbols[k];
  if (k == 0) return at_least(count_left(sym(mid)), 1);
  // Left chain, innermost symbol first: L_1 = #<[Q(s1)] >= 1, L_j = #<[Q(sj) && L_{j-1}] >= 1.
  Formula lchi = sym(symbols[0]);
  Formula left = at_least(count_left(lchi), 1);
  for (std::size_t j = 1; j < k; ++j) {
    Formula inner = symbols[j - 1] == symbols[j] ? strictly_before(lchi, false) : left;
    lchi = land(sym(symbols[j]), inner);
    left = at_least(count_left(lchi), 1);
  }
  Formula rchi = sym(symbols[2 * k]);
  Formula right = at_least(count_right(rchi), 1);
  for (std::size_t j = 2 * k - 1; j > k; --j) {
    Formula inner = symbols[j + 1] == symbols[j] ? strictly_before(rchi, true) : right;
    rchi = land(sym(symbols[j]), inner);
    right = at_least(count_right(rchi), 1);
  }
  Formula l = symbols[k - 1] == mid ? strictly_before(lchi, false) : left;
  Formula r = symbols[k + 1] == mid ? strictly_before(rchi, true) : right;
  return at_least(count_left(land(land(l, sym(mid)), r)), 1);
}

Formula altplus_formula(int k, const Alphabet& alphabet) {
  if (k < 1) throw DomainError("altplus needs k >= 1");
  if (!alphabet.contains('a') || !alphabet.contains('b')) throw DomainError("altplus needs symbols a and b");
  for (char c : alphabet.symbols())
    if (c != 'a' && c != 'b' && c != 'e') throw DomainError("altplus alphabet must be {a,b} or {a,b,e}");
  return land(jexpr_formula(alternating(k, 'a')), lnot(jexpr_formula(alternating(k, 'b'))));
}

Formula dyck_formula() {
  Term open = count_left(sym('('));
  Term close = count_left(sym(')'));
  Formula balanced = cmp(open, CmpOp::Eq, close);
  Formula violates = cmp(open, CmpOp::Lt, close);
  Formula matched = cmp(count_left(violates), CmpOp::Eq, constant(0));
  return land(balanced, matched);
}

Formula prediction_formula(int k) {
  if (k < 3) throw DomainError("prediction formula needs k >= 3");
  return land(jexpr_formula(alternating(k - 2, 'b')), sym(k % 2 == 1 ? 'a' : 'b'));
}

bool dyck_member(std::string_view w) {
  long depth = 0;
  for (char c : w) {
    if (c == '(') ++depth;
    else if (c == ')') {
      if (--depth < 0) return false;
    } else {
      throw DomainError(std::string("symbol '") + c + "' is not a parenthesis");
    }
  }
  return depth == 0;
}

std::string prefix_labels(int k, std::string_view w) {
  Dfa dfa = block_dfa({BlockLanguage::Variant::L, k});
  std::string out;
  int q = dfa.start();
  for (char c : w) {
    q = dfa.step(q, c);
    out += dfa.accepting(q) ? '1' : '0';
  }
  return out;
}

std::string sample_block_string(int k, int n, SplitMix64& rng, std::vector<int>* gaps) {
  if (k < 1 || n < k) throw DomainError("cannot fit " + std::to_string(k) + " blocks into length " + std::to_string(n));
  // Floyd's algorithm: a uniform (k-1)-subset of the gaps {1, ..., n-1}.
  std::set<int> chosen;
  const int m = n - 1;
  for (int j = m - (k - 1) + 1; j <= m; ++j) {
    int t = static_cast<int>(rng.between(1, j));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::string w;
  char c = 'a';
  int pos = 1;
  for (int g : chosen) {
    for (; pos <= g; ++pos) w += c;
    c = c == 'a' ? 'b' : 'a';
  }
  for (; pos <= n; ++pos) w += c;
  if (gaps) gaps->assign(chosen.begin(), chosen.end());
  return w;
}

std::vector<DatasetRecord> sample_dataset(int k, int length_lo, int length_hi, int count, std::uint64_t seed) {
  if (k < 1) throw DomainError("k must be positive");
  if (count < 1) throw DomainError("count must be positive");
  if (length_lo > length_hi) throw DomainError("empty length bin");
  if (length_lo < k) throw DomainError("length bin starts below k; some blocks would be empty");
  SplitMix64 root(seed);
  std::vector<DatasetRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) {
    SplitMix64 rng = root.split();
    int n = static_cast<int>(rng.between(length_lo, length_hi));
    std::string w = sample_block_string(k, n, rng);
    out.push_back({k, std::string(1, kBos) + w, "0" + prefix_labels(k, w)});
  }
  return out;
}

std::string to_jsonl(const DatasetRecord& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["source"] = r.source;
  j["target"] = r.target;
  return j.dump();
}

}  // namespace craspkit
