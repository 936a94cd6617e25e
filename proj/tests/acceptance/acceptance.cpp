// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.  Expected values come from hand-written tables and the
// reference implementations under tests/support.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "craspkit/compiler.hpp"
#include "craspkit/equiv.hpp"
#include "craspkit/error.hpp"
#include "craspkit/eval.hpp"
#include "craspkit/languages.hpp"
#include "craspkit/maj2.hpp"
#include "craspkit/syntax.hpp"
#include "craspkit/transformer.hpp"
#include "craspkit/transforms.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace craspkit;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename... Args>
void expect(bool ok, const Args&... what) {
  if (ok) return;
  std::ostringstream os;
  (os << ... << what);
  throw Failure(os.str());
}

struct Criterion {
  std::string name;
  double budget_s;
  std::function<std::string()> run;  // returns a one-line summary
};

std::string bits(const std::vector<bool>& v) {
  std::string s;
  for (bool b : v) s += b ? 'T' : 'F';
  return s;
}

std::string numbers(const std::vector<std::int64_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

// Wraps a plain predicate so it can be compared with check_equiv.
class PredicateAcceptor : public Acceptor {
 public:
  PredicateAcceptor(std::string name, std::function<bool(std::string_view)> f)
      : name_(std::move(name)), f_(std::move(f)) {}
  std::string name() const override { return name_; }
  bool accepts(std::string_view w) const override { return f_(w); }

 private:
  std::string name_;
  std::function<bool(std::string_view)> f_;
};

void require_equiv(const Acceptor& a, const Acceptor& b, const Alphabet& sigma, int max_len, std::uint64_t samples,
                   int max_random_len, std::uint64_t seed, std::uint64_t* words = nullptr) {
  EquivReport r = check_equiv(a, b, sigma, max_len, samples, max_random_len, seed);
  expect(r.equivalent, a.name(), " vs ", b.name(), " differ on ", r.counterexample.value_or("?"));
  if (words) *words += r.exhaustive_words + r.random_words;
}

// ---------------------------------------------------------------------------

std::string dyck_traces() {
  Formula dyck = dyck_formula();
  // balanced && matched, balanced = (#<[Q(()] = #<[Q())]),
  // matched = (#<[violation] = 0), violation = (#<[Q(()] < #<[Q())]).
  const Formula balanced = dyck->a, matched = dyck->b;
  const Term opens = balanced->lhs, closes = balanced->rhs;
  const Term violations = matched->lhs;
  const Formula violation = violations->body;
  const Formula open = opens->body, close = closes->body;
  expect(open->kind == FormulaKind::Sym && open->symbol == '(', "unexpected shape of the dyck formula");
  expect(close->kind == FormulaKind::Sym && close->symbol == ')', "unexpected shape of the dyck formula");

  struct Table {
    std::string w;
    std::vector<std::string> rows;
  };
  const std::vector<Table> tables = {
      {"(())()",
       {"TTFFTF", "FFTTFT", "1 2 2 2 3 3", "0 0 1 2 2 3", "FFFTFT", "FFFFFF", "0 0 0 0 0 0", "TTTTTT", "FFFTFT"}},
      {"())()(",
       {"TFFTFT", "FTTFTF", "1 1 1 2 2 3", "0 1 2 2 3 3", "FTFTFT", "FFTFTF", "0 0 1 1 2 2", "TTFFFF", "FTFFFF"}},
  };
  int cells = 0;
  for (const auto& t : tables) {
    const std::vector<std::string> got = {
        bits(eval_positions(open, t.w)),       bits(eval_positions(close, t.w)),
        numbers(eval_term_positions(opens, t.w)), numbers(eval_term_positions(closes, t.w)),
        bits(eval_positions(balanced, t.w)),   bits(eval_positions(violation, t.w)),
        numbers(eval_term_positions(violations, t.w)), bits(eval_positions(matched, t.w)),
        bits(eval_positions(dyck, t.w))};
    for (std::size_t r = 0; r < got.size(); ++r) {
      expect(got[r] == t.rows[r], t.w, " row ", r + 1, ": got ", got[r], ", want ", t.rows[r]);
      cells += 6;
    }
    // The per-position evaluator must give the same values.
    for (std::int64_t i = 1; i <= 6; ++i)
      expect(eval_formula(dyck, t.w, i) == (t.rows[8][i - 1] == 'T'), t.w, " position ", i);
  }
  return std::to_string(cells) + " cells";
}

std::string depth_examples() {
  struct Case {
    std::string text;
    int depth;
  };
  const std::vector<Case> cases = {
      {"Q(a) && (1 <= 1 + 1)", 0},
      {"Q(a) && (#<[Q(a)] < #<[Q(b)])", 1},
      {"#<[Q(a)] <= #<[Q(b)] + #<[Q(c)] + 1", 1},
  };
  for (const auto& c : cases) expect(depth(parse_formula(c.text)) == c.depth, "depth of ", c.text);
  expect(depth(dyck_formula()) == 2, "depth of dyck");
  return "4 formulas";
}

std::string language_constructions() {
  std::uint64_t words = 0;
  for (int k = 1; k <= 8; ++k) {
    Formula f = altplus_formula(k);
    expect(depth(f) == k, "altplus ", k, " has depth ", depth(f));
    FormulaAcceptor fa(f, "altplus" + std::to_string(k));
    DfaAcceptor dfa(block_dfa({BlockLanguage::Variant::L, k}), "dfa");
    PredicateAcceptor runs("runs", [k](std::string_view w) { return oracle::in_altplus(k, w); });
    require_equiv(fa, dfa, Alphabet("ab"), 12, 10000, 200, 100 + k, &words);
    require_equiv(dfa, runs, Alphabet("ab"), 12, 10000, 200, 100 + k);
  }
  return std::to_string(words) + " words";
}

std::string compiler_soundness() {
  struct Item {
    std::string label;
    Formula f;
    Alphabet sigma;
  };
  std::vector<Item> corpus = {{"dyck", dyck_formula(), Alphabet("()")}};
  for (int k = 1; k <= 5; ++k) corpus.push_back({"altplus" + std::to_string(k), altplus_formula(k), Alphabet("ab")});
  for (std::string p : {"ab", "aba", "abc"}) corpus.push_back({"jexpr " + p, jexpr_formula(p), Alphabet("abc")});
  gen::FormulaGen g(gen::Options{}, 31337);
  for (int depth_goal : {1, 2, 3, 3, 2}) {
    for (;;) {
      Formula f = g.exact(depth_goal);
      try {
        compile(f, Alphabet("ab"), Precision(12, 4));
      } catch (const DomainError&) {
        continue;  // coefficient outside F; draw again
      }
      corpus.push_back({print(f), f, Alphabet("ab")});
      break;
    }
  }
  std::uint64_t words = 0;
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const auto& item = corpus[n];
    auto t = std::make_shared<Transformer>(compile(item.f, item.sigma, Precision(12, 4)));
    expect(t->depth() == depth(item.f), item.label, ": compiled depth ", t->depth());
    FormulaAcceptor fa(item.f, item.label);
    TransformerAcceptor ta(t, "compiled " + item.label);
    require_equiv(fa, ta, item.sigma, 8, 2000, 100, 500 + n, &words);
  }
  return std::to_string(corpus.size()) + " formulas, " + std::to_string(words) + " words";
}

// Depth-two table model with d = 1 over F_{4,1}.
Transformer table_model() {
  Transformer t;
  t.precision = Precision(4, 1);
  t.alphabet = Alphabet("ab");
  t.d = 1;
  t.embedding['a'] = {2};
  t.embedding['b'] = {-1};
  t.embedding[kBos] = {0};
  TableStage wobble;
  for (std::int64_t x = -8; x <= 7; ++x) wobble.entries[{x}] = {(x * x) % 7 - 3};
  for (int l = 0; l < 2; ++l) {
    LocalMap q = LocalMap::affine({{l == 0 ? 0 : 2}}, {0});
    LocalMap k = LocalMap::affine({{1}}, {1});
    t.layers.push_back({q, k, LocalMap::affine({{2}}, {0}), LocalMap({wobble})});
  }
  TableStage sign;
  for (std::int64_t x = -8; x <= 7; ++x) sign.entries[{x}] = {x % 3 == 0 ? 1 : -1};
  t.w_out = LocalMap({sign});
  t.finalize();
  return t;
}

std::string decompiler_soundness() {
  std::vector<std::pair<std::string, Transformer>> models;
  models.emplace_back("compiled", compile(parse_formula("#<[Q(a)] >= 1"), Alphabet("ab"), Precision(4, 1)));
  models.emplace_back("table", table_model());
  Transformer constant = table_model();
  constant.layers.resize(1);
  constant.w_out = LocalMap::affine({{0}}, {1});
  constant.finalize();
  models.emplace_back("constant", constant);
  std::uint64_t words = 0;
  for (auto& [label, t] : models) {
    expect(t.d <= 2 && t.precision.p <= 4 && t.depth() <= 2, label, ": model over the size limits");
    Formula f = decompile(t);
    expect(depth(f) == t.depth(), label, ": decompiled depth ", depth(f), " vs ", t.depth(), " layers");
    FormulaAcceptor fa(f, "decompiled " + label);
    TransformerAcceptor ta(std::make_shared<Transformer>(t), label);
    require_equiv(fa, ta, t.alphabet, 8, 0, 0, 1, &words);
  }
  return "3 models, " + std::to_string(words) + " words";
}

std::string maj2_translations() {
  std::vector<std::pair<Formula, std::string>> corpus = {
      {dyck_formula(), "()"},
      {parse_formula("#[Q(a)] > 0"), "ab"},
      {parse_formula("#<[Q(a)] = #>[Q(b)] || Q(a)"), "ab"},
      {jexpr_formula("abc"), "abc"},
      {jexpr_formula_bidirectional("abc"), "abc"},
  };
  for (int k = 1; k <= 4; ++k) corpus.emplace_back(altplus_formula(k), "ab");
  gen::Options opt;
  opt.right = opt.strict = opt.ite = true;
  gen::FormulaGen g(opt, 2718);
  for (int n = 0; n < 40; ++n) corpus.emplace_back(g.formula(static_cast<int>(g.rng().below(3)), 3), "ab");

  std::uint64_t checks = 0;
  for (const auto& [f, sigma] : corpus) {
    const std::string text = print(f);
    Maj2 m = tl_to_maj2(f);
    Formula back = maj2_to_tl(m);
    Maj2 closed = closed_wrapper(m);
    expect(depth(m) <= depth(f), text, ": TL to MAJ2 raised the depth");
    expect(depth(back) <= depth(m), text, ": MAJ2 to TL raised the depth");
    expect(depth(closed) == std::max(depth(m), 1) + 1, text, ": closed wrapper depth ", depth(closed));
    for (const auto& w : oracle::words(sigma, 1, 6)) {
      const auto tl = oracle::holds_all(f, w);
      const auto mj = eval_maj2_positions(m, w);
      const auto rt = eval_positions(back, w);
      for (std::size_t i = 1; i <= w.size(); ++i) {
        const auto x = static_cast<std::int64_t>(i);
        expect(mj[i - 1] == tl[i - 1], text, " on ", w, " at ", i, ": MAJ2 image differs");
        expect(oracle::maj_holds(m, w, x, 0) == tl[i - 1], text, " on ", w, " at ", i, ": MAJ2 reference differs");
        expect(rt[i - 1] == tl[i - 1], text, " on ", w, " at ", i, ": round trip differs");
        ++checks;
      }
      expect(eval_maj2(closed, w) == tl.back(), text, " on ", w, ": closed wrapper differs");
    }
  }
  return std::to_string(corpus.size()) + " formulas, " + std::to_string(checks) + " positions";
}

std::string transforms() {
  const auto words_ab = oracle::words("ab", 1, 6);
  gen::Options yopt;
  yopt.prev = yopt.mod = yopt.ite = yopt.strict = true;
  gen::FormulaGen yg(yopt, 1618);
  std::vector<Formula> ycorpus = {parse_formula("Y(Q(a) && Q(b))"), parse_formula("Y(!Q(a))"),
                                  parse_formula("Y(Y(#<[Q(a)] > #<[Y(Q(b))]))")};
  for (int n = 0; n < 150; ++n) ycorpus.push_back(yg.formula(static_cast<int>(yg.rng().below(3))));
  for (const auto& f : ycorpus) {
    Formula y = y_normal_form(f, Alphabet("ab"));
    expect(is_y_normal_form(y), print(f), ": result is not in Y-normal form");
    expect(depth(y) == depth(f), print(f), ": depth changed");
    for (const auto& w : words_ab) expect(oracle::holds_all(y, w) == oracle::holds_all(f, w), print(f), " on ", w);
  }

  gen::Options nopt;
  nopt.sigma = "abe";
  nopt.prev = nopt.mod = nopt.ite = true;
  nopt.max_modulus = 3;
  gen::FormulaGen ng(nopt, 1414);
  std::vector<Formula> ncorpus = {parse_formula("MOD(3,2) && Q(a)"), parse_formula("#<[Q(e)] >= 3"),
                                  parse_formula("Y(Q(a)) && #<[Y(Q(e))] > #<[Q(b)]")};
  for (int n = 0; n < 150; ++n) ncorpus.push_back(ng.formula(static_cast<int>(ng.rng().below(3)), 3));
  const auto words_ab5 = oracle::words("ab", 1, 5);
  for (const auto& f : ncorpus) {
    NeutralReduction r = neutral_letter_reduce(f, 'e', Alphabet("abe"));
    expect(depth(r.reduced) == depth(f), print(f), ": reduction changed the depth");
    expect(mentioned_symbols(r.reduced).find('e') == std::string::npos, print(f), ": e survived");
    const auto x = static_cast<std::size_t>(r.padding);
    for (const auto& w : words_ab5) {
      const auto big = oracle::holds_all(f, neutral_pad(w, 'e', r.padding));
      const auto small = oracle::holds_all(r.reduced, w);
      for (std::size_t i = 1; i <= w.size(); ++i)
        expect(small[i - 1] == big[i * x + x - 1], print(f), " on ", w, " at ", i);
    }
  }
  return std::to_string(ycorpus.size()) + " + " + std::to_string(ncorpus.size()) + " formulas";
}

std::string prediction_labels() {
  const std::string source = "^aaabbbbaaaaa";
  const std::string target = "0" + prefix_labels(3, source.substr(1));
  expect(target == "0000000011111", "target ", target);
  std::string from_formula = "0";
  for (bool b : eval_positions(prediction_formula(3), source.substr(1))) from_formula += b ? '1' : '0';
  expect(from_formula == target, "prediction formula gives ", from_formula);

  SplitMix64 rng(2024);
  int samples = 0;
  for (int k = 3; k <= 5; ++k) {
    Formula p = prediction_formula(k);
    for (int n = 0; n < 1000; ++n, ++samples) {
      std::string w = sample_block_string(k, static_cast<int>(rng.between(k, 60)), rng);
      const auto v = eval_positions(p, w);
      for (std::size_t i = 1; i <= w.size(); ++i)
        expect(v[i - 1] == oracle::in_altplus(k, w.substr(0, i)), "k=", k, " ", w, " at ", i);
    }
  }
  return std::to_string(samples) + " samples";
}

// Fraction of a's seen so far, read off a single uniform attention layer.
std::string no_dilution() {
  const Precision prec(12, 8);
  const std::int64_t u = prec.unit();
  Transformer t;
  t.precision = prec;
  t.alphabet = Alphabet("ab");
  t.d = 2;
  t.embedding['a'] = {u, u};
  t.embedding['b'] = {0, u};
  t.embedding[kBos] = {0, u};
  LocalMap id = LocalMap::affine({{u, 0}, {0, u}}, {0, 0});
  t.layers.push_back({LocalMap::zero(2, 1), LocalMap::zero(2, 1), id, id});
  t.w_out = LocalMap::affine({{u, 0}}, {0});
  t.finalize();

  const std::int64_t n = 1000000;
  ForwardStream fs(t);
  fs.push(kBos);
  SplitMix64 rng(99);
  std::int64_t as = 0;
  for (std::int64_t i = 2; i <= n; ++i) {
    const char c = rng.below(3) == 0 ? 'a' : 'b';
    as += c == 'a';
    fs.push(c);
    const std::int64_t want = as * u / i;  // non-negative, so / is floor
    expect(fs.c()[0][0] == want, "position ", i, ": c = ", fs.c()[0][0], ", want ", want);
  }
  expect(fs.position() == n, "stream stopped at ", fs.position());
  return "exact through position " + std::to_string(n);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"dyck-traces", 1, dyck_traces},
      {"depth-oracle", 1, depth_examples},
      {"language-constructions", 120, language_constructions},
      {"compiler-soundness", 600, compiler_soundness},
      {"decompiler-soundness", 600, decompiler_soundness},
      {"maj2-translations", 300, maj2_translations},
      {"transforms", 300, transforms},
      {"prediction-labels", 60, prediction_labels},
      {"no-dilution", 60, no_dilution},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && secs >= c.budget_s) {
      ok = false;
      detail += " (over the time budget)";
    }
    failed += !ok;
    std::printf("%s %-24s %8.2fs (budget %gs)  %s\n", ok ? "PASS" : "FAIL", c.name.c_str(), secs, c.budget_s,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
