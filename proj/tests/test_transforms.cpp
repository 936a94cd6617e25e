#include "doctest.h"

#include <numeric>

#include "craspkit/error.hpp"
#include "craspkit/eval.hpp"
#include "craspkit/syntax.hpp"
#include "craspkit/transforms.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace craspkit;

namespace {

// Both formulas agree at every position of every word in `ws`.
void require_same_positions(const Formula& f, const Formula& g, const std::vector<std::string>& ws) {
  for (const auto& w : ws) {
    INFO(print(f), "  vs  ", print(g), "  on ", w);
    REQUIRE(oracle::holds_all(f, w) == oracle::holds_all(g, w));
  }
}

std::vector<std::string> random_words(gen::FormulaGen& g, int count, int lo, int hi) {
  std::vector<std::string> out;
  for (int n = 0; n < count; ++n) out.push_back(g.word(lo, hi));
  return out;
}

const std::vector<std::string>& small_ab() {
  static const auto ws = oracle::words("ab", 1, 6);
  return ws;
}

}  // namespace

TEST_CASE("desugar examples") {
  Formula all = parse_formula("#[Q(a)] > 1");
  Formula d = desugar(all);
  CHECK((features(d) & (kCountSugar | kIte | kLogicSugar)) == 0);
  CHECK(depth(d) == 1);
  require_same_positions(all, d, small_ab());

  Formula with_ite = parse_formula("(Q(a) ? #<[Q(b)] : 2) + #<[Q(a)] >= 3");
  Formula e = eliminate_ite(with_ite);
  CHECK((features(e) & kIte) == 0);
  CHECK(depth(e) == depth(with_ite));
  require_same_positions(with_ite, e, small_ab());

  Formula plain = parse_formula("#<[Q(a)] < #<[Q(b)] && !Q(a)");
  CHECK(structurally_equal(desugar(plain), plain));
}

TEST_CASE("minimal basis examples") {
  CHECK(print(normalize_to_minimal_basis(parse_formula("#<[Q(a)] = #<[Q(b)]"))) ==
        print(parse_formula("!(#<[Q(a)] < #<[Q(b)]) && !(#<[Q(b)] < #<[Q(a)])")));
  CHECK(print(normalize_to_minimal_basis(parse_formula("Q(a) || Q(b)"))) == "!(!Q(a) && !Q(b))");
}

TEST_CASE("property: desugar and the minimal basis preserve meaning and depth") {
  gen::Options opt;
  opt.right = opt.strict = opt.ite = opt.prev = opt.mod = true;
  gen::FormulaGen g(opt, 101);
  const auto longer = random_words(g, 40, 7, 30);
  for (int n = 0; n < 500; ++n) {
    Formula f = g.formula(static_cast<int>(g.rng().below(3)));
    Formula m = normalize_to_minimal_basis(f);
    const std::string text = print(m);
    for (const char* op : {"||", " <= ", " > ", " >= ", " = ", " != "}) REQUIRE(text.find(op) == std::string::npos);
    REQUIRE(depth(m) == depth(f));
    Formula d = desugar(f);
    REQUIRE((features(d) & (kLogicSugar | kCountSugar | kIte)) == 0);
    REQUIRE(depth(d) == depth(f));
    std::vector<std::string> ws(longer);
    for (int k = 0; k < 20; ++k) ws.push_back(g.word(1, 6));
    require_same_positions(f, m, ws);
    require_same_positions(f, d, ws);
  }
}

TEST_CASE("property: desugar is exact on all short words") {
  gen::Options opt;
  opt.right = opt.strict = opt.ite = true;
  gen::FormulaGen g(opt, 5150);
  for (int n = 0; n < 40; ++n) {
    Formula f = g.formula(2);
    Formula d = desugar(f);
    REQUIRE(depth(d) == depth(f));
    require_same_positions(f, d, small_ab());
  }
}

TEST_CASE("Y-normal form examples") {
  Alphabet ab("ab");
  Formula f = y_normal_form(parse_formula("Y(Q(a) && Q(b))"), ab);
  CHECK(is_y_normal_form(f));
  require_same_positions(parse_formula("Y(Q(a) && Q(b))"), f, small_ab());

  Formula m = parse_formula("Y(MOD(2,1))");
  CHECK(structurally_equal(y_normal_form(m, ab), m));

  Formula neg = parse_formula("Y(!Q(a))");
  Formula n = y_normal_form(neg, ab);
  CHECK(is_y_normal_form(n));
  CHECK_FALSE(is_y_normal_form(neg));
  // Position 1 is where an unguarded push would go wrong.
  CHECK_FALSE(eval_formula(n, "b", 1));
  CHECK_FALSE(eval_formula(n, "ab", 2));
  CHECK(eval_formula(n, "ba", 2));
  require_same_positions(neg, n, small_ab());
}

TEST_CASE("property: Y-normal form is exhaustively equivalent and keeps depth") {
  gen::Options opt;
  opt.prev = opt.mod = opt.ite = opt.strict = true;
  gen::FormulaGen g(opt, 4242);
  Alphabet ab("ab");
  int with_prev = 0;
  for (int n = 0; n < 300; ++n) {
    Formula f = g.formula(static_cast<int>(g.rng().below(3)));
    Formula y = y_normal_form(f, ab);
    with_prev += prev_depth(f) > 0;
    INFO(print(f));
    REQUIRE(is_y_normal_form(y));
    REQUIRE(depth(y) == depth(f));
    require_same_positions(f, y, small_ab());
  }
  CHECK(with_prev > 50);
}

namespace {

void check_reduction(const Formula& f, int max_len) {
  Alphabet abe("abe");
  NeutralReduction r = neutral_letter_reduce(f, 'e', abe);
  INFO(print(f), "  x = ", r.padding);
  std::int64_t expect_x = 1;
  for (auto m : moduli(f)) expect_x = std::lcm(expect_x, m);
  expect_x *= prev_depth(f) + 1;
  REQUIRE(r.padding == expect_x);
  REQUIRE((features(r.reduced) & (kPrev | kMod)) == 0);
  REQUIRE(mentioned_symbols(r.reduced).find('e') == std::string::npos);
  REQUIRE(depth(r.reduced) == depth(f));
  for (const auto& w : oracle::words("ab", 1, max_len)) {
    std::string padded = neutral_pad(w, 'e', r.padding);
    auto big = oracle::holds_all(f, padded);
    auto small = oracle::holds_all(r.reduced, w);
    INFO("w = ", w);
    for (std::size_t i = 1; i <= w.size(); ++i)
      REQUIRE(small[i - 1] == big[i * static_cast<std::size_t>(r.padding) + r.padding - 1]);
  }
}

}  // namespace

TEST_CASE("neutral padding layout") {
  CHECK(neutral_pad("ab", 'e', 1) == "eab");
  CHECK(neutral_pad("ab", 'e', 3) == "eeeaeebee");
}

TEST_CASE("neutral letter reduction examples") {
  check_reduction(parse_formula("Q(a)"), 5);
  check_reduction(parse_formula("MOD(2,0)"), 5);
  check_reduction(parse_formula("#<[Q(e)] >= 3"), 5);
  check_reduction(parse_formula("Y(Q(a)) && #<[Y(Q(e))] > #<[Q(b)]"), 5);
  NeutralReduction m = neutral_letter_reduce(parse_formula("MOD(2,0)"), 'e', Alphabet("abe"));
  CHECK(simplify(m.reduced)->kind == FormulaKind::Const);
  CHECK_THROWS_AS(neutral_letter_reduce(parse_formula("#>[Q(a)] > 0"), 'e', Alphabet("abe")), DomainError);
  CHECK_THROWS_AS(neutral_letter_reduce(parse_formula("Q(a)"), 'e', Alphabet("ab")), DomainError);
}

TEST_CASE("property: neutral letter reduction agrees on padded words") {
  gen::Options opt;
  opt.sigma = "abe";
  opt.prev = opt.mod = true;
  opt.ite = true;
  gen::FormulaGen g(opt, 999);
  for (int n = 0; n < 120; ++n) check_reduction(g.formula(static_cast<int>(g.rng().below(3)), 3), 5);
}

TEST_CASE("simplify folds constants without changing meaning") {
  CHECK(print(simplify(parse_formula("TRUE && Q(a)"))) == "Q(a)");
  CHECK(simplify(parse_formula("1 + 1 < 3"))->value);
  gen::Options opt;
  opt.right = opt.ite = true;
  gen::FormulaGen g(opt, 31);
  for (int n = 0; n < 200; ++n) {
    Formula f = g.formula(2);
    Formula s = simplify(f);
    REQUIRE(depth(s) <= depth(f));
    require_same_positions(f, s, random_words(g, 10, 1, 9));
  }
}

TEST_CASE("linear forms merge repeated atoms") {
  LinearForm l = linear_form(parse_formula("#<[Q(a)] + 2 * #<[Q(a)] - #<[Q(b)] + 4 < 0")->lhs);
  REQUIRE(l.coeffs.size() == 2);
  CHECK(l.coeffs[0].second == 3);
  CHECK(l.coeffs[1].second == -1);
  CHECK(l.constant == 4);
}
