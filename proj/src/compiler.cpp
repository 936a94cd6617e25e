#include "craspkit/compiler.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "craspkit/error.hpp"
#include "craspkit/eval.hpp"
#include "craspkit/syntax.hpp"
#include "craspkit/transforms.hpp"
#include "json.hpp"

namespace craspkit {

namespace {

// Truth values travel as the significand 1 (the grid step), so every weight
// used below is a multiple of the real number 1 and stays representable as
// long as 1 itself is.

struct Node {
  Formula f;
  int depth = 0;
  std::vector<int> kids;                           // Boolean children
  std::vector<std::pair<int, std::int64_t>> atoms;  // comparison: sum lambda * #<[atom] >= threshold
  std::int64_t threshold = 0;
  int last_read = -1;  // last layer whose input h^(l-1) must hold this node
  int height = 0;      // Boolean height inside its own layer
};

class Planner {
 public:
  std::vector<Node> nodes;

  int visit(const Formula& f) {
    auto it = ids_.find(f);
    if (it != ids_.end()) return it->second;
    Node n;
    n.f = f;
    n.depth = depth(f);
    if (n.depth > 0) {
      switch (f->kind) {
        case FormulaKind::Not:
          n.kids = {visit(f->a)};
          break;
        case FormulaKind::And:
          n.kids = {visit(f->a), visit(f->b)};
          break;
        case FormulaKind::Compare:
          plan_comparison(f, n);
          break;
        default:
          throw Error("compile: unexpected node after desugaring");
      }
    }
    int id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(n));
    ids_.emplace(f, id);
    return id;
  }

 private:
  std::unordered_map<Formula, int, FormulaHash, FormulaEq> ids_;

  // lhs < rhs  <=>  (rhs - lhs) >= 1.
  void plan_comparison(const Formula& f, Node& n) {
    if (f->op != CmpOp::Lt) throw Error("compile: expected a strict comparison after desugaring");
    LinearForm r = linear_form(f->rhs), l = linear_form(f->lhs);
    std::map<int, std::int64_t> coef;
    auto add = [&](const LinearForm& lf, std::int64_t sign) {
      for (const auto& [atom, c] : lf.coeffs) {
        if (atom->kind != TermKind::CountLeft) throw Error("compile: unexpected count kind after desugaring");
        if (c == 0) continue;
        coef[visit(atom->body)] += sign * c;
      }
    };
    add(r, 1);
    add(l, -1);
    for (auto [id, c] : coef)
      if (c != 0) n.atoms.emplace_back(id, c);
    n.threshold = 1 - (r.constant - l.constant);
  }
};

struct AffineBuilder {
  int in, out;
  std::vector<std::vector<std::int64_t>> m;
  std::vector<std::int64_t> b;
  AffineBuilder(int in_, int out_) : in(in_), out(out_), m(out_, std::vector<std::int64_t>(in_, 0)), b(out_, 0) {}
  void add(int row, int col, std::int64_t w) { m[row][col] += w; }
  AffineStage stage() const { return AffineStage{m, b}; }
};

std::string label_of(const Formula& f) { return print(f); }

}  // namespace

Transformer compile(const Formula& f, const Alphabet& alphabet, Precision prec, CompilationUnit* unit) {
  if (f->features & (kRightCount | kPrev | kMod))
    throw DomainError("compile: only past counts are supported (no future counts, Y or MOD); formula uses " +
                      describe_features(f->features & (kRightCount | kPrev | kMod)));
  for (char c : mentioned_symbols(f))
    if (!alphabet.contains(c)) throw DomainError(std::string("compile: symbol '") + c + "' not in alphabet");
  if (prec.s < 1 || prec.s > prec.p - 2)
    throw DomainError("compile: precision needs 1 <= s <= p-2 (got p=" + std::to_string(prec.p) +
                      ", s=" + std::to_string(prec.s) + ")");

  const Formula g = desugar(f);
  const int L = depth(g);
  if (L != depth(f)) throw Error("compile: desugaring changed the depth");

  Planner plan;
  const int root = plan.visit(g);
  auto& nodes = plan.nodes;

  // Reads: comparison atoms at the comparison's layer, lower-depth Boolean
  // children at the parent's layer, the root after the last layer.
  for (auto& n : nodes) {
    for (auto [id, c] : n.atoms) nodes[id].last_read = std::max(nodes[id].last_read, n.depth);
    for (int k : n.kids)
      if (nodes[k].depth < n.depth) nodes[k].last_read = std::max(nodes[k].last_read, n.depth);
  }
  nodes[root].last_read = L + 1;
  for (auto& n : nodes) {
    if (n.depth == 0 || !n.atoms.empty()) continue;
    for (int k : n.kids)
      if (nodes[k].depth == n.depth) n.height = std::max(n.height, nodes[k].height);
    n.height += 1;
  }

  // Slot layouts; -1 stands for the BOS flag.
  constexpr int kBosSlot = -1;
  std::vector<std::vector<int>> layout(L + 1);
  for (int l = 0; l <= L; ++l) {
    if (l < L) layout[l].push_back(kBosSlot);
    for (int id = 0; id < static_cast<int>(nodes.size()); ++id)
      if (nodes[id].depth <= l && l < nodes[id].last_read && !(nodes[id].depth == 0 && nodes[id].last_read < 0))
        layout[l].push_back(id);
  }
  auto slot_in = [&](int l, int id) {
    const auto& lay = layout[l];
    auto it = std::find(lay.begin(), lay.end(), id);
    if (it == lay.end()) throw Error("compile: internal layout error");
    return static_cast<int>(it - lay.begin());
  };

  std::vector<std::vector<int>> cmps(L + 1), bools(L + 1);
  for (int id = 0; id < static_cast<int>(nodes.size()); ++id) {
    const Node& n = nodes[id];
    if (n.depth == 0) continue;
    (n.kids.empty() ? cmps : bools)[n.depth].push_back(id);
  }

  int d = 1;
  std::vector<std::vector<int>> scratch(L + 1);
  for (int l = 0; l <= L; ++l) d = std::max<int>(d, static_cast<int>(layout[l].size()));
  for (int l = 1; l <= L; ++l) {
    int next = static_cast<int>(layout[l - 1].size());
    for (std::size_t k = 0; k < cmps[l].size(); ++k) {
      // In the last layer the BOS flag is no longer needed after W_V, and it
      // is zero at every non-BOS position, so it can hold an attention output.
      if (l == L && k == 0) scratch[l].push_back(slot_in(l - 1, kBosSlot));
      else scratch[l].push_back(next++);
    }
    d = std::max(d, next);
  }

  const std::int64_t one = prec.unit();
  auto need = [&](i128 w, const std::string& what) {
    if (!prec.contains(w))
      throw DomainError("compile: " + what + " not representable at p=" + std::to_string(prec.p) +
                        ", s=" + std::to_string(prec.s));
    return static_cast<std::int64_t>(w);
  };

  Transformer t;
  t.alphabet = alphabet;
  t.precision = prec;
  t.d = d;
  for (char c : alphabet.symbols()) {
    FixedVec e(d, 0);
    for (std::size_t k = 0; k < layout[0].size(); ++k) {
      int id = layout[0][k];
      if (id != kBosSlot) e[k] = eval_formula(nodes[id].f, std::string(1, c), 1) ? 1 : 0;
    }
    t.embedding[c] = e;
  }
  {
    FixedVec e(d, 0);
    if (L > 0) e[slot_in(0, kBosSlot)] = 1;
    t.embedding[t.bos] = e;
  }

  for (int l = 1; l <= L; ++l) {
    const bool mask = l < L;
    const int bos_in = slot_in(l - 1, kBosSlot);
    Layer layer;
    layer.wq = LocalMap::zero(d, 1);
    layer.wk = LocalMap::zero(d, 1);

    AffineBuilder wv(d, d);
    for (std::size_t k = 0; k < cmps[l].size(); ++k) {
      const Node& n = nodes[cmps[l][k]];
      const int row = scratch[l][k];
      i128 pos = 0, negs = 0;
      for (auto [id, lambda] : n.atoms) {
        wv.add(row, slot_in(l - 1, id), need(static_cast<i128>(lambda) * one, "coefficient " + std::to_string(lambda)));
        (lambda > 0 ? pos : negs) += lambda;
      }
      if (n.threshold != 0)
        wv.add(row, bos_in, need(-static_cast<i128>(n.threshold) * one, "threshold " + std::to_string(n.threshold)));
      need(pos, "sum of positive coefficients");
      need(negs, "sum of negative coefficients");
      need(-static_cast<i128>(n.threshold), "threshold");
    }
    layer.wv = LocalMap({wv.stage()});

    // f: widen to [r | per-comparison temp | per-node temp], threshold,
    // Boolean levels, then pack back to d slots.
    const std::vector<int>& cs = cmps[l];
    std::vector<int> computed = cs;
    computed.insert(computed.end(), bools[l].begin(), bools[l].end());
    const int nc = static_cast<int>(cs.size());
    const int W = d + nc + static_cast<int>(computed.size());
    std::unordered_map<int, int> temp;
    for (std::size_t k = 0; k < computed.size(); ++k) temp[computed[k]] = d + nc + static_cast<int>(k);
    auto loc = [&](int id) { return nodes[id].depth < l ? slot_in(l - 1, id) : temp.at(id); };
    auto carry = [&](AffineBuilder& a, int width) {
      for (int x = 0; x < width; ++x) a.add(x, x, one);
    };

    std::vector<Stage> stages;
    AffineBuilder s1(d, W);
    carry(s1, d);
    for (int k = 0; k < nc; ++k) s1.add(d + k, scratch[l][k], -one);
    stages.emplace_back(s1.stage());
    stages.emplace_back(ReluStage{});

    if (nc > 0) {
      AffineBuilder s2(W, W);
      for (int x = 0; x < W; ++x)
        if (x < d + nc || std::find(cs.begin(), cs.end(), computed[x - d - nc]) == cs.end()) s2.add(x, x, one);
      for (int k = 0; k < nc; ++k) {
        int row = temp.at(cs[k]);
        s2.b[row] = 1;
        s2.add(row, d + k, -one);
        if (mask) s2.add(row, bos_in, -one);
      }
      stages.emplace_back(s2.stage());
      stages.emplace_back(ReluStage{});
    }

    int max_height = 0;
    for (int id : bools[l]) max_height = std::max(max_height, nodes[id].height);
    for (int h = 1; h <= max_height; ++h) {
      AffineBuilder sb(W, W);
      std::vector<bool> fresh(W, false);
      for (int id : bools[l])
        if (nodes[id].height == h) fresh[temp.at(id)] = true;
      for (int x = 0; x < W; ++x)
        if (!fresh[x]) sb.add(x, x, one);
      for (int id : bools[l]) {
        const Node& n = nodes[id];
        if (n.height != h) continue;
        int row = temp.at(id);
        if (n.kids.size() == 1) {
          sb.b[row] = 1;
          sb.add(row, loc(n.kids[0]), -one);
          if (mask) sb.add(row, bos_in, -one);
        } else if (n.kids[0] == n.kids[1]) {
          sb.add(row, loc(n.kids[0]), one);
        } else {
          sb.b[row] = -1;
          sb.add(row, loc(n.kids[0]), one);
          sb.add(row, loc(n.kids[1]), one);
        }
      }
      stages.emplace_back(sb.stage());
      stages.emplace_back(ReluStage{});
    }

    AffineBuilder pack(W, d);
    for (std::size_t k = 0; k < layout[l].size(); ++k) {
      int id = layout[l][k];
      pack.add(static_cast<int>(k), id == kBosSlot ? bos_in : loc(id), one);
    }
    stages.emplace_back(pack.stage());
    layer.f = LocalMap(std::move(stages));
    t.layers.push_back(std::move(layer));
  }

  AffineBuilder out(d, 1);
  out.add(0, slot_in(L, root), one);
  t.w_out = LocalMap({out.stage()});

  nlohmann::ordered_json meta;
  nlohmann::ordered_json layouts = nlohmann::ordered_json::array();
  CompilationUnit cu;
  cu.source = g;
  cu.depth = L;
  for (int l = 0; l <= L; ++l) {
    std::vector<std::string> labels;
    for (int id : layout[l]) labels.push_back(id == kBosSlot ? "BOS" : label_of(nodes[id].f));
    layouts.push_back(labels);
    cu.layouts.push_back(std::move(labels));
  }
  for (int l = 1; l <= L; ++l) cu.scratch.push_back(scratch[l]);
  meta["compiled_from"] = print(f);
  meta["layouts"] = layouts;
  meta["scratch"] = cu.scratch;
  t.meta = meta.dump();
  t.finalize();
  if (unit) *unit = std::move(cu);
  return t;
}

}  // namespace craspkit
