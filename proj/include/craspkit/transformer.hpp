#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "craspkit/equiv.hpp"
#include "craspkit/fixed.hpp"
#include "craspkit/formula.hpp"

namespace craspkit {

// Vectors over F are stored as their significands.
using FixedVec = std::vector<std::int64_t>;

struct AffineStage {
  std::vector<std::vector<std::int64_t>> m;  // rows = outputs
  std::vector<std::int64_t> b;
};
struct ReluStage {};
struct TableStage {
  std::map<FixedVec, FixedVec> entries;
};
using Stage = std::variant<AffineStage, ReluStage, TableStage>;

// A position-wise map F^n -> F^m: a chain of exact affine maps (rounded once
// per output), ReLUs and explicit lookup tables.  No stages = identity.
class LocalMap {
 public:
  LocalMap() = default;
  explicit LocalMap(std::vector<Stage> stages);

  const std::vector<Stage>& stages() const { return stages_; }
  FixedVec apply(const FixedVec& x, Precision prec) const;
  // Checks widths and ranges; returns the output width for input width n.
  int check(int n, Precision prec) const;

  static LocalMap zero(int in, int out);
  static LocalMap affine(std::vector<std::vector<std::int64_t>> m, std::vector<std::int64_t> b);

 private:
  struct Sparse {
    std::vector<std::vector<std::pair<int, std::int64_t>>> rows;
  };
  std::vector<Stage> stages_;
  std::vector<Sparse> sparse_;  // one per stage; empty for non-affine stages
};

// theta_c = 2 pi r_c / m_c for each coordinate pair.
struct AngleSpec {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (m_c, r_c)
};

struct PositionalEncoding {
  enum class Kind { None, Sinusoidal, RoPE, ALiBi };
  Kind kind = Kind::None;
  AngleSpec angles;
  std::int64_t alibi_slope = 0;  // significand of a
};
const char* to_string(PositionalEncoding::Kind k);

struct Layer {
  LocalMap wq, wk, wv, f;
};

// Rounded trigonometric tables for each angle pair, indexed by residue.
struct AngleTables {
  struct Pair {
    std::int64_t m = 1;
    std::vector<std::int64_t> cos, sin, neg_sin;
  };
  std::vector<Pair> pairs;
};

class Transformer {
 public:
  Alphabet alphabet;  // without BOS
  char bos = kBos;
  Precision precision;
  int d = 1;
  std::map<char, FixedVec> embedding;  // includes BOS
  std::vector<Layer> layers;
  LocalMap w_out;
  PositionalEncoding pe;
  std::string meta;  // free-form JSON text, kept verbatim

  // Validates all shapes and ranges and precomputes PE tables.  Must be
  // called after construction or modification and before any forward pass.
  void finalize();
  int depth() const { return static_cast<int>(layers.size()); }

  // round(e^s * v) with a shared cache; s and v are significands.
  std::int64_t exp_times(std::int64_t s, std::int64_t v) const;
  const AngleTables& angle_tables() const { return *tables_; }

 private:
  std::shared_ptr<const AngleTables> tables_ = std::make_shared<AngleTables>();
  struct PairHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& p) const {
      return std::hash<std::int64_t>()(p.first * 1000003 + p.second);
    }
  };
  mutable std::shared_ptr<std::shared_mutex> cache_mutex_ = std::make_shared<std::shared_mutex>();
  mutable std::shared_ptr<std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::int64_t, PairHash>> cache_ =
      std::make_shared<std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::int64_t, PairHash>>();
};

// Score s_ij after positional handling: exact then rounded once.
std::int64_t apply_pe_scores(const Transformer& t, const FixedVec& q, const FixedVec& k, std::int64_t i,
                             std::int64_t j);
// Smallest distance beyond which every ALiBi weight rounds to zero, for
// scores bounded by the maximum of F (valid when that bound holds).
std::int64_t alibi_window(Precision prec, std::int64_t slope);

struct Activations {
  // h[l][i] for l = 0..L; q, k, v, c indexed [l-1][i]; scores[l-1][i][j] for j <= i.
  std::vector<std::vector<FixedVec>> h, q, k, v, c;
  std::vector<std::vector<std::vector<std::int64_t>>> scores;
  std::vector<std::int64_t> outputs;  // W_out at every position
};

// Incremental forward pass: pushes one symbol at a time (the first must be
// BOS) and returns the output at that position.  Activations at position i
// depend only on the first i symbols.
class ForwardStream {
 public:
  explicit ForwardStream(const Transformer& t, bool keep_history = false);

  std::int64_t push(char c);
  std::int64_t position() const { return position_; }
  // Activations of the most recent position.
  const std::vector<FixedVec>& h() const { return h_; }
  const std::vector<FixedVec>& q() const { return q_; }
  const std::vector<FixedVec>& k() const { return k_; }
  const std::vector<FixedVec>& v() const { return v_; }
  const std::vector<FixedVec>& c() const { return c_; }
  // Scores of the most recent position against all earlier ones (only with
  // keep_history).
  const std::vector<std::vector<std::int64_t>>& scores() const { return scores_; }

 private:
  struct VecHash {
    std::size_t operator()(const FixedVec& v) const;
  };
  struct Recent {
    FixedVec k, v;
    std::int64_t pos;
  };
  struct LayerState {
    std::unordered_map<FixedVec, std::int64_t, VecHash> histogram;  // k ++ v [++ residue]
    std::vector<i128> value_sum;
    std::vector<std::pair<FixedVec, FixedVec>> history;  // (k, v) per position
    // ALiBi: positions still close enough for the score to depend on q, k,
    // and a histogram of values for positions whose score is pinned at min.
    std::deque<Recent> recent;
    std::map<FixedVec, std::int64_t> far;
  };
  std::int64_t exp_weight(std::int64_t score) const;
  const Transformer& t_;
  bool keep_history_;
  bool positional_scores_;
  std::int64_t position_ = 0;
  std::int64_t residue_period_ = 1;
  std::int64_t alibi_window_ = 0;
  std::vector<LayerState> layers_;
  std::vector<FixedVec> h_, q_, k_, v_, c_;
  std::vector<std::vector<std::int64_t>> scores_;
};

Activations forward(const Transformer& t, std::string_view w);
std::int64_t output_score(const Transformer& t, std::string_view w);
bool accepts(const Transformer& t, std::string_view w);

// Accepts w iff the transformer accepts BOS w.
class TransformerAcceptor : public Acceptor {
 public:
  explicit TransformerAcceptor(std::shared_ptr<const Transformer> t, std::string label = "model")
      : t_(std::move(t)), label_(std::move(label)) {}
  std::string name() const override { return label_; }
  bool accepts(std::string_view w) const override;

 private:
  std::shared_ptr<const Transformer> t_;
  std::string label_;
};

}  // namespace craspkit
