#pragma once

// Random transformers for property tests.

#include "craspkit/random.hpp"
#include "craspkit/transformer.hpp"

namespace gen {

using craspkit::FixedVec;
using craspkit::LocalMap;
using craspkit::PositionalEncoding;
using craspkit::Precision;
using craspkit::SplitMix64;
using craspkit::Transformer;

class ModelGen {
 public:
  explicit ModelGen(std::uint64_t seed) : rng_(seed) {}

  struct Options {
    Precision precision{8, 3};
    std::string sigma = "ab";
    int max_layers = 2;
    bool positional = true;
    std::int64_t weight_range = 0;  // 0 means the whole of F
  };

  Transformer model(const Options& opt) {
    Transformer t;
    t.precision = opt.precision;
    t.alphabet = craspkit::Alphabet(opt.sigma);
    auto kind = PositionalEncoding::Kind::None;
    if (opt.positional) kind = static_cast<PositionalEncoding::Kind>(rng_.below(4));
    t.pe.kind = kind;
    const int pairs = static_cast<int>(rng_.between(1, 2));
    t.d = kind == PositionalEncoding::Kind::Sinusoidal ? 2 * pairs : static_cast<int>(rng_.between(1, 3));
    if (kind == PositionalEncoding::Kind::Sinusoidal || kind == PositionalEncoding::Kind::RoPE)
      for (int c = 0; c < pairs; ++c) t.pe.angles.pairs.emplace_back(rng_.between(1, 6), rng_.between(0, 5));
    if (kind == PositionalEncoding::Kind::ALiBi) t.pe.alibi_slope = rng_.between(0, t.precision.unit());
    range_ = opt.weight_range > 0 ? opt.weight_range : t.precision.max_m();
    for (char c : opt.sigma + std::string(1, t.bos)) t.embedding[c] = vec(t.d);
    const int layers = static_cast<int>(rng_.between(1, opt.max_layers));
    const int qw = kind == PositionalEncoding::Kind::RoPE ? 2 * pairs : static_cast<int>(rng_.between(1, 3));
    for (int l = 0; l < layers; ++l)
      t.layers.push_back({local(t.d, qw), local(t.d, qw), local(t.d, t.d), local(t.d, t.d)});
    t.w_out = local(t.d, 1);
    t.finalize();
    return t;
  }

  std::string word(const std::string& sigma, int lo, int hi) {
    std::string w(1, craspkit::kBos);
    auto n = rng_.between(lo, hi);
    for (std::int64_t i = 0; i < n; ++i) w += sigma[rng_.below(sigma.size())];
    return w;
  }

  SplitMix64& rng() { return rng_; }

 private:
  SplitMix64 rng_;
  std::int64_t range_ = 1;

  FixedVec vec(int n) {
    FixedVec v;
    for (int i = 0; i < n; ++i) v.push_back(rng_.between(-range_ - 1, range_));
    return v;
  }

  craspkit::AffineStage affine(int in, int out) {
    craspkit::AffineStage a;
    for (int r = 0; r < out; ++r) a.m.push_back(vec(in));
    a.b = vec(out);
    return a;
  }

  LocalMap local(int in, int out) {
    if (rng_.below(3) == 0) return LocalMap({affine(in, out)});
    const int mid = static_cast<int>(rng_.between(1, 3));
    return LocalMap({affine(in, mid), craspkit::ReluStage{}, affine(mid, out)});
  }
};

}  // namespace gen
