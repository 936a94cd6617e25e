#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "craspkit/equiv.hpp"
#include "craspkit/formula.hpp"
#include "craspkit/random.hpp"

namespace craspkit {

// Explicit deterministic automaton with a total transition table.
class Dfa {
 public:
  Dfa(Alphabet alphabet, int states, int start, std::vector<std::vector<int>> delta, std::vector<bool> accepting);

  const Alphabet& alphabet() const { return alphabet_; }
  int states() const { return static_cast<int>(accepting_.size()); }
  int start() const { return start_; }
  int step(int state, char c) const;
  bool accepting(int state) const { return accepting_[static_cast<std::size_t>(state)]; }
  bool accepts(std::string_view w) const;

 private:
  Alphabet alphabet_;
  int start_;
  std::vector<std::vector<int>> delta_;
  std::vector<bool> accepting_;
};

struct BlockLanguage {
  enum class Variant { L, A, B, L2, LTilde };
  Variant variant = Variant::L;
  int k = 1;

  Alphabet alphabet() const;
  std::string label() const;
};

// Block-counting automaton for L_k (and L2_k, L~_k), subsequence automaton
// for A_k and B_k.
Dfa block_dfa(const BlockLanguage& lang);
// Automaton for the J-expression over the given alphabet.
Dfa subsequence_dfa(std::string_view pattern, const Alphabet& alphabet);
bool member(const BlockLanguage& lang, std::string_view w);

// a b a b ... of length k, or b a b ... when starting with b.
std::string alternating(int k, char first);

Formula jexpr_formula(std::string_view symbols);
Formula jexpr_formula_bidirectional(std::string_view symbols);
Formula altplus_formula(int k, const Alphabet& alphabet = Alphabet("ab"));
Formula dyck_formula();
Formula prediction_formula(int k);

class DfaAcceptor : public Acceptor {
 public:
  DfaAcceptor(Dfa dfa, std::string label) : dfa_(std::move(dfa)), label_(std::move(label)) {}
  std::string name() const override { return label_; }
  bool accepts(std::string_view w) const override { return dfa_.accepts(w); }

 private:
  Dfa dfa_;
  std::string label_;
};

// Balanced parentheses over "()" by a depth counter.
bool dyck_member(std::string_view w);
class DyckAcceptor : public Acceptor {
 public:
  std::string name() const override { return "dyck"; }
  bool accepts(std::string_view w) const override { return dyck_member(w); }
};

struct DatasetRecord {
  int k = 0;
  std::string source;
  std::string target;
};

// Prefix labels for w (without BOS): label i is 1 iff w[1:i] is in L_k.
std::string prefix_labels(int k, std::string_view w);
// A uniform L_k string of length n: the k-1 switch points are a uniform
// subset of the n-1 gaps.  Returns the sorted gap indices through `gaps`.
std::string sample_block_string(int k, int n, SplitMix64& rng, std::vector<int>* gaps = nullptr);
std::vector<DatasetRecord> sample_dataset(int k, int length_lo, int length_hi, int count, std::uint64_t seed);
std::string to_jsonl(const DatasetRecord& r);

}  // namespace craspkit
