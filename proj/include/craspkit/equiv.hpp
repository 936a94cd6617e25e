#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "craspkit/formula.hpp"

namespace craspkit {

class Program;

// Anything that accepts or rejects non-empty words.  Implementations must be
// safe to call concurrently.
class Acceptor {
 public:
  virtual ~Acceptor() = default;
  virtual std::string name() const = 0;
  virtual bool accepts(std::string_view w) const = 0;
};

class FormulaAcceptor : public Acceptor {
 public:
  explicit FormulaAcceptor(Formula f, std::string label = "formula");
  std::string name() const override { return label_; }
  bool accepts(std::string_view w) const override;

 private:
  Formula formula_;
  std::shared_ptr<const Program> program_;
  std::string label_;
};

struct EquivReport {
  bool equivalent = true;
  std::uint64_t exhaustive_words = 0;
  std::uint64_t random_words = 0;
  std::optional<std::string> counterexample;
  bool verdict_a = false;
  bool verdict_b = false;
};

// Worker count from CRASPKIT_THREADS, else the hardware concurrency.
unsigned default_threads();

// All words of length 1..max_len (in length-then-alphabet order), then
// `samples` random words of length 1..max_random_len.  The reported
// counterexample is the first disagreement in that order.
EquivReport check_equiv(const Acceptor& a, const Acceptor& b, const Alphabet& alphabet, int max_len,
                        std::uint64_t samples, int max_random_len, std::uint64_t seed, unsigned threads = 0);

}  // namespace craspkit
