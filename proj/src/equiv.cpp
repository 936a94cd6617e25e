#include "craspkit/equiv.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include "craspkit/error.hpp"
#include "craspkit/eval.hpp"
#include "craspkit/random.hpp"

namespace craspkit {
namespace {

std::string word_at(std::uint64_t index, int len, const std::string& symbols) {
  std::string w(static_cast<std::size_t>(len), symbols[0]);
  const std::uint64_t base = symbols.size();
  for (int pos = len - 1; pos >= 0; --pos) {
    w[static_cast<std::size_t>(pos)] = symbols[index % base];
    index /= base;
  }
  return w;
}

// Index of the first disagreement in [0, count), or count if none.
template <class WordFn>
std::uint64_t first_disagreement(const Acceptor& a, const Acceptor& b, std::uint64_t count, WordFn word,
                                 unsigned threads) {
  std::atomic<std::uint64_t> best{count};
  std::atomic<bool> failed{false};
  std::string error;
  auto worker = [&](unsigned id) {
    try {
      for (std::uint64_t i = id; i < count; i += threads) {
        if (i >= best.load(std::memory_order_relaxed)) return;
        std::string w = word(i);
        if (a.accepts(w) != b.accepts(w)) {
          std::uint64_t cur = best.load();
          while (i < cur && !best.compare_exchange_weak(cur, i)) {
          }
          return;
        }
      }
    } catch (const std::exception& e) {
      if (!failed.exchange(true)) error = e.what();
      best = 0;
    }
  };
  if (threads <= 1) {
    threads = 1;
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  if (failed) throw DomainError(error);
  return best.load();
}

}  // namespace

FormulaAcceptor::FormulaAcceptor(Formula f, std::string label)
    : formula_(std::move(f)), program_(std::make_shared<const Program>(formula_)), label_(std::move(label)) {}

bool FormulaAcceptor::accepts(std::string_view w) const {
  if (w.empty()) throw DomainError("the empty word has no positions");
  return program_->run(w).back() != 0;
}

unsigned default_threads() {
  if (const char* env = std::getenv("CRASPKIT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

EquivReport check_equiv(const Acceptor& a, const Acceptor& b, const Alphabet& alphabet, int max_len,
                        std::uint64_t samples, int max_random_len, std::uint64_t seed, unsigned threads) {
  if (threads == 0) threads = default_threads();
  EquivReport report;
  const std::string& symbols = alphabet.symbols();
  auto found = [&](const std::string& w) {
    report.equivalent = false;
    report.counterexample = w;
    report.verdict_a = a.accepts(w);
    report.verdict_b = b.accepts(w);
  };
  for (int len = 1; len <= max_len; ++len) {
    std::uint64_t count = 1;
    for (int i = 0; i < len; ++i) count *= symbols.size();
    auto make = [&](std::uint64_t i) { return word_at(i, len, symbols); };
    std::uint64_t bad = first_disagreement(a, b, count, make, threads);
    if (bad < count) {
      report.exhaustive_words += bad + 1;
      found(make(bad));
      return report;
    }
    report.exhaustive_words += count;
  }
  if (samples == 0 || max_random_len < 1) return report;
  SplitMix64 rng(seed);
  std::vector<std::string> words;
  words.reserve(samples);
  for (std::uint64_t i = 0; i < samples; ++i) {
    std::size_t len = static_cast<std::size_t>(rng.between(1, max_random_len));
    std::string w(len, ' ');
    for (auto& c : w) c = symbols[rng.below(symbols.size())];
    words.push_back(std::move(w));
  }
  std::uint64_t bad = first_disagreement(a, b, samples, [&](std::uint64_t i) { return words[i]; }, threads);
  if (bad < samples) {
    report.random_words = bad + 1;
    found(words[bad]);
    return report;
  }
  report.random_words = samples;
  return report;
}

}  // namespace craspkit
