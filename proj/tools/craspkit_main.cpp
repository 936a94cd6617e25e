#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "craspkit/compiler.hpp"
#include "craspkit/equiv.hpp"
#include "craspkit/error.hpp"
#include "craspkit/eval.hpp"
#include "craspkit/languages.hpp"
#include "craspkit/maj2.hpp"
#include "craspkit/model_io.hpp"
#include "craspkit/syntax.hpp"
#include "craspkit/transformer.hpp"
#include "craspkit/transforms.hpp"

using namespace craspkit;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitCounterexample = 3;

// File or unreadable-path problems are reported like any other bad input.
std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path);
  out << text;
  if (!out) throw DomainError("write failed: " + path);
}

std::optional<Alphabet> alphabet_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return Alphabet(s);
}

Formula load_formula(const std::string& path, const std::optional<Alphabet>& alphabet = std::nullopt) {
  return parse_formula(read_file(path), alphabet);
}

Precision parse_precision(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--precision", "expected P,S");
  try {
    return Precision(std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1)));
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--precision", "expected P,S with integers");
  }
}

int parse_positive(const std::string& what, const std::string& text) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used == text.size() && v >= 1) return v;
  } catch (const std::logic_error&) {
  }
  throw CLI::ValidationError(what, "expected a positive integer, got '" + text + "'");
}

json features_json(Features f) {
  json out = json::array();
  std::istringstream ss(describe_features(f));
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

void emit(bool as_json, const json& j, const std::string& text) {
  if (as_json) std::cout << j.dump() << "\n";
  else std::cout << text << "\n";
}

// Distinct subformulas and non-constant subterms in evaluation order.
struct TraceRow {
  std::string label;
  bool is_formula;
  Formula f;
  Term t;
};

void collect_rows(const Formula& f, std::vector<TraceRow>& rows, std::unordered_set<std::string>& seen);

void collect_rows(const Term& t, std::vector<TraceRow>& rows, std::unordered_set<std::string>& seen) {
  if (t->body) collect_rows(t->body, rows, seen);
  if (t->a) collect_rows(t->a, rows, seen);
  if (t->b) collect_rows(t->b, rows, seen);
  if (t->kind == TermKind::IntConst) return;
  std::string label = print(t);
  if (seen.insert("t:" + label).second) rows.push_back({label, false, nullptr, t});
}

void collect_rows(const Formula& f, std::vector<TraceRow>& rows, std::unordered_set<std::string>& seen) {
  if (f->a) collect_rows(f->a, rows, seen);
  if (f->b) collect_rows(f->b, rows, seen);
  if (f->lhs) collect_rows(f->lhs, rows, seen);
  if (f->rhs) collect_rows(f->rhs, rows, seen);
  std::string label = print(f);
  if (seen.insert("f:" + label).second) rows.push_back({label, true, f, nullptr});
}

// Acceptor specs: formula:PATH, dfa:altplus:K, dfa:dyck, model:PATH, maj2:PATH.
struct LoadedAcceptor {
  std::unique_ptr<Acceptor> acceptor;
  Alphabet alphabet;
};

LoadedAcceptor load_acceptor(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("acceptor", "expected KIND:ARG, got '" + spec + "'");
  std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  LoadedAcceptor out;
  if (kind == "formula") {
    Formula f = load_formula(arg);
    if (auto syms = mentioned_symbols(f); !syms.empty()) out.alphabet = Alphabet(syms);
    out.acceptor = std::make_unique<FormulaAcceptor>(f, spec);
  } else if (kind == "maj2") {
    Maj2 g = parse_maj2(read_file(arg));
    if (auto syms = mentioned_symbols(g); !syms.empty()) out.alphabet = Alphabet(syms);
    out.acceptor = std::make_unique<Maj2Acceptor>(g, spec);
  } else if (kind == "model") {
    auto t = std::make_shared<const Transformer>(load_model(arg));
    out.alphabet = t->alphabet;
    out.acceptor = std::make_unique<TransformerAcceptor>(t, spec);
  } else if (kind == "dfa") {
    if (arg == "dyck") {
      out.alphabet = Alphabet("()");
      out.acceptor = std::make_unique<DyckAcceptor>();
    } else if (arg.rfind("altplus:", 0) == 0) {
      BlockLanguage lang;
      lang.k = parse_positive("dfa:altplus", arg.substr(8));
      out.alphabet = lang.alphabet();
      out.acceptor = std::make_unique<DfaAcceptor>(block_dfa(lang), spec);
    } else {
      throw CLI::ValidationError("acceptor", "unknown dfa '" + arg + "'");
    }
  } else {
    throw CLI::ValidationError("acceptor", "unknown acceptor kind '" + kind + "'");
  }
  return out;
}

json vec_json(const FixedVec& v) { return json(v); }

json activations_json(const Activations& a) {
  json j;
  auto grid = [](const std::vector<std::vector<FixedVec>>& g) {
    json out = json::array();
    for (const auto& layer : g) {
      json row = json::array();
      for (const auto& v : layer) row.push_back(vec_json(v));
      out.push_back(row);
    }
    return out;
  };
  j["h"] = grid(a.h);
  j["q"] = grid(a.q);
  j["k"] = grid(a.k);
  j["v"] = grid(a.v);
  j["c"] = grid(a.c);
  j["scores"] = a.scores;
  j["outputs"] = a.outputs;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"craspkit: counting temporal logic, fixed-precision transformers and MAJ2"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  bool as_json = false;
  std::uint64_t seed = 0;
  auto add_json = [&](CLI::App* sc) { sc->add_flag("--json", as_json, "Machine-readable output"); };
  auto add_seed = [&](CLI::App* sc) { sc->add_option("--seed", seed, "64-bit seed for all randomness"); };

  std::string formula_path, alphabet_text, word, out_path, in_path, model_path;

  // parse
  auto* c_parse = app.add_subcommand("parse", "Parse a formula and print its canonical form");
  c_parse->add_option("--formula", formula_path, "Formula file")->required();
  c_parse->add_option("--alphabet", alphabet_text, "Restrict symbols to this alphabet");
  add_json(c_parse);

  // eval
  std::int64_t position = 0;
  bool trace = false;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a formula on a word");
  c_eval->add_option("--formula", formula_path, "Formula file")->required();
  c_eval->add_option("--word", word, "Word (no BOS)")->required();
  c_eval->add_option("--position", position, "1-based position (default: last)");
  c_eval->add_option("--alphabet", alphabet_text, "Alphabet for symbol checks");
  c_eval->add_flag("--trace", trace, "Per-position values of every subformula");
  add_json(c_eval);

  // depth
  auto* c_depth = app.add_subcommand("depth", "Print the counting depth of a formula");
  c_depth->add_option("--formula", formula_path, "Formula file")->required();
  add_json(c_depth);

  // normalize
  bool ynf = false, desugar_flag = false, minimal = false;
  std::string neutral_e;
  auto* c_norm = app.add_subcommand("normalize", "Rewrite a formula");
  c_norm->add_option("--formula", formula_path, "Formula file")->required();
  auto* g_norm = c_norm->add_option_group("mode");
  g_norm->add_flag("--ynf", ynf, "Y-normal form");
  g_norm->add_flag("--desugar", desugar_flag, "Remove all sugar");
  g_norm->add_flag("--minimal", minimal, "Rewrite into <, ! and &&");
  g_norm->add_option("--neutral-e", neutral_e, "Neutral-letter reduction with this symbol");
  g_norm->require_option(1);
  c_norm->add_option("--alphabet", alphabet_text, "Alphabet (default: symbols of the formula)");
  c_norm->add_option("--out", out_path, "Write the result here instead of stdout");
  add_json(c_norm);

  // compile
  std::string precision_text = "12,4";
  auto* c_compile = app.add_subcommand("compile", "Compile a formula into a transformer");
  c_compile->add_option("--formula", formula_path, "Formula file")->required();
  c_compile->add_option("--precision", precision_text, "P,S")->capture_default_str();
  c_compile->add_option("--alphabet", alphabet_text, "Alphabet (default: symbols of the formula)");
  c_compile->add_option("--out", out_path, "Model JSON output")->required();
  add_json(c_compile);

  // decompile
  auto* c_decompile = app.add_subcommand("decompile", "Recover a formula from a small transformer");
  c_decompile->add_option("--model", model_path, "Model JSON")->required();
  c_decompile->add_option("--out", out_path, "Formula output file (default: stdout)");
  add_json(c_decompile);

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "Run a transformer on a word");
  c_sim->add_option("--model", model_path, "Model JSON")->required();
  c_sim->add_option("--word", word, "Word; a leading ^ is the BOS, otherwise BOS is prepended")->required();
  c_sim->add_flag("--trace", trace, "Dump all activations");
  add_json(c_sim);

  // translate
  std::string to;
  bool closed = false;
  auto* c_tr = app.add_subcommand("translate", "Translate between the counting logic and MAJ2");
  c_tr->add_option("--to", to, "maj2 or tl")->required()->check(CLI::IsMember({"maj2", "tl"}));
  c_tr->add_option("--in", in_path, "Input file")->required();
  c_tr->add_option("--out", out_path, "Output file (default: stdout)");
  c_tr->add_flag("--closed", closed, "With --to maj2: wrap into a closed sentence");
  add_json(c_tr);

  // gen-data
  int k = 0, count = 0;
  std::string bin;
  auto* c_gen = app.add_subcommand("gen-data", "Sample a next-token prediction dataset");
  c_gen->add_option("--k", k, "Number of blocks")->required();
  c_gen->add_option("--bin", bin, "Inclusive length bin LO:HI")->required();
  c_gen->add_option("--count", count, "Number of records")->required();
  c_gen->add_option("--out", out_path, "JSONL output")->required();
  add_seed(c_gen);
  add_json(c_gen);

  // langs
  std::string emit_spec;
  auto* c_langs = app.add_subcommand("langs", "Print a formula from the language library");
  c_langs->add_option("--emit", emit_spec, "altplus:K | jexpr:SYMS | dyck | prediction:K")->required();
  c_langs->add_option("--out", out_path, "Write the formula here instead of stdout");
  add_json(c_langs);

  // check-equiv
  std::string spec_a, spec_b;
  int max_len = 8, max_random_len = 100;
  std::uint64_t samples = 1000;
  auto* c_eq = app.add_subcommand("check-equiv", "Compare two acceptors on all short words and random words");
  c_eq->add_option("--a", spec_a, "formula:PATH | dfa:altplus:K | dfa:dyck | model:PATH | maj2:PATH")->required();
  c_eq->add_option("--b", spec_b, "Second acceptor")->required();
  c_eq->add_option("--max-len", max_len, "Exhaustive length bound")->capture_default_str();
  c_eq->add_option("--samples", samples, "Random words")->capture_default_str();
  c_eq->add_option("--max-random-len", max_random_len, "Random word length bound")->capture_default_str();
  c_eq->add_option("--alphabet", alphabet_text, "Alphabet (default: union of both acceptors)");
  add_seed(c_eq);
  add_json(c_eq);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (c_parse->parsed()) {
      Formula f = load_formula(formula_path, alphabet_opt(alphabet_text));
      json j{{"command", "parse"}, {"formula", print(f)}, {"depth", depth(f)}, {"features", features_json(features(f))}};
      emit(as_json, j, print(f));
    } else if (c_eval->parsed()) {
      auto alphabet = alphabet_opt(alphabet_text);
      Formula f = load_formula(formula_path, alphabet);
      if (word.empty()) throw DomainError("the empty word has no positions");
      if (word.find(kBos) != std::string::npos) throw DomainError("BOS is only accepted by simulate");
      if (alphabet) alphabet->check_word(word);
      std::int64_t i = position == 0 ? static_cast<std::int64_t>(word.size()) : position;
      bool value = eval_formula(f, word, i);
      json j{{"command", "eval"}, {"word", word}, {"position", i}, {"value", value}};
      std::string text = value ? "true" : "false";
      if (trace) {
        std::vector<TraceRow> rows;
        std::unordered_set<std::string> seen;
        collect_rows(f, rows, seen);
        json jrows = json::array();
        std::ostringstream ts;
        for (const auto& r : rows) {
          json values = json::array();
          ts << r.label << "\t";
          if (r.is_formula) {
            for (bool b : eval_positions(r.f, word)) {
              values.push_back(b);
              ts << (b ? " T" : " F");
            }
          } else {
            for (std::int64_t v : eval_term_positions(r.t, word)) {
              values.push_back(v);
              ts << " " << v;
            }
          }
          ts << "\n";
          jrows.push_back({{"subformula", r.label}, {"kind", r.is_formula ? "formula" : "term"}, {"values", values}});
        }
        j["trace"] = jrows;
        text = ts.str() + text;
      }
      emit(as_json, j, text);
    } else if (c_depth->parsed()) {
      Formula f = load_formula(formula_path);
      json j{{"command", "depth"}, {"formula", print(f)}, {"depth", depth(f)}};
      emit(as_json, j, std::to_string(depth(f)));
    } else if (c_norm->parsed()) {
      Formula f = load_formula(formula_path);
      Alphabet alphabet = alphabet_text.empty() ? Alphabet(mentioned_symbols(f)) : Alphabet(alphabet_text);
      Formula g;
      std::string mode;
      json j{{"command", "normalize"}};
      if (ynf) {
        mode = "ynf";
        g = y_normal_form(f, alphabet);
      } else if (desugar_flag) {
        mode = "desugar";
        g = desugar(f);
      } else if (minimal) {
        mode = "minimal";
        g = normalize_to_minimal_basis(f);
      } else {
        mode = "neutral";
        if (neutral_e.size() != 1) throw CLI::ValidationError("--neutral-e", "expected one symbol");
        if (!alphabet.contains(neutral_e[0])) alphabet = alphabet.merged(Alphabet(neutral_e));
        NeutralReduction r = neutral_letter_reduce(f, neutral_e[0], alphabet);
        g = r.reduced;
        j["padding"] = r.padding;
      }
      j["mode"] = mode;
      j["formula"] = print(g);
      j["depth"] = depth(g);
      if (!out_path.empty()) write_file(out_path, print(g) + "\n");
      emit(as_json, j, print(g));
    } else if (c_compile->parsed()) {
      Formula f = load_formula(formula_path);
      Alphabet alphabet = alphabet_text.empty() ? Alphabet(mentioned_symbols(f)) : Alphabet(alphabet_text);
      Precision prec = parse_precision(precision_text);
      Transformer t = compile(f, alphabet, prec);
      save_model(t, out_path);
      json j{{"command", "compile"},
             {"out", out_path},
             {"depth", t.depth()},
             {"d", t.d},
             {"precision", {{"p", prec.p}, {"s", prec.s}}}};
      emit(as_json, j, "wrote " + out_path + " (depth " + std::to_string(t.depth()) + ", d " + std::to_string(t.d) + ")");
    } else if (c_decompile->parsed()) {
      Transformer t = load_model(model_path);
      Formula f = decompile(t);
      if (!out_path.empty()) write_file(out_path, print(f) + "\n");
      json j{{"command", "decompile"}, {"formula", print(f)}, {"depth", depth(f)}};
      emit(as_json, j, out_path.empty() ? print(f) : "wrote " + out_path + " (depth " + std::to_string(depth(f)) + ")");
    } else if (c_sim->parsed()) {
      Transformer t = load_model(model_path);
      std::string w = !word.empty() && word.front() == t.bos ? word : std::string(1, t.bos) + word;
      Activations a = forward(t, w);
      std::int64_t score = a.outputs.back();
      std::string decimal = Fixed(score, t.precision).to_decimal();
      json j{{"command", "simulate"}, {"word", w}, {"score", score}, {"score_decimal", decimal}, {"accept", score > 0}};
      std::string text = decimal + " " + (score > 0 ? "accept" : "reject");
      if (trace) {
        j["activations"] = activations_json(a);
        text = activations_json(a).dump(2) + "\n" + text;
      }
      emit(as_json, j, text);
    } else if (c_tr->parsed()) {
      std::string text = read_file(in_path);
      std::string result;
      int d = 0;
      if (to == "maj2") {
        Maj2 g = tl_to_maj2(parse_formula(text));
        if (closed) g = closed_wrapper(g);
        result = print(g);
        d = depth(g);
      } else {
        Formula f = maj2_to_tl(parse_maj2(text));
        result = print(f);
        d = depth(f);
      }
      if (!out_path.empty()) write_file(out_path, result + "\n");
      json j{{"command", "translate"}, {"to", to}, {"formula", result}, {"depth", d}};
      emit(as_json, j, out_path.empty() ? result : "wrote " + out_path + " (depth " + std::to_string(d) + ")");
    } else if (c_gen->parsed()) {
      auto colon = bin.find(':');
      if (colon == std::string::npos) throw CLI::ValidationError("--bin", "expected LO:HI");
      int lo = parse_positive("--bin", bin.substr(0, colon)), hi = parse_positive("--bin", bin.substr(colon + 1));
      auto records = sample_dataset(k, lo, hi, count, seed);
      std::string body;
      for (const auto& r : records) body += to_jsonl(r) + "\n";
      write_file(out_path, body);
      json j{{"command", "gen-data"}, {"out", out_path}, {"k", k}, {"count", records.size()}, {"seed", seed}};
      emit(as_json, j, "wrote " + std::to_string(records.size()) + " records to " + out_path);
    } else if (c_langs->parsed()) {
      Formula f;
      auto colon = emit_spec.find(':');
      std::string kind = emit_spec.substr(0, colon);
      std::string arg = colon == std::string::npos ? "" : emit_spec.substr(colon + 1);
      if (kind == "altplus") f = altplus_formula(parse_positive("--emit", arg));
      else if (kind == "prediction") f = prediction_formula(parse_positive("--emit", arg));
      else if (kind == "jexpr") {
        if (arg.empty()) throw CLI::ValidationError("--emit", "jexpr needs symbols");
        f = jexpr_formula(arg);
      } else if (kind == "dyck" && arg.empty()) f = dyck_formula();
      else throw CLI::ValidationError("--emit", "unknown language '" + emit_spec + "'");
      if (!out_path.empty()) write_file(out_path, print(f) + "\n");
      json j{{"command", "langs"}, {"emit", emit_spec}, {"formula", print(f)}, {"depth", depth(f)}};
      emit(as_json, j, print(f));
    } else if (c_eq->parsed()) {
      LoadedAcceptor a = load_acceptor(spec_a), b = load_acceptor(spec_b);
      Alphabet alphabet = alphabet_text.empty() ? a.alphabet.merged(b.alphabet) : Alphabet(alphabet_text);
      if (alphabet.size() == 0) throw DomainError("empty alphabet; pass --alphabet");
      EquivReport r = check_equiv(*a.acceptor, *b.acceptor, alphabet, max_len, samples, max_random_len, seed);
      json j{{"command", "check-equiv"},
             {"a", spec_a},
             {"b", spec_b},
             {"alphabet", alphabet.symbols()},
             {"equivalent", r.equivalent},
             {"exhaustive_words", r.exhaustive_words},
             {"random_words", r.random_words},
             {"seed", seed}};
      std::string text;
      if (r.equivalent) {
        j["counterexample"] = nullptr;
        text = "equivalent (" + std::to_string(r.exhaustive_words) + " exhaustive, " +
               std::to_string(r.random_words) + " random)";
      } else {
        j["counterexample"] = *r.counterexample;
        j["verdict_a"] = r.verdict_a;
        j["verdict_b"] = r.verdict_b;
        text = "counterexample " + *r.counterexample + ": " + spec_a + " " + (r.verdict_a ? "accepts" : "rejects") +
               ", " + spec_b + " " + (r.verdict_b ? "accepts" : "rejects");
      }
      emit(as_json, j, text);
      if (!r.equivalent) return kExitCounterexample;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
