#include "craspkit/model_io.hpp"

#include <fstream>
#include <sstream>

#include "craspkit/error.hpp"
#include "json.hpp"

namespace craspkit {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw DomainError("model: " + msg); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::int64_t as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) bad(std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

FixedVec as_vec(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  FixedVec v;
  for (const auto& x : j) v.push_back(as_int(x, what));
  return v;
}

char as_symbol(const json& j) {
  if (!j.is_string() || j.get<std::string>().size() != 1) bad("symbols must be one-character strings");
  return j.get<std::string>()[0];
}

LocalMap map_from_json(const json& j) {
  if (!j.is_array()) bad("local map must be an array of stages");
  std::vector<Stage> stages;
  for (const auto& st : j) {
    const std::string kind = field(st, "stage").get<std::string>();
    if (kind == "affine") {
      AffineStage a;
      for (const auto& row : field(st, "m")) a.m.push_back(as_vec(row, "affine weight"));
      a.b = as_vec(field(st, "b"), "affine bias");
      stages.emplace_back(std::move(a));
    } else if (kind == "relu") {
      stages.emplace_back(ReluStage{});
    } else if (kind == "table") {
      TableStage t;
      for (const auto& e : field(st, "entries")) {
        if (!e.is_array() || e.size() != 2) bad("table entries must be [input, output] pairs");
        if (!t.entries.emplace(as_vec(e[0], "table input"), as_vec(e[1], "table output")).second)
          bad("duplicate table input");
      }
      stages.emplace_back(std::move(t));
    } else {
      bad("unknown stage '" + kind + "'");
    }
  }
  return LocalMap(std::move(stages));
}

json map_to_json(const LocalMap& m) {
  json out = json::array();
  for (const Stage& st : m.stages()) {
    if (auto* a = std::get_if<AffineStage>(&st)) {
      out.push_back({{"stage", "affine"}, {"m", a->m}, {"b", a->b}});
    } else if (std::holds_alternative<ReluStage>(st)) {
      out.push_back({{"stage", "relu"}});
    } else {
      json entries = json::array();
      for (const auto& [in, o] : std::get<TableStage>(st).entries) entries.push_back({in, o});
      out.push_back({{"stage", "table"}, {"entries", entries}});
    }
  }
  return out;
}

}  // namespace

Transformer model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  try {
    Transformer t;
    const json& pr = field(j, "precision");
    t.precision = Precision(static_cast<int>(as_int(field(pr, "p"), "p")), static_cast<int>(as_int(field(pr, "s"), "s")));
    t.bos = j.contains("bos") ? as_symbol(j.at("bos")) : kBos;
    std::string syms;
    for (const auto& s : field(j, "alphabet")) {
      char c = as_symbol(s);
      if (c != t.bos) syms.push_back(c);
    }
    t.alphabet = Alphabet(syms);
    t.d = static_cast<int>(as_int(field(j, "d"), "d"));
    const json& emb = field(j, "embedding");
    if (!emb.is_object()) bad("embedding must be an object");
    for (const auto& [k, v] : emb.items()) {
      if (k.size() != 1) bad("embedding keys must be single symbols");
      t.embedding[k[0]] = as_vec(v, "embedding");
    }
    for (const auto& L : field(j, "layers")) {
      t.layers.push_back(Layer{map_from_json(field(L, "wq")), map_from_json(field(L, "wk")),
                               map_from_json(field(L, "wv")), map_from_json(field(L, "f"))});
    }
    t.w_out = map_from_json(field(j, "w_out"));
    if (j.contains("pe")) {
      const json& pe = j.at("pe");
      const std::string kind = field(pe, "kind").get<std::string>();
      const json params = pe.value("params", json::object());
      if (kind == "none") {
        t.pe.kind = PositionalEncoding::Kind::None;
      } else if (kind == "sinusoidal" || kind == "rope") {
        t.pe.kind = kind == "rope" ? PositionalEncoding::Kind::RoPE : PositionalEncoding::Kind::Sinusoidal;
        for (const auto& a : field(params, "angles"))
          t.pe.angles.pairs.emplace_back(as_int(field(a, "m"), "angle period"), as_int(field(a, "r"), "angle phase"));
      } else if (kind == "alibi") {
        t.pe.kind = PositionalEncoding::Kind::ALiBi;
        t.pe.alibi_slope = as_int(field(params, "a"), "alibi slope");
      } else {
        bad("unknown positional encoding '" + kind + "'");
      }
    }
    if (j.contains("meta")) t.meta = j.at("meta").dump();
    t.finalize();
    return t;
  } catch (const json::exception& e) {
    bad(e.what());
  }
}

std::string model_to_json(const Transformer& t, int indent) {
  json j;
  j["precision"] = {{"p", t.precision.p}, {"s", t.precision.s}};
  json alpha = json::array();
  for (char c : t.alphabet.symbols()) alpha.push_back(std::string(1, c));
  j["alphabet"] = alpha;
  j["bos"] = std::string(1, t.bos);
  j["d"] = t.d;
  json emb = json::object();
  for (const auto& [c, v] : t.embedding) emb[std::string(1, c)] = v;
  j["embedding"] = emb;
  json layers = json::array();
  for (const auto& L : t.layers)
    layers.push_back({{"wq", map_to_json(L.wq)}, {"wk", map_to_json(L.wk)}, {"wv", map_to_json(L.wv)}, {"f", map_to_json(L.f)}});
  j["layers"] = layers;
  j["w_out"] = map_to_json(t.w_out);
  json params = json::object();
  if (t.pe.kind == PositionalEncoding::Kind::Sinusoidal || t.pe.kind == PositionalEncoding::Kind::RoPE) {
    json angles = json::array();
    for (auto [m, r] : t.pe.angles.pairs) angles.push_back({{"m", m}, {"r", r}});
    params["angles"] = angles;
  } else if (t.pe.kind == PositionalEncoding::Kind::ALiBi) {
    params["a"] = t.pe.alibi_slope;
  }
  j["pe"] = {{"kind", to_string(t.pe.kind)}, {"params", params}};
  if (!t.meta.empty()) j["meta"] = json::parse(t.meta);
  return j.dump(indent);
}

Transformer load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void save_model(const Transformer& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path);
  out << model_to_json(t) << '\n';
}

}  // namespace craspkit
