#pragma once

// Interchange documents: {"version": "1", "kind": ..., "body": ...}.
//
// Encodings used throughout the body:
//   finite set   an integer n, or an array of n distinct label strings
//   table        an array of element indices (a map between finite sets)
//   hom matrix   homs[x][y], composition[x][y][z] = table indexed g*|Hom(x,y)|+f
//
// Parsing checks shapes (array lengths, index ranges needed to build values)
// and throws ParseError; laws such as associativity are left to the validators.

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"
#include "exodromy/funcat.hpp"
#include "exodromy/galois.hpp"
#include "exodromy/procat.hpp"
#include "exodromy/strat.hpp"

#include <json.hpp>

#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace exo {

using Json = nlohmann::ordered_json;

inline constexpr const char* format_version = "1";

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace io {

// ---------------------------------------------------------------- writing

inline Json finset(const FinSet& s) {
  if (s.labels.empty()) return s.size;
  return s.labels;
}

inline Json table(const std::vector<std::size_t>& t) { return Json(t); }

inline Json fincat(const FinCat& c) {
  const auto n = c.object_count();
  Json homs = Json::array(), comp = Json::array();
  for (std::size_t x = 0; x < n; ++x) {
    Json row = Json::array(), cx = Json::array();
    for (std::size_t y = 0; y < n; ++y) {
      row.push_back(finset(c.hom(x, y)));
      Json cy = Json::array();
      for (std::size_t z = 0; z < n; ++z) cy.push_back(table(c.composition[c.triple_index(x, y, z)]));
      cx.push_back(std::move(cy));
    }
    homs.push_back(std::move(row));
    comp.push_back(std::move(cx));
  }
  return Json{{"homs", homs}, {"identities", c.identities}, {"composition", comp}};
}

inline Json procat(const ProCat& p) {
  const auto n = p.object_count();
  Json levels = Json::array(), transitions = Json::array();
  for (const auto& l : p.levels) levels.push_back(fincat(l));
  for (const auto& t : p.transitions) {
    Json rows = Json::array();
    for (std::size_t x = 0; x < n; ++x) {
      Json row = Json::array();
      for (std::size_t y = 0; y < n; ++y) row.push_back(table(t[x * n + y].table()));
      rows.push_back(std::move(row));
    }
    transitions.push_back(std::move(rows));
  }
  return Json{{"objects", finset(p.objects)}, {"levels", levels}, {"transitions", transitions}};
}

/// The functor data without its base; `functor` adds the base under "procat".
inline Json functor_data(const CtsFunctor& f) {
  const auto n = f.object_count();
  Json values = Json::array(), actions = Json::array();
  for (const auto& v : f.values) values.push_back(finset(v));
  for (std::size_t x = 0; x < n; ++x) {
    Json row = Json::array();
    for (std::size_t y = 0; y < n; ++y) {
      Json arrows = Json::array();
      for (const auto& t : f.actions[x * n + y]) arrows.push_back(table(t));
      row.push_back(std::move(arrows));
    }
    actions.push_back(std::move(row));
  }
  return Json{{"level", f.level}, {"values", values}, {"actions", actions}};
}

inline Json functor(const CtsFunctor& f) {
  Json j{{"procat", procat(*f.base)}};
  j.update(functor_data(f));
  return j;
}

inline Json nattrans(const NatTrans& t) {
  Json comps = Json::array();
  for (const auto& c : t.components) comps.push_back(table(c.table()));
  return Json{{"procat", procat(*t.source().base)},
              {"source", functor_data(t.source())},
              {"target", functor_data(t.target())},
              {"components", comps}};
}

inline Json group(const Group& g) {
  return Json{{"order", g.order}, {"table", g.table}, {"identity", g.identity}};
}

inline Json strata(const StrataSpec& s) {
  Json mono = Json::array(), exits = Json::array(), comps = Json::array();
  for (const auto& c : s.monodromy) {
    Json levels = Json::array();
    for (const auto& g : c.levels) levels.push_back(group(g));
    mono.push_back(Json{{"levels", levels}, {"reductions", c.reductions}});
  }
  for (const auto& e : s.exits) {
    exits.push_back(Json{{"source", e.source}, {"target", e.target}, {"size", e.size}, {"left", e.left},
                         {"right", e.right}});
  }
  for (const auto& c : s.compositions) {
    comps.push_back(Json{{"source", c.source}, {"middle", c.middle}, {"target", c.target}, {"table", c.table}});
  }
  return Json{{"strata", finset(s.strata)}, {"monodromy", mono}, {"exits", exits}, {"compositions", comps}};
}

struct PresentationSource {
  std::optional<StrataSpec> strata; // when present the base is build_strata(*strata)
  GaloisPresentation presentation;
};

inline Json presentation(const PresentationSource& p) {
  Json j = Json::object();
  if (p.strata) {
    j["strata"] = strata(*p.strata);
  } else {
    j["procat"] = procat(*p.presentation.base);
  }
  j["fibre_points"] = p.presentation.fibre_points;
  j["generator_bound"] = p.presentation.generator_bound;
  return j;
}

inline Json document(const std::string& kind, Json body) {
  return Json{{"version", format_version}, {"kind", kind}, {"body", std::move(body)}};
}

// ---------------------------------------------------------------- reading

struct Cursor {
  const Json& j;
  std::string path;

  Cursor at(const char* key) const {
    if (!j.is_object()) fail("expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(detail::concat("missing field \"", key, "\""));
    return {*it, path + "." + key};
  }
  bool has(const char* key) const { return j.is_object() && j.contains(key); }
  Cursor at(std::size_t i) const { return {j.at(i), detail::concat(path, '[', i, ']')}; }

  const Json& array(std::optional<std::size_t> expected = {}) const {
    if (!j.is_array()) fail("expected an array");
    if (expected && j.size() != *expected) fail(detail::concat("expected ", *expected, " entries, found ", j.size()));
    return j;
  }
  std::size_t size(std::optional<std::size_t> expected = {}) const { return array(expected).size(); }

  std::size_t index() const {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return j.get<std::size_t>();
  }
  std::string string() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path + ": " + what); }
};

inline FinSet read_finset(const Cursor& c) {
  if (c.j.is_array()) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < c.size(); ++i) labels.push_back(c.at(i).string());
    try {
      return FinSet(labels.size(), labels);
    } catch (const ShapeError& e) {
      c.fail(e.what());
    }
  }
  return FinSet(c.index());
}

inline std::vector<std::size_t> read_table(const Cursor& c, std::optional<std::size_t> expected = {}) {
  std::vector<std::size_t> t;
  for (std::size_t i = 0; i < c.size(expected); ++i) t.push_back(c.at(i).index());
  return t;
}

inline FinCat read_fincat(const Cursor& c, const FinSet& objects) {
  const auto n = objects.size;
  auto homs = c.at("homs");
  std::vector<FinSet> hom_sets;
  std::vector<std::size_t> sizes;
  for (std::size_t x = 0; x < homs.size(n); ++x) {
    auto row = homs.at(x);
    for (std::size_t y = 0; y < row.size(n); ++y) {
      hom_sets.push_back(read_finset(row.at(y)));
      sizes.push_back(hom_sets.back().size);
    }
  }
  auto cat = FinCat::with_hom_sizes(objects, sizes);
  cat.homs = hom_sets;
  cat.identities = read_table(c.at("identities"), n);
  auto comp = c.at("composition");
  for (std::size_t x = 0; x < comp.size(n); ++x)
    for (std::size_t y = 0; y < comp.at(x).size(n); ++y)
      for (std::size_t z = 0; z < comp.at(x).at(y).size(n); ++z) {
        auto expected = sizes[x * n + y] * sizes[y * n + z];
        cat.composition[cat.triple_index(x, y, z)] = read_table(comp.at(x).at(y).at(z), expected);
      }
  return cat;
}

inline ProCat read_procat(const Cursor& c) {
  ProCat p;
  p.objects = read_finset(c.at("objects"));
  const auto n = p.objects.size;
  auto levels = c.at("levels");
  if (levels.size() == 0) levels.fail("a pro-category needs at least one level");
  for (std::size_t k = 0; k < levels.size(); ++k) p.levels.push_back(read_fincat(levels.at(k), p.objects));
  auto trans = c.at("transitions");
  for (std::size_t k = 0; k < trans.size(p.levels.size() - 1); ++k) {
    std::vector<FinMap> maps;
    auto tk = trans.at(k);
    for (std::size_t x = 0; x < tk.size(n); ++x)
      for (std::size_t y = 0; y < tk.at(x).size(n); ++y) {
        auto cell = tk.at(x).at(y);
        auto t = read_table(cell, p.levels[k + 1].hom_size(x, y));
        try {
          maps.emplace_back(p.levels[k + 1].hom(x, y), p.levels[k].hom(x, y), t);
        } catch (const ShapeError& e) {
          cell.fail(e.what());
        }
      }
    p.transitions.push_back(std::move(maps));
  }
  return p;
}

inline CtsFunctor read_functor_data(const Cursor& c, std::shared_ptr<const ProCat> base) {
  const auto n = base->object_count();
  auto level = c.at("level").index();
  if (level >= base->depth()) c.at("level").fail(detail::concat("no level ", level));
  std::vector<FinSet> values;
  for (std::size_t x = 0; x < c.at("values").size(n); ++x) values.push_back(read_finset(c.at("values").at(x)));
  auto f = blank_functor(base, level, values);
  const auto& cat = base->level(level);
  auto actions = c.at("actions");
  for (std::size_t x = 0; x < actions.size(n); ++x)
    for (std::size_t y = 0; y < actions.at(x).size(n); ++y) {
      auto cell = actions.at(x).at(y);
      for (std::size_t h = 0; h < cell.size(cat.hom_size(x, y)); ++h) {
        f.actions[x * n + y][h] = read_table(cell.at(h), values[x].size);
      }
    }
  return f;
}

inline CtsFunctor read_functor(const Cursor& c) {
  auto base = std::make_shared<const ProCat>(read_procat(c.at("procat")));
  return read_functor_data(c, base);
}

inline NatTrans read_nattrans(const Cursor& c) {
  auto base = std::make_shared<const ProCat>(read_procat(c.at("procat")));
  auto s = read_functor_data(c.at("source"), base);
  auto t = read_functor_data(c.at("target"), base);
  std::vector<Table> comps;
  auto cc = c.at("components");
  for (std::size_t x = 0; x < cc.size(base->object_count()); ++x) comps.push_back(read_table(cc.at(x), s.values[x].size));
  try {
    return NatTrans(s, t, comps);
  } catch (const ShapeError& e) {
    cc.fail(e.what());
  }
}

inline Group read_group(const Cursor& c) {
  Group g;
  g.order = c.at("order").index();
  g.table = read_table(c.at("table"), g.order * g.order);
  g.identity = c.at("identity").index();
  return g;
}

inline StrataSpec read_strata(const Cursor& c) {
  StrataSpec s;
  s.strata = read_finset(c.at("strata"));
  auto mono = c.at("monodromy");
  for (std::size_t i = 0; i < mono.size(s.strata.size); ++i) {
    GroupChain chain;
    auto levels = mono.at(i).at("levels");
    for (std::size_t k = 0; k < levels.size(); ++k) chain.levels.push_back(read_group(levels.at(k)));
    auto reds = mono.at(i).at("reductions");
    for (std::size_t k = 0; k < reds.size(); ++k) chain.reductions.push_back(read_table(reds.at(k)));
    s.monodromy.push_back(std::move(chain));
  }
  auto exits = c.at("exits");
  for (std::size_t i = 0; i < exits.size(); ++i) {
    auto e = exits.at(i);
    s.exits.push_back({e.at("source").index(), e.at("target").index(), e.at("size").index(),
                       read_table(e.at("left")), read_table(e.at("right"))});
  }
  auto comps = c.at("compositions");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    auto e = comps.at(i);
    s.compositions.push_back({e.at("source").index(), e.at("middle").index(), e.at("target").index(),
                              read_table(e.at("table"))});
  }
  return s;
}

/// Builds the base category too; a StrataSpec that does not assemble raises ValidationError.
inline PresentationSource read_presentation(const Cursor& c) {
  PresentationSource p;
  if (c.has("strata")) {
    p.strata = read_strata(c.at("strata"));
    p.presentation.base = std::make_shared<const ProCat>(build_strata(*p.strata));
  } else {
    p.presentation.base = std::make_shared<const ProCat>(read_procat(c.at("procat")));
  }
  if (c.has("fibre_points")) {
    p.presentation.fibre_points = read_table(c.at("fibre_points"));
  } else {
    for (std::size_t x = 0; x < p.presentation.base->object_count(); ++x) p.presentation.fibre_points.push_back(x);
  }
  if (c.has("generator_bound")) p.presentation.generator_bound = c.at("generator_bound").index();
  return p;
}

} // namespace io

using DocumentValue = std::variant<ProCat, CtsFunctor, NatTrans, StrataSpec, io::PresentationSource>;

struct Document {
  std::string kind;
  std::string version = format_version;
  DocumentValue value;
};

inline Json to_json(const Document& d) {
  Json body = std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ProCat>) return io::procat(v);
        else if constexpr (std::is_same_v<T, CtsFunctor>) return io::functor(v);
        else if constexpr (std::is_same_v<T, NatTrans>) return io::nattrans(v);
        else if constexpr (std::is_same_v<T, StrataSpec>) return io::strata(v);
        else return io::presentation(v);
      },
      d.value);
  return io::document(d.kind, std::move(body));
}

inline Document make_document(ProCat p) { return {"procat", format_version, std::move(p)}; }
inline Document make_document(CtsFunctor f) { return {"functor", format_version, std::move(f)}; }
inline Document make_document(NatTrans t) { return {"nattrans", format_version, std::move(t)}; }
inline Document make_document(StrataSpec s) { return {"strata", format_version, std::move(s)}; }
inline Document make_document(io::PresentationSource p) { return {"presentation", format_version, std::move(p)}; }

/// Lays arrays of scalars out on one line and everything else one entry per line.
inline std::string pretty(const Json& j, std::size_t indent = 0) {
  auto scalar_array = [](const Json& a) {
    return a.is_array() && std::all_of(a.begin(), a.end(), [](const Json& e) { return e.is_primitive(); });
  };
  std::ostringstream out;
  const std::string pad(indent, ' '), inner(indent + 2, ' ');
  if (j.is_primitive() || scalar_array(j) || j.empty()) {
    out << j.dump();
  } else if (j.is_array()) {
    out << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << inner << pretty(j[i], indent + 2) << (i + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << ']';
  } else {
    out << "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out << inner << Json(it.key()).dump() << ": " << pretty(it.value(), indent + 2)
          << (i + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << '}';
  }
  return out.str();
}

inline std::string serialize(const Document& d) { return pretty(to_json(d)) + "\n"; }

inline Document from_json(const Json& j) {
  io::Cursor root{j, "$"};
  auto version = root.at("version").string();
  if (version != format_version) root.at("version").fail("unsupported version \"" + version + "\"");
  auto kind = root.at("kind").string();
  auto body = root.at("body");
  if (kind == "procat") return make_document(io::read_procat(body));
  if (kind == "functor") return make_document(io::read_functor(body));
  if (kind == "nattrans") return make_document(io::read_nattrans(body));
  if (kind == "strata") return make_document(io::read_strata(body));
  if (kind == "presentation") return make_document(io::read_presentation(body));
  root.at("kind").fail("unknown kind \"" + kind + "\"");
}

inline Document parse_document(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

inline Document read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

} // namespace exo
