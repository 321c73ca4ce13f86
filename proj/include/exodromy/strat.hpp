#pragma once

// Stratified models: one object per stratum, loops given by a monodromy group
// (or a chain of finite quotients of it), exit paths given by finite bisets
// with explicitly supplied composition tables.

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"
#include "exodromy/galois.hpp"
#include "exodromy/procat.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace exo {

struct Group {
  std::size_t order = 1;
  std::vector<std::size_t> table{0}; // table[a*order+b] = a.b
  std::size_t identity = 0;

  std::size_t mul(std::size_t a, std::size_t b) const { return table[a * order + b]; }

  friend bool operator==(const Group&, const Group&) = default;
};

inline ValidationReport validate_group(const Group& g) {
  ValidationReport report;
  if (g.order == 0 || g.table.size() != g.order * g.order || g.identity >= g.order) {
    report.add("shape", "group table must be order x order with an identity in range");
    return report;
  }
  for (auto v : g.table) {
    if (v >= g.order) {
      report.add("shape", detail::concat("table entry ", v, " out of range"));
      return report;
    }
  }
  for (std::size_t a = 0; a < g.order; ++a) {
    ++report.checked;
    if (g.mul(g.identity, a) != a || g.mul(a, g.identity) != a) {
      report.add("identity", detail::concat("the identity does not fix element ", a), {a});
    }
    bool has_inverse = false;
    for (std::size_t b = 0; b < g.order; ++b) has_inverse = has_inverse || g.mul(a, b) == g.identity;
    if (!has_inverse) report.add("inverse", detail::concat("element ", a, " has no right inverse"), {a});
  }
  for (std::size_t a = 0; a < g.order; ++a)
    for (std::size_t b = 0; b < g.order; ++b)
      for (std::size_t c = 0; c < g.order; ++c) {
        ++report.checked;
        if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) {
          report.add("associativity", detail::concat("(ab)c != a(bc) for (a,b,c) = (", a, ",", b, ",", c, ")"),
                     {a, b, c});
          return report;
        }
      }
  return report;
}

inline Group cyclic_group(std::size_t n) {
  Group g;
  g.order = n;
  g.table.resize(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) g.table[a * n + b] = (a + b) % n;
  return g;
}

/// Permutations of {0,1,2} in lexicographic order; (s.t)(i) = s(t(i)).
inline std::vector<std::vector<std::size_t>> s3_elements() {
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> p{0, 1, 2};
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return perms;
}

inline Group symmetric_group_3() {
  auto perms = s3_elements();
  Group g;
  g.order = perms.size();
  g.table.resize(g.order * g.order);
  for (std::size_t a = 0; a < g.order; ++a)
    for (std::size_t b = 0; b < g.order; ++b) {
      std::vector<std::size_t> c(3);
      for (std::size_t i = 0; i < 3; ++i) c[i] = perms[a][perms[b][i]];
      g.table[a * g.order + b] =
          static_cast<std::size_t>(std::find(perms.begin(), perms.end(), c) - perms.begin());
    }
  return g;
}

/// levels[0] is the coarsest quotient; reductions[k] : levels[k+1] -> levels[k].
struct GroupChain {
  std::vector<Group> levels;
  std::vector<std::vector<std::size_t>> reductions;

  const Group& finest() const { return levels.back(); }
  std::size_t depth() const { return levels.size(); }

  /// Image of a finest-level element at level k.
  std::size_t reduce(std::size_t g, std::size_t k) const {
    for (std::size_t l = levels.size() - 1; l > k; --l) g = reductions[l - 1][g];
    return g;
  }
};

inline GroupChain single(Group g) { return {{std::move(g)}, {}}; }

/// Z/m_0 <- Z/m_1 <- ... with reduction maps; each modulus must divide the next.
inline GroupChain cyclic_chain(const std::vector<std::size_t>& moduli) {
  GroupChain c;
  for (std::size_t k = 0; k < moduli.size(); ++k) {
    c.levels.push_back(cyclic_group(moduli[k]));
    if (k > 0) {
      if (moduli[k] % moduli[k - 1] != 0) {
        throw ShapeError(detail::concat("cyclic_chain: ", moduli[k - 1], " does not divide ", moduli[k]));
      }
      std::vector<std::size_t> red(moduli[k]);
      for (std::size_t a = 0; a < moduli[k]; ++a) red[a] = a % moduli[k - 1];
      c.reductions.push_back(red);
    }
  }
  return c;
}

inline ValidationReport validate_chain(const GroupChain& c) {
  ValidationReport report;
  if (c.levels.empty()) {
    report.add("shape", "a group chain needs at least one level");
    return report;
  }
  for (std::size_t k = 0; k < c.levels.size(); ++k) report.merge(validate_group(c.levels[k]), detail::concat("level ", k));
  if (!report.ok()) return report;
  if (c.reductions.size() + 1 != c.levels.size()) {
    report.add("shape", "one reduction map between consecutive levels is required");
    return report;
  }
  for (std::size_t k = 0; k + 1 < c.levels.size(); ++k) {
    const auto& fine = c.levels[k + 1];
    const auto& coarse = c.levels[k];
    const auto& r = c.reductions[k];
    if (r.size() != fine.order || std::any_of(r.begin(), r.end(), [&](auto v) { return v >= coarse.order; })) {
      report.add("shape", detail::concat("reduction ", k + 1, "->", k, " has the wrong shape"), {k});
      continue;
    }
    ++report.checked;
    if (!FinMap(FinSet(fine.order), FinSet(coarse.order), r).is_surjective()) {
      report.add("surjectivity", detail::concat("reduction ", k + 1, "->", k, " is not surjective"), {k});
    }
    for (std::size_t a = 0; a < fine.order; ++a)
      for (std::size_t b = 0; b < fine.order; ++b) {
        ++report.checked;
        if (r[fine.mul(a, b)] != coarse.mul(r[a], r[b])) {
          report.add("homomorphism", detail::concat("reduction ", k + 1, "->", k, " breaks the product of ", a,
                                                    " and ", b), {k, a, b});
          return report;
        }
      }
  }
  return report;
}

/// A finite set of exit paths from stratum `source` to stratum `target`, with the
/// monodromy of the target acting on the left and that of the source on the right
/// (both by finest-level elements).
struct ExitSet {
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t size = 0;
  std::vector<std::size_t> left;  // left[g*size+e]   = g.e, g in G_target
  std::vector<std::size_t> right; // right[e*|G_s|+g] = e.g, g in G_source
};

/// Composite of an exit path s -> t followed by one t -> u. The result lies in the
/// exit set s -> u, or in the finest monodromy group of s when u == s.
struct ExitComposition {
  std::size_t source = 0, middle = 0, target = 0;
  std::vector<std::size_t> table; // table[second*|E(s,t)|+first]
};

struct StrataSpec {
  FinSet strata;
  std::vector<GroupChain> monodromy;
  std::vector<ExitSet> exits;
  std::vector<ExitComposition> compositions;
};

namespace detail {

inline const ExitSet* find_exit(const StrataSpec& s, std::size_t a, std::size_t b) {
  for (const auto& e : s.exits)
    if (e.source == a && e.target == b) return &e;
  return nullptr;
}

inline const ExitComposition* find_composition(const StrataSpec& s, std::size_t a, std::size_t b, std::size_t c) {
  for (const auto& e : s.compositions)
    if (e.source == a && e.middle == b && e.target == c) return &e;
  return nullptr;
}

} // namespace detail

/// Builds the pro-category described by a StrataSpec and validates it. Violations of its
/// own invariants raise ValidationError; a result that is not a pro-category
/// raises ValidationError with law "table".
inline ProCat build_strata(const StrataSpec& spec) {
  const auto n = spec.strata.size;
  if (spec.monodromy.size() != n) throw ShapeError("build_strata: one monodromy chain per stratum");
  std::size_t depth = 0;
  for (std::size_t s = 0; s < n; ++s) {
    auto r = validate_chain(spec.monodromy[s]);
    if (!r.ok()) {
      throw ValidationError("group", {s}, detail::concat("stratum ", s, ": ", r.issues.front().message));
    }
    if (s == 0) depth = spec.monodromy[s].depth();
    if (spec.monodromy[s].depth() != depth) {
      throw ShapeError("build_strata: all monodromy chains must have the same number of levels");
    }
  }
  if (n == 0) depth = 1;
  std::set<std::pair<std::size_t, std::size_t>> seen_pairs;
  for (std::size_t i = 0; i < spec.exits.size(); ++i) {
    const auto& e = spec.exits[i];
    if (e.source >= n || e.target >= n || e.source == e.target) {
      throw ShapeError(detail::concat("build_strata: exit set ", i, " must join two distinct strata"));
    }
    if (!seen_pairs.emplace(e.source, e.target).second) {
      throw ShapeError(detail::concat("build_strata: two exit sets from ", e.source, " to ", e.target));
    }
    const auto& gt = spec.monodromy[e.target].finest();
    const auto& gs = spec.monodromy[e.source].finest();
    if (e.left.size() != gt.order * e.size || e.right.size() != e.size * gs.order) {
      throw ShapeError(detail::concat("build_strata: action tables of exit set ", i, " have the wrong size"));
    }
    for (auto v : e.left)
      if (v >= e.size) throw ShapeError(detail::concat("build_strata: left action of exit set ", i, " out of range"));
    for (auto v : e.right)
      if (v >= e.size) throw ShapeError(detail::concat("build_strata: right action of exit set ", i, " out of range"));
    for (std::size_t p = 0; p < e.size; ++p) {
      if (e.left[gt.identity * e.size + p] != p || e.right[p * gs.order + gs.identity] != p) {
        throw ValidationError("action", {i, p}, detail::concat("exit set ", i, ": identity moves path ", p));
      }
      for (std::size_t g = 0; g < gt.order; ++g)
        for (std::size_t h = 0; h < gt.order; ++h)
          if (e.left[gt.mul(g, h) * e.size + p] != e.left[g * e.size + e.left[h * e.size + p]]) {
            throw ValidationError("action", {i, g, h, p}, detail::concat("exit set ", i, ": left action is not an action"));
          }
      for (std::size_t g = 0; g < gs.order; ++g)
        for (std::size_t h = 0; h < gs.order; ++h)
          if (e.right[p * gs.order + gs.mul(g, h)] != e.right[e.right[p * gs.order + g] * gs.order + h]) {
            throw ValidationError("action", {i, g, h, p}, detail::concat("exit set ", i, ": right action is not an action"));
          }
    }
  }

  // Finest level first, then the coarser levels by reduction.
  auto hom_size = [&](std::size_t k, std::size_t a, std::size_t b) -> std::size_t {
    if (a == b) return spec.monodromy[a].levels[k].order;
    auto e = detail::find_exit(spec, a, b);
    return e ? e->size : 0;
  };
  auto finest_compose = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t g,
                            std::size_t f) -> std::size_t {
    if (a == b && b == c) return spec.monodromy[a].finest().mul(g, f);
    if (a == b) {
      const auto& gs = spec.monodromy[a].finest();
      return detail::find_exit(spec, a, c)->right[g * gs.order + f];
    }
    if (b == c) {
      const auto* e = detail::find_exit(spec, a, b);
      return e->left[g * e->size + f];
    }
    const auto* comp = detail::find_composition(spec, a, b, c);
    if (!comp) {
      throw ShapeError(detail::concat("build_strata: no composition table for exit paths ", a, "->", b, "->", c));
    }
    const auto* first = detail::find_exit(spec, a, b);
    const auto r = comp->table.at(g * first->size + f);
    if (r >= hom_size(depth - 1, a, c)) {
      throw ShapeError(detail::concat("build_strata: composition ", a, "->", b, "->", c, " out of range"));
    }
    return r;
  };
  for (const auto& comp : spec.compositions) {
    const auto* first = detail::find_exit(spec, comp.source, comp.middle);
    const auto* second = detail::find_exit(spec, comp.middle, comp.target);
    if (!first || !second || comp.table.size() != first->size * second->size) {
      throw ShapeError(detail::concat("build_strata: composition table ", comp.source, "->", comp.middle, "->",
                                      comp.target, " does not match its exit sets"));
    }
  }

  ProCat p;
  p.objects = spec.strata;
  for (std::size_t k = 0; k < depth; ++k) {
    std::vector<std::size_t> sizes;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) sizes.push_back(hom_size(k, a, b));
    auto c = FinCat::with_hom_sizes(spec.strata, sizes);
    for (std::size_t a = 0; a < n; ++a) c.identities[a] = spec.monodromy[a].levels[k].identity;
    p.levels.push_back(std::move(c));
  }
  // Reduce an arrow of the finest level to level k; exit sets are level independent.
  auto reduce = [&](std::size_t a, std::size_t b, std::size_t h, std::size_t k) {
    return a == b ? spec.monodromy[a].reduce(h, k) : h;
  };
  const auto top = depth - 1;
  for (std::size_t k = 0; k < depth; ++k) {
    auto& c = p.levels[k];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t cc = 0; cc < n; ++cc) {
          auto& table = c.composition[c.triple_index(a, b, cc)];
          std::vector<bool> set(table.size(), false);
          for (std::size_t f = 0; f < hom_size(top, a, b); ++f)
            for (std::size_t g = 0; g < hom_size(top, b, cc); ++g) {
              auto fr = reduce(a, b, f, k);
              auto gr = reduce(b, cc, g, k);
              auto slot = gr * hom_size(k, a, b) + fr;
              auto value = reduce(a, cc, finest_compose(a, b, cc, g, f), k);
              if (set[slot] && table[slot] != value) {
                throw ValidationError("factoring", {k, a, b, cc, g, f},
                                      detail::concat("composition over ", a, "->", b, "->", cc,
                                                     " does not factor through level ", k));
              }
              table[slot] = value;
              set[slot] = true;
            }
        }
  }
  for (std::size_t k = 0; k + 1 < depth; ++k) {
    std::vector<FinMap> maps;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        Table t;
        for (std::size_t h = 0; h < hom_size(k + 1, a, b); ++h)
          t.push_back(a == b ? spec.monodromy[a].reductions[k][h] : h);
        maps.emplace_back(FinSet(hom_size(k + 1, a, b)), FinSet(hom_size(k, a, b)), t);
      }
    p.transitions.push_back(std::move(maps));
  }
  auto report = validate_procat(p);
  if (!report.ok()) {
    const auto& issue = report.issues.front();
    throw ValidationError("table", issue.witness, "stratified data does not define a category: " + issue.message);
  }
  return p;
}

inline ProCat build_bg(const GroupChain& chain) {
  StrataSpec spec;
  spec.strata = FinSet(1, {"pt"});
  spec.monodromy.push_back(chain);
  return build_strata(spec);
}

inline ProCat build_bg(const Group& g) { return build_bg(single(g)); }

/// The same spec with strata listed in the order perm[0], perm[1], ...
inline StrataSpec reorder_strata(const StrataSpec& spec, const std::vector<std::size_t>& perm) {
  const auto n = spec.strata.size;
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[perm[i]] = i;
  StrataSpec r;
  std::vector<std::string> labels;
  for (auto s : perm) {
    if (!spec.strata.labels.empty()) labels.push_back(spec.strata.labels[s]);
    r.monodromy.push_back(spec.monodromy[s]);
  }
  r.strata = FinSet(n, labels);
  for (auto e : spec.exits) {
    e.source = pos[e.source];
    e.target = pos[e.target];
    r.exits.push_back(std::move(e));
  }
  for (auto c : spec.compositions) {
    c.source = pos[c.source];
    c.middle = pos[c.middle];
    c.target = pos[c.target];
    r.compositions.push_back(std::move(c));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Canned examples

struct CannedExample {
  std::string name;
  std::string description;
  std::optional<StrataSpec> spec; // when the example is stratified data
  GaloisPresentation presentation;
};

inline ExitSet trivial_exit(std::size_t source, std::size_t target) {
  return {source, target, 1, {0}, {0}};
}

inline StrataSpec two_curves_spec() {
  // Two strata, each curve minus one meeting point; specialisation runs both ways.
  StrataSpec s;
  s.strata = FinSet(2, {"X0", "X1"});
  s.monodromy = {single(cyclic_group(1)), single(cyclic_group(1))};
  s.exits = {trivial_exit(0, 1), trivial_exit(1, 0)};
  s.compositions = {{0, 1, 0, {0}}, {1, 0, 1, {0}}};
  return s;
}

inline StrataSpec open_closed_spec() {
  StrataSpec s;
  s.strata = FinSet(2, {"U", "Z"});
  s.monodromy = {single(cyclic_group(1)), single(cyclic_group(1))};
  s.exits = {trivial_exit(0, 1)};
  return s;
}

inline StrataSpec z2_exit_spec() {
  // Z/2 monodromy on the open stratum acting freely on two exit paths.
  StrataSpec s;
  s.strata = FinSet(2, {"U", "Z"});
  s.monodromy = {single(cyclic_group(2)), single(cyclic_group(1))};
  s.exits = {{0, 1, 2, {0, 1}, {0, 1, 1, 0}}};
  return s;
}

inline StrataSpec three_stratum_spec() {
  StrataSpec s;
  s.strata = FinSet(3, {"X2", "X1", "X0"});
  s.monodromy = {single(cyclic_group(1)), single(cyclic_group(1)), single(cyclic_group(1))};
  s.exits = {trivial_exit(0, 1), trivial_exit(1, 2), trivial_exit(0, 2)};
  s.compositions = {{0, 1, 2, {0}}};
  return s;
}

inline std::vector<CannedExample> canned_examples() {
  std::vector<CannedExample> out;
  auto add_bg = [&](std::string name, std::string doc, const GroupChain& chain) {
    auto base = std::make_shared<const ProCat>(build_bg(chain));
    out.push_back({std::move(name), std::move(doc), std::nullopt, all_points(base)});
  };
  auto add_spec = [&](std::string name, std::string doc, const StrataSpec& spec,
                      std::optional<std::vector<std::size_t>> points = std::nullopt) {
    auto base = std::make_shared<const ProCat>(build_strata(spec));
    auto g = all_points(base);
    if (points) g.fibre_points = *points;
    out.push_back({std::move(name), std::move(doc), spec, g});
  };
  add_bg("terminal", "one object, one arrow", single(cyclic_group(1)));
  add_bg("bz2", "one stratum with monodromy Z/2", single(cyclic_group(2)));
  add_bg("bs3", "one stratum with monodromy S3", single(symmetric_group_3()));
  add_bg("bzhat", "truncation Z/2 <- Z/4 of the profinite integers", cyclic_chain({2, 4}));
  add_spec("open-closed", "open stratum U specialising to closed stratum Z along one exit path", open_closed_spec());
  add_spec("two-curves", "two curves meeting in two points, stratified over a preorder", two_curves_spec());
  add_spec("three-stratum", "chain of three strata X2 -> X1 -> X0", three_stratum_spec());
  add_spec("z2-exit", "Z/2 monodromy on the open stratum acting freely on two exit paths", z2_exit_spec());
  add_spec("two-curves-one-point", "the two-curves category with a fibre functor at X0 only", two_curves_spec(),
           std::vector<std::size_t>{0});
  return out;
}

inline std::optional<CannedExample> canned_example(const std::string& name) {
  for (auto& e : canned_examples())
    if (e.name == name) return e;
  return std::nullopt;
}

} // namespace exo
