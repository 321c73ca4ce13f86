#pragma once

// Pro-objects presented as finite inverse chains. Level 0 is the coarsest
// quotient and the last level is the limit of the chain; transitions point
// from level k+1 down to level k.

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace exo {

/// Inverse chain levels[0] <- levels[1] <- ... of finite sets with surjective transitions.
struct ProfiniteSet {
  std::vector<FinSet> levels;
  std::vector<FinMap> transitions; // transitions[k] : levels[k+1] -> levels[k]

  std::size_t depth() const noexcept { return levels.size(); }
  std::size_t finest() const noexcept { return levels.size() - 1; }
  const FinSet& limit() const { return levels.back(); }

  /// Image of an element of level `from` at the coarser level `to`.
  std::size_t project(std::size_t element, std::size_t from, std::size_t to) const {
    if (to > from || from >= levels.size()) {
      throw ShapeError(detail::concat("ProfiniteSet::project: cannot go from level ", from, " to ", to));
    }
    for (std::size_t k = from; k > to; --k) element = transitions[k - 1](element);
    return element;
  }

  ValidationReport validate() const {
    ValidationReport report;
    if (levels.empty()) report.add("empty-chain", "a profinite set needs at least one level");
    if (transitions.size() + 1 != levels.size()) {
      report.add("shape", detail::concat(transitions.size(), " transitions for ", levels.size(), " levels"));
      return report;
    }
    for (std::size_t k = 0; k < transitions.size(); ++k) {
      ++report.checked;
      if (transitions[k].source().size != levels[k + 1].size ||
          transitions[k].target().size != levels[k].size) {
        report.add("shape", detail::concat("transition ", k, " has the wrong endpoints"), {k});
      } else if (!transitions[k].is_surjective()) {
        report.add("surjectivity", detail::concat("transition ", k + 1, " -> ", k, " is not surjective"), {k});
      }
    }
    return report;
  }
};

/// A clopen subset of a profinite set: elements of the limit whose image at
/// `level` lies in `elements` (sorted, duplicate-free). A singleton is a basis set.
struct ClopenQuery {
  std::size_t level = 0;
  std::vector<std::size_t> elements;

  static ClopenQuery basis(std::size_t level, std::size_t element) { return {level, {element}}; }

  friend bool operator==(const ClopenQuery&, const ClopenQuery&) = default;
};

/// Membership mask over the limit level.
inline std::vector<bool> select(const ProfiniteSet& s, const ClopenQuery& q) {
  if (q.level >= s.depth()) throw ShapeError("select: query level beyond the chain");
  std::vector<bool> allowed(s.levels[q.level].size, false);
  for (auto e : q.elements) allowed.at(e) = true;
  std::vector<bool> mask(s.limit().size);
  for (std::size_t phi = 0; phi < mask.size(); ++phi) mask[phi] = allowed[s.project(phi, s.finest(), q.level)];
  return mask;
}

/// The same clopen set expressed at a finer level.
inline ClopenQuery refine(const ProfiniteSet& s, const ClopenQuery& q, std::size_t level) {
  if (level < q.level || level >= s.depth()) throw ShapeError("refine: target level must be finer");
  std::vector<bool> allowed(s.levels[q.level].size, false);
  for (auto e : q.elements) allowed.at(e) = true;
  ClopenQuery out{level, {}};
  for (std::size_t e = 0; e < s.levels[level].size; ++e) {
    if (allowed[s.project(e, level, q.level)]) out.elements.push_back(e);
  }
  return out;
}

/// Intersection realised as one query at the finer of the two levels: the
/// constraint there is the set of elements whose projections satisfy both.
inline ClopenQuery intersect(const ProfiniteSet& s, const ClopenQuery& a, const ClopenQuery& b) {
  auto level = std::max(a.level, b.level);
  auto ra = refine(s, a, level);
  auto rb = refine(s, b, level);
  ClopenQuery out{level, {}};
  std::set_intersection(ra.elements.begin(), ra.elements.end(), rb.elements.begin(), rb.elements.end(),
                        std::back_inserter(out.elements));
  return out;
}

inline ClopenQuery complement(const ProfiniteSet& s, const ClopenQuery& q) {
  ClopenQuery out{q.level, {}};
  std::vector<bool> in(s.levels.at(q.level).size, false);
  for (auto e : q.elements) in.at(e) = true;
  for (std::size_t e = 0; e < in.size(); ++e) {
    if (!in[e]) out.elements.push_back(e);
  }
  return out;
}

/// One level of a pro-category: a finite category with explicit composition tables.
struct FinCat {
  FinSet objects;
  std::vector<FinSet> homs;               // homs[x * n + y] = Hom(x, y)
  std::vector<std::size_t> identities;    // identities[x] in Hom(x, x)
  std::vector<std::vector<std::size_t>> composition;
  // composition[(x * n + y) * n + z][g * |Hom(x,y)| + f] = g ∘ f for f: x->y, g: y->z

  std::size_t object_count() const noexcept { return objects.size; }
  std::size_t hom_index(std::size_t x, std::size_t y) const { return x * objects.size + y; }
  std::size_t triple_index(std::size_t x, std::size_t y, std::size_t z) const {
    return (x * objects.size + y) * objects.size + z;
  }
  const FinSet& hom(std::size_t x, std::size_t y) const { return homs.at(hom_index(x, y)); }
  std::size_t hom_size(std::size_t x, std::size_t y) const { return hom(x, y).size; }
  std::size_t identity(std::size_t x) const { return identities.at(x); }

  std::size_t compose(std::size_t x, std::size_t y, std::size_t z, std::size_t g, std::size_t f) const {
    return composition.at(triple_index(x, y, z)).at(g * hom_size(x, y) + f);
  }

  /// Empty category on `n` objects with all tables sized for the given hom sizes and zero-filled.
  static FinCat with_hom_sizes(FinSet objects, const std::vector<std::size_t>& sizes) {
    FinCat c;
    const auto n = objects.size;
    c.objects = std::move(objects);
    for (auto s : sizes) c.homs.emplace_back(s);
    c.identities.assign(n, 0);
    c.composition.resize(n * n * n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          c.composition[c.triple_index(x, y, z)].assign(sizes[x * n + y] * sizes[y * n + z], 0);
    return c;
  }

  friend bool operator==(const FinCat&, const FinCat&) = default;
};

inline ValidationReport validate_fincat(const FinCat& c) {
  ValidationReport report;
  const auto n = c.object_count();
  if (c.homs.size() != n * n) {
    report.add("shape", detail::concat("expected ", n * n, " hom-sets, found ", c.homs.size()));
    return report;
  }
  if (c.identities.size() != n) {
    report.add("shape", detail::concat("expected ", n, " identities, found ", c.identities.size()));
    return report;
  }
  if (c.composition.size() != n * n * n) {
    report.add("shape", detail::concat("expected ", n * n * n, " composition tables, found ",
                                       c.composition.size()));
    return report;
  }
  bool shape_ok = true;
  for (std::size_t x = 0; x < n; ++x) {
    if (c.identities[x] >= c.hom_size(x, x)) {
      report.add("identity-range", detail::concat("identity of object ", x, " is not in Hom(x,x)"), {x});
      shape_ok = false;
    }
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < n; ++z) {
        const auto& table = c.composition[c.triple_index(x, y, z)];
        if (table.size() != c.hom_size(y, z) * c.hom_size(x, y)) {
          report.add("shape", detail::concat("composition table (", x, ",", y, ",", z, ") has ",
                                             table.size(), " entries"), {x, y, z});
          shape_ok = false;
          continue;
        }
        for (auto v : table) {
          if (v >= c.hom_size(x, z)) {
            report.add("composition-range",
                       detail::concat("composition (", x, ",", y, ",", z, ") leaves Hom(", x, ",", z, ")"),
                       {x, y, z});
            shape_ok = false;
            break;
          }
        }
      }
    }
  }
  if (!shape_ok) return report;

  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t f = 0; f < c.hom_size(x, y); ++f) {
        ++report.checked;
        if (c.compose(x, y, y, c.identity(y), f) != f) {
          report.add("left-identity",
                     detail::concat("id_", y, " . f != f for f = ", f, " in Hom(", x, ",", y, ")"), {x, y, f});
        }
        if (c.compose(x, x, y, f, c.identity(x)) != f) {
          report.add("right-identity",
                     detail::concat("f . id_", x, " != f for f = ", f, " in Hom(", x, ",", y, ")"), {x, y, f});
        }
      }
    }
  }
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          for (std::size_t h = 0; h < c.hom_size(w, x); ++h)
            for (std::size_t f = 0; f < c.hom_size(x, y); ++f)
              for (std::size_t g = 0; g < c.hom_size(y, z); ++g) {
                ++report.checked;
                auto left = c.compose(w, y, z, g, c.compose(w, x, y, f, h));
                auto right = c.compose(w, x, z, c.compose(x, y, z, g, f), h);
                if (left != right) {
                  report.add("associativity",
                             detail::concat("g.(f.h) != (g.f).h for (g,f,h) = (", g, ",", f, ",", h,
                                            ") over objects ", w, "->", x, "->", y, "->", z),
                             {g, f, h, w, x, y, z});
                }
              }
  return report;
}

/// A profinitely enriched category with finitely many objects, presented as a
/// chain of finite categories on one object set with identity-on-objects,
/// hom-wise surjective functors between consecutive levels.
struct ProCat {
  FinSet objects;
  std::vector<FinCat> levels;
  std::vector<std::vector<FinMap>> transitions; // transitions[k][x*n+y] : Hom_{k+1}(x,y) -> Hom_k(x,y)

  std::size_t object_count() const noexcept { return objects.size; }
  std::size_t depth() const noexcept { return levels.size(); }
  std::size_t finest() const noexcept { return levels.size() - 1; }
  const FinCat& level(std::size_t k) const { return levels.at(k); }

  /// Image of an arrow of Hom_from(x,y) in Hom_to(x,y), to <= from.
  std::size_t project(std::size_t x, std::size_t y, std::size_t h, std::size_t from, std::size_t to) const {
    if (to > from || from >= levels.size()) {
      throw ShapeError(detail::concat("ProCat::project: cannot go from level ", from, " to ", to));
    }
    const auto idx = x * objects.size + y;
    for (std::size_t k = from; k > to; --k) h = transitions[k - 1][idx](h);
    return h;
  }

  friend bool operator==(const ProCat&, const ProCat&) = default;
};

inline ProCat single_level(FinCat c) {
  ProCat p;
  p.objects = c.objects;
  p.levels.push_back(std::move(c));
  return p;
}

inline ValidationReport validate_procat(const ProCat& p) {
  ValidationReport report;
  if (p.levels.empty()) {
    report.add("empty-chain", "a pro-category needs at least one level");
    return report;
  }
  const auto n = p.object_count();
  bool levels_ok = true;
  for (std::size_t k = 0; k < p.levels.size(); ++k) {
    if (p.levels[k].objects.size != n) {
      report.add("objects", detail::concat("level ", k, " has ", p.levels[k].objects.size,
                                           " objects, expected ", n), {k});
      levels_ok = false;
      continue;
    }
    auto r = validate_fincat(p.levels[k]);
    if (!r.ok()) levels_ok = false;
    report.merge(r, detail::concat("level ", k));
  }
  if (p.transitions.size() + 1 != p.levels.size()) {
    report.add("shape", detail::concat(p.transitions.size(), " transitions for ", p.levels.size(), " levels"));
    return report;
  }
  if (!levels_ok) return report;

  for (std::size_t k = 0; k + 1 < p.levels.size(); ++k) {
    const auto& fine = p.levels[k + 1];
    const auto& coarse = p.levels[k];
    const auto& t = p.transitions[k];
    if (t.size() != n * n) {
      report.add("shape", detail::concat("transition ", k, " has ", t.size(), " hom maps"), {k});
      continue;
    }
    bool shapes = true;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const auto& m = t[x * n + y];
        if (m.source().size != fine.hom_size(x, y) || m.target().size != coarse.hom_size(x, y)) {
          report.add("shape", detail::concat("transition ", k + 1, "->", k, " on Hom(", x, ",", y,
                                             ") has the wrong endpoints"), {k, x, y});
          shapes = false;
          continue;
        }
        ++report.checked;
        if (!m.is_surjective()) {
          std::size_t missing = 0;
          std::vector<bool> hit(m.target().size, false);
          for (auto v : m.table()) hit[v] = true;
          while (missing < hit.size() && hit[missing]) ++missing;
          report.add("surjectivity", detail::concat("transition ", k + 1, "->", k, " misses arrow ", missing,
                                                    " of Hom(", x, ",", y, ")"), {k, x, y, missing});
        }
      }
    }
    if (!shapes) continue;
    for (std::size_t x = 0; x < n; ++x) {
      ++report.checked;
      if (t[x * n + x](fine.identity(x)) != coarse.identity(x)) {
        report.add("functor-identity", detail::concat("transition ", k + 1, "->", k,
                                                      " does not preserve the identity of ", x), {k, x});
      }
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          for (std::size_t f = 0; f < fine.hom_size(x, y); ++f)
            for (std::size_t g = 0; g < fine.hom_size(y, z); ++g) {
              ++report.checked;
              auto lhs = t[x * n + z](fine.compose(x, y, z, g, f));
              auto rhs = coarse.compose(x, y, z, t[y * n + z](g), t[x * n + y](f));
              if (lhs != rhs) {
                report.add("functor-composition",
                           detail::concat("transition ", k + 1, "->", k, " breaks composition of (g,f) = (",
                                          g, ",", f, ") over ", x, "->", y, "->", z),
                           {k, g, f, x, y, z});
              }
            }
  }
  return report;
}

inline ProfiniteSet hom_pro(const ProCat& p, std::size_t x, std::size_t y) {
  if (x >= p.object_count() || y >= p.object_count()) {
    throw ShapeError(detail::concat("hom_pro: object index out of range (", x, ",", y, ")"));
  }
  ProfiniteSet s;
  for (const auto& lvl : p.levels) s.levels.push_back(lvl.hom(x, y));
  for (const auto& t : p.transitions) s.transitions.push_back(t[x * p.object_count() + y]);
  return s;
}

/// A compatible family through a finite inverse chain, one coordinate per level.
struct CompatibleFamily {
  std::vector<std::size_t> coordinates;
  std::size_t representative() const { return coordinates.back(); }
};

/// For a finite chain the limit is the last level; it is empty exactly when some
/// level is empty, because every level receives a map from the last one.
inline std::optional<CompatibleFamily> chain_limit_nonempty(const std::vector<FinSet>& levels,
                                                            const std::vector<FinMap>& transitions) {
  if (levels.empty() || transitions.size() + 1 != levels.size()) {
    throw ShapeError(detail::concat("chain_limit_nonempty: ", transitions.size(), " transitions for ",
                                    levels.size(), " levels"));
  }
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    if (transitions[k].source().size != levels[k + 1].size || transitions[k].target().size != levels[k].size) {
      throw ShapeError(detail::concat("chain_limit_nonempty: transition ", k, " has the wrong endpoints"));
    }
  }
  for (const auto& l : levels) {
    if (l.empty()) return std::nullopt;
  }
  CompatibleFamily fam;
  fam.coordinates.resize(levels.size());
  fam.coordinates.back() = 0;
  for (std::size_t k = levels.size() - 1; k > 0; --k) {
    fam.coordinates[k - 1] = transitions[k - 1](fam.coordinates[k]);
  }
  return fam;
}

} // namespace exo
