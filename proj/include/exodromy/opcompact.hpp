#pragma once

// Opcompactness of finite-valued continuous functors against chain-indexed
// cofiltered limits. A chain diagram D(L) -> ... -> D(0) has limit D(L); the
// checker certifies that colim_i Hom(D(i), F) -> Hom(D(L), F) is bijective and,
// for surjectivity, reconstructs a natural lift through the clopen splitting
// X_k = E_k + Y_k of  X_k = coprod_x H_x x D(k)(x),  H_x = coprod_y Hom(x, y).

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"
#include "exodromy/funcat.hpp"
#include "exodromy/procat.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

namespace exo {

/// arrows[k] : nodes[k+1] => nodes[k]. Arrows need not be surjective.
struct ChainDiagram {
  std::shared_ptr<const ProCat> base;
  std::vector<CtsFunctor> nodes;
  std::vector<NatTrans> arrows;

  std::size_t length() const { return nodes.size(); }
  const CtsFunctor& limit() const { return nodes.back(); }
};

inline ValidationReport validate_chain(const ChainDiagram& d) {
  ValidationReport report;
  if (d.nodes.empty()) {
    report.add("shape", "a chain diagram needs at least one node");
    return report;
  }
  if (d.arrows.size() + 1 != d.nodes.size()) {
    report.add("shape", detail::concat(d.arrows.size(), " arrows for ", d.nodes.size(), " nodes"));
    return report;
  }
  for (std::size_t k = 0; k < d.nodes.size(); ++k) {
    if (!d.nodes[k].base || !(d.nodes[k].base == d.base || *d.nodes[k].base == *d.base)) {
      report.add("shape", detail::concat("node ", k, " lives on another pro-category"), {k});
      continue;
    }
    report.merge(check_functor(d.nodes[k]), detail::concat("node ", k));
  }
  if (!report.ok()) return report;
  for (std::size_t k = 0; k < d.arrows.size(); ++k) {
    const auto& a = d.arrows[k];
    if (!(a.source() == d.nodes[k + 1]) || !(a.target() == d.nodes[k])) {
      report.add("shape", detail::concat("arrow ", k, " does not run from node ", k + 1, " to node ", k), {k});
      continue;
    }
    report.merge(check_nat_trans(a), detail::concat("arrow ", k + 1, "->", k));
  }
  return report;
}

/// Component tables of the composite D(from) => D(to), to <= from.
inline std::vector<Table> chain_projection(const ChainDiagram& d, std::size_t from, std::size_t to) {
  const auto n = d.base->object_count();
  std::vector<Table> p(n);
  for (std::size_t x = 0; x < n; ++x) p[x] = FinMap::identity(d.nodes[from].values[x]).table();
  for (std::size_t k = from; k > to; --k) {
    for (std::size_t x = 0; x < n; ++x)
      for (auto& v : p[x]) v = d.arrows[k - 1].component(x)(v);
  }
  return p;
}

/// Chooses values for elements of D(k)(x) that are not hit from the limit.
/// Arguments: object, level, element, |F(x)|. The default sends them to 0.
using LiftPolicy = std::function<std::size_t(std::size_t, std::size_t, std::size_t, std::size_t)>;

struct InjectivityWitness {
  std::size_t level = 0;      // i
  std::size_t alpha = 0;      // indices into Hom(D(i), F) in enumeration order
  std::size_t beta = 0;
  std::size_t agree_level = 0; // least j >= i where both agree on D(j)
};

struct SurjectivityWitness {
  std::size_t alpha = 0;               // index into Hom(D(L), F)
  std::vector<std::size_t> factor_levels; // j_x per object
  std::size_t factor_level = 0;        // j = max_x j_x
  std::vector<std::size_t> defects;    // |Y_k| for k = j, ..., L
  std::size_t lift_level = 0;          // least k >= j with Y_k empty
  std::vector<Table> lift;             // natural D(k) => F through which alpha factors
};

struct OpcompactWitness {
  std::vector<std::size_t> hom_counts;  // |Hom(D(i), F)| per level
  std::size_t colimit_classes = 0;
  std::vector<InjectivityWitness> injectivity;
  std::vector<SurjectivityWitness> surjectivity;
  ValidationReport report;

  bool ok() const { return report.ok(); }
};

namespace detail {

inline std::vector<Table> pull_back(const std::vector<Table>& alpha, const std::vector<Table>& proj) {
  std::vector<Table> r(alpha.size());
  for (std::size_t x = 0; x < alpha.size(); ++x) {
    r[x].resize(proj[x].size());
    for (std::size_t e = 0; e < proj[x].size(); ++e) r[x][e] = alpha[x][proj[x][e]];
  }
  return r;
}

/// Y_k as the list of (x, y, h, e) with the naturality square failing or undefined.
struct Defect {
  std::size_t x, y, h, e;
  friend bool operator<(const Defect& a, const Defect& b) {
    return std::tie(a.x, a.y, a.h, a.e) < std::tie(b.x, b.y, b.h, b.e);
  }
};

} // namespace detail

/// Natural transformations D(i) => F for every level of the chain, in enumeration order.
inline std::vector<std::vector<std::vector<Table>>> chain_hom_sets(const ChainDiagram& d, const CtsFunctor& f) {
  std::vector<std::vector<std::vector<Table>>> homs(d.length());
  for (std::size_t i = 0; i < d.length(); ++i) {
    for_each_transformation(d.nodes[i], f, [&](const std::vector<Table>& t) {
      homs[i].push_back(t);
      return true;
    });
  }
  return homs;
}

inline OpcompactWitness opcompactness_check(const ChainDiagram& d, const CtsFunctor& f,
                                            const LiftPolicy& policy = {}) {
  OpcompactWitness w;
  auto valid = validate_chain(d);
  if (!valid.ok()) throw ValidationError("diagram", {}, "invalid chain diagram:\n" + valid.to_string());
  auto fcheck = check_functor(f);
  if (!fcheck.ok()) throw ValidationError("functor", {}, "invalid target functor:\n" + fcheck.to_string());
  require_same_base(d.limit(), f, "opcompactness_check");

  const auto& base = *d.base;
  const auto n = base.object_count();
  const auto top = d.length() - 1;
  const auto ff = refine(f, base.finest());
  auto homs = chain_hom_sets(d, f);
  for (const auto& h : homs) w.hom_counts.push_back(h.size());

  // Colimit of the hom chain: union-find on the disjoint union, identifying
  // alpha in Hom(D(i),F) with its pullback in Hom(D(i+1),F).
  std::vector<std::size_t> offset(d.length() + 1, 0);
  for (std::size_t i = 0; i < d.length(); ++i) offset[i + 1] = offset[i] + homs[i].size();
  std::vector<std::map<std::vector<Table>, std::size_t>> index(d.length());
  for (std::size_t i = 0; i < d.length(); ++i)
    for (std::size_t a = 0; a < homs[i].size(); ++a) index[i][homs[i][a]] = a;
  DisjointSets classes(offset.back());
  std::vector<std::vector<std::vector<Table>>> proj_to(d.length());
  for (std::size_t i = 0; i < d.length(); ++i) {
    proj_to[i].resize(d.length());
    for (std::size_t j = i; j < d.length(); ++j) proj_to[i][j] = chain_projection(d, j, i);
  }
  for (std::size_t i = 0; i + 1 < d.length(); ++i) {
    for (std::size_t a = 0; a < homs[i].size(); ++a) {
      auto pulled = detail::pull_back(homs[i][a], proj_to[i][i + 1]);
      auto it = index[i + 1].find(pulled);
      if (it == index[i + 1].end()) {
        w.report.add("internal", detail::concat("pullback of transformation ", a, " at level ", i,
                                                " is not natural"), {i, a});
        return w;
      }
      classes.unite(offset[i] + a, offset[i + 1] + it->second);
    }
  }
  classes.labelling(w.colimit_classes);

  // Canonical map on classes: each class maps to the pullback of any member to
  // the limit. Injective iff no two classes reach the same transformation;
  // surjective iff every limit transformation is reached.
  std::vector<std::size_t> class_of_limit(homs[top].size());
  for (std::size_t a = 0; a < homs[top].size(); ++a) class_of_limit[a] = classes.find(offset[top] + a);
  {
    std::vector<std::size_t> sorted = class_of_limit;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      w.report.add("injectivity", "two limit transformations fall in one colimit class");
    }
    if (w.colimit_classes != homs[top].size()) {
      w.report.add("bijectivity", detail::concat(w.colimit_classes, " colimit classes but ", homs[top].size(),
                                                 " transformations out of the limit"));
    }
  }

  // Injectivity witnesses: pairs at level i that agree on the limit, with the
  // least level where they already agree.
  for (std::size_t i = 0; i < d.length(); ++i) {
    std::map<std::vector<Table>, std::size_t> first_with_limit;
    for (std::size_t a = 0; a < homs[i].size(); ++a) {
      auto at_limit = detail::pull_back(homs[i][a], proj_to[i][top]);
      auto [it, fresh] = first_with_limit.emplace(at_limit, a);
      if (fresh) continue;
      const auto b = it->second;
      std::size_t j = i;
      while (detail::pull_back(homs[i][a], proj_to[i][j]) != detail::pull_back(homs[i][b], proj_to[i][j])) ++j;
      w.injectivity.push_back({i, b, a, j});
    }
  }

  // Surjectivity witnesses via the E_k / Y_k decomposition.
  std::vector<CtsFunctor> fine_nodes;
  for (const auto& node : d.nodes) fine_nodes.push_back(refine(node, base.finest()));
  const auto& top_cat = base.level(base.finest());
  for (std::size_t a = 0; a < homs[top].size(); ++a) {
    const auto& alpha = homs[top][a];
    SurjectivityWitness s;
    s.alpha = a;
    // j_x: least level where alpha_x is constant on the fibres of D(L)(x) -> D(j)(x).
    for (std::size_t x = 0; x < n; ++x) {
      std::size_t j = 0;
      for (;; ++j) {
        const auto& p = proj_to[j][top][x];
        std::vector<std::size_t> seen(d.nodes[j].value_size(x), detail::unset);
        bool constant = true;
        for (std::size_t e = 0; e < p.size() && constant; ++e) {
          if (seen[p[e]] == detail::unset) seen[p[e]] = alpha[x][e];
          else if (seen[p[e]] != alpha[x][e]) constant = false;
        }
        if (constant) break;
      }
      s.factor_levels.push_back(j);
    }
    s.factor_level = n == 0 ? 0 : *std::max_element(s.factor_levels.begin(), s.factor_levels.end());

    // Pointwise lifts alpha_{k,x} : D(k)(x) -> F(x) for k >= j; unset when impossible.
    auto lift_at = [&](std::size_t k) {
      std::vector<Table> lift(n);
      for (std::size_t x = 0; x < n; ++x) {
        lift[x].assign(d.nodes[k].value_size(x), detail::unset);
        const auto& p = proj_to[k][top][x];
        for (std::size_t e = 0; e < p.size(); ++e) lift[x][p[e]] = alpha[x][e];
        for (std::size_t e = 0; e < lift[x].size(); ++e) {
          if (lift[x][e] != detail::unset || f.value_size(x) == 0) continue;
          if (k == s.factor_level) {
            lift[x][e] = policy ? policy(x, k, e, f.value_size(x)) % f.value_size(x) : 0;
          }
        }
      }
      return lift;
    };
    // Lifts at k > j are alpha_j composed with the projection.
    const auto base_lift = lift_at(s.factor_level);
    std::vector<FinSet> ys;
    std::vector<FinMap> ymaps;
    std::vector<std::vector<detail::Defect>> defect_lists;
    std::optional<std::size_t> found;
    for (std::size_t k = s.factor_level; k <= top; ++k) {
      auto lift = detail::pull_back(base_lift, proj_to[s.factor_level][k]);
      std::vector<detail::Defect> defects;
      const auto& node = fine_nodes[k];
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
          for (std::size_t h = 0; h < top_cat.hom_size(x, y); ++h)
            for (std::size_t e = 0; e < node.value_size(x); ++e) {
              auto lhs = lift[y][node.apply(x, y, h, e)];
              auto src = lift[x][e];
              if (lhs == detail::unset || src == detail::unset || lhs != ff.apply(x, y, h, src)) {
                defects.push_back({x, y, h, e});
              }
            }
      ys.emplace_back(defects.size());
      s.defects.push_back(defects.size());
      if (k > s.factor_level) {
        // Y_k -> Y_{k-1}: (x, y, h, e) |-> (x, y, h, p(e)); a defect stays a defect below.
        const auto& prev = defect_lists.back();
        std::vector<std::size_t> table;
        for (const auto& def : defects) {
          detail::Defect down{def.x, def.y, def.h, d.arrows[k - 1].component(def.x)(def.e)};
          auto it = std::lower_bound(prev.begin(), prev.end(), down);
          if (it == prev.end() || it->x != down.x || it->y != down.y || it->h != down.h || it->e != down.e) {
            w.report.add("internal", detail::concat("defect at level ", k, " does not map to a defect at level ",
                                                    k - 1), {a, k});
            return w;
          }
          table.push_back(static_cast<std::size_t>(it - prev.begin()));
        }
        ymaps.emplace_back(ys[ys.size() - 1], ys[ys.size() - 2], table);
      }
      defect_lists.push_back(std::move(defects));
      if (!chain_limit_nonempty(ys, ymaps)) {
        found = k;
        s.lift = lift;
        break;
      }
    }
    if (!found) {
      w.report.add("surjectivity", detail::concat("no level carries a natural lift of limit transformation ", a),
                   {a});
      w.surjectivity.push_back(std::move(s));
      continue;
    }
    s.lift_level = *found;
    // The lift must be natural and must pull back to alpha.
    auto dk = std::make_shared<const CtsFunctor>(d.nodes[s.lift_level]);
    NatTrans lift(dk, std::make_shared<const CtsFunctor>(f), s.lift);
    if (!check_nat_trans(lift).ok()) {
      w.report.add("surjectivity", detail::concat("lift of transformation ", a, " at level ", s.lift_level,
                                                  " is not natural"), {a, s.lift_level});
    }
    if (detail::pull_back(s.lift, proj_to[s.lift_level][top]) != alpha) {
      w.report.add("surjectivity", detail::concat("lift of transformation ", a, " does not restrict to it"),
                   {a, s.lift_level});
    }
    w.surjectivity.push_back(std::move(s));
  }
  return w;
}

} // namespace exo
