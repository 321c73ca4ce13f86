#pragma once

// Brute-force oracles shared by the unit tests. They deliberately avoid the
// library's search code: every map is enumerated and every law re-checked by
// plain loops over the finest level.

#include "exodromy/funcat.hpp"
#include "exodromy/procat.hpp"
#include "exodromy/strat.hpp"

#include <cstddef>
#include <memory>
#include <numeric>
#include <vector>

namespace oracle {

using exo::CtsFunctor;
using exo::Table;

/// Every function {0..n-1} -> {0..m-1}, in lexicographic order.
inline std::vector<Table> all_tables(std::size_t n, std::size_t m) {
  std::vector<Table> out;
  if (n > 0 && m == 0) return out;
  Table t(n, 0);
  while (true) {
    out.push_back(t);
    std::size_t i = n;
    while (i > 0 && t[i - 1] + 1 == m) t[--i] = 0;
    if (i == 0) break;
    ++t[i - 1];
  }
  return out;
}

inline std::size_t act(const CtsFunctor& f, std::size_t x, std::size_t y, std::size_t h_finest, std::size_t a) {
  const auto& p = *f.base;
  return f.actions[x * p.object_count() + y][p.project(x, y, h_finest, p.finest(), f.level)][a];
}

/// Naturality checked against every finest-level arrow.
inline bool natural(const CtsFunctor& f, const CtsFunctor& g, const std::vector<Table>& comps) {
  const auto& p = *f.base;
  const auto n = p.object_count();
  const auto& top = p.level(p.finest());
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < top.hom_size(x, y); ++h)
        for (std::size_t a = 0; a < f.values[x].size; ++a)
          if (comps[y][act(f, x, y, h, a)] != act(g, x, y, h, comps[x][a])) return false;
  return true;
}

/// All natural transformations f => g, by enumerating every family of component maps.
inline std::vector<std::vector<Table>> nat_trans(const CtsFunctor& f, const CtsFunctor& g) {
  const auto n = f.base->object_count();
  std::vector<std::vector<Table>> choices(n);
  for (std::size_t x = 0; x < n; ++x) choices[x] = all_tables(f.values[x].size, g.values[x].size);
  std::vector<std::vector<Table>> out;
  std::vector<std::size_t> idx(n, 0);
  for (const auto& c : choices)
    if (c.empty()) return out;
  while (true) {
    std::vector<Table> comps(n);
    for (std::size_t x = 0; x < n; ++x) comps[x] = choices[x][idx[x]];
    if (natural(f, g, comps)) out.push_back(comps);
    std::size_t i = 0;
    while (i < n && ++idx[i] == choices[i].size()) idx[i++] = 0;
    if (i == n) break;
  }
  return out;
}

inline bool bijective(const Table& t, std::size_t target) {
  if (t.size() != target) return false;
  std::vector<bool> hit(target, false);
  for (auto v : t) {
    if (hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

inline bool isomorphic(const CtsFunctor& f, const CtsFunctor& g) {
  for (const auto& comps : nat_trans(f, g)) {
    bool iso = true;
    for (std::size_t x = 0; x < comps.size(); ++x) iso = iso && bijective(comps[x], g.values[x].size);
    if (iso) return true;
  }
  return false;
}

/// Functor laws at the finest level, by direct loops.
inline bool functorial(const CtsFunctor& f) {
  const auto& p = *f.base;
  const auto n = p.object_count();
  const auto& c = p.level(p.finest());
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < f.values[x].size; ++a)
      if (act(f, x, x, c.identity(x), a) != a) return false;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t fa = 0; fa < c.hom_size(x, y); ++fa)
          for (std::size_t ga = 0; ga < c.hom_size(y, z); ++ga)
            for (std::size_t a = 0; a < f.values[x].size; ++a)
              if (act(f, x, z, c.compose(x, y, z, ga, fa), a) != act(f, y, z, ga, act(f, x, y, fa, a))) return false;
  return true;
}

/// Number of orbits of a one-object functor (a G-set).
inline std::size_t orbit_count(const CtsFunctor& f) {
  const auto k = f.values[0].size;
  const auto& hom = f.base->level(f.level).hom(0, 0);
  std::vector<std::size_t> orbit(k, k);
  std::size_t count = 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (orbit[a] != k) continue;
    for (std::size_t g = 0; g < hom.size; ++g) orbit[f.actions[0][g][a]] = count;
    ++count;
  }
  return count;
}

/// One-object functor from a group action table: action[g][a] = g.a.
inline CtsFunctor group_set(std::shared_ptr<const exo::ProCat> base, std::size_t level, std::vector<Table> action) {
  auto f = exo::blank_functor(base, level, {exo::FinSet(action.empty() ? 0 : action[0].size())});
  f.actions[0] = std::move(action);
  return f;
}

/// Left regular representation of a group presented as a one-object category.
inline CtsFunctor regular(std::shared_ptr<const exo::ProCat> base, std::size_t level) {
  const auto& c = base->level(level);
  const auto order = c.hom_size(0, 0);
  std::vector<Table> action(order, Table(order));
  for (std::size_t g = 0; g < order; ++g)
    for (std::size_t a = 0; a < order; ++a) action[g][a] = c.compose(0, 0, 0, g, a);
  return group_set(std::move(base), level, action);
}

inline std::shared_ptr<const exo::ProCat> bg(const exo::Group& g) {
  return std::make_shared<const exo::ProCat>(exo::build_bg(g));
}

inline std::shared_ptr<const exo::ProCat> bg(const exo::GroupChain& g) {
  return std::make_shared<const exo::ProCat>(exo::build_bg(g));
}

} // namespace oracle
