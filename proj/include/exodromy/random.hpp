#pragma once

// Seeded generators for the property suites. Every draw goes through
// rng() % n so that a seed fixes the instance on every platform.

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"
#include "exodromy/funcat.hpp"
#include "exodromy/galois.hpp"
#include "exodromy/opcompact.hpp"
#include "exodromy/procat.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace exo {

using Rng = std::mt19937_64;

inline std::size_t draw(Rng& rng, std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); }

struct ProCatBounds {
  std::size_t max_objects = 2;
  std::size_t max_hom = 3;
  std::size_t max_levels = 2;
  std::size_t max_carrier = 3; // carrier sets of the concrete model
};

namespace detail {

// A category of maps between small sets, closed under composition. Hom sizes
// above the bound make the draw fail.
inline std::optional<FinCat> concrete_category(Rng& rng, const ProCatBounds& b) {
  const auto n = 1 + draw(rng, b.max_objects);
  std::vector<std::size_t> carrier(n);
  for (auto& s : carrier) s = 1 + draw(rng, b.max_carrier);
  std::vector<std::vector<Table>> homs(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    Table id(carrier[x]);
    std::iota(id.begin(), id.end(), std::size_t{0});
    homs[x * n + x].push_back(id);
  }
  const auto generators = draw(rng, 2 * n + 1);
  for (std::size_t k = 0; k < generators; ++k) {
    auto x = draw(rng, n), y = draw(rng, n);
    Table t(carrier[x]);
    for (auto& v : t) v = draw(rng, carrier[y]);
    auto& h = homs[x * n + y];
    if (std::find(h.begin(), h.end(), t) == h.end()) h.push_back(t);
  }
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          for (std::size_t f = 0; f < homs[x * n + y].size(); ++f)
            for (std::size_t g = 0; g < homs[y * n + z].size(); ++g) {
              const auto& ft = homs[x * n + y][f];
              const auto& gt = homs[y * n + z][g];
              Table c(ft.size());
              for (std::size_t i = 0; i < ft.size(); ++i) c[i] = gt[ft[i]];
              auto& h = homs[x * n + z];
              if (std::find(h.begin(), h.end(), c) != h.end()) continue;
              if (h.size() == b.max_hom) return std::nullopt;
              h.push_back(std::move(c));
              grew = true;
            }
  }
  // Shuffle each hom so identities do not always sit at index 0.
  for (auto& h : homs) std::shuffle(h.begin(), h.end(), rng);
  std::vector<std::size_t> sizes;
  for (const auto& h : homs) sizes.push_back(h.size());
  auto c = FinCat::with_hom_sizes(FinSet(n), sizes);
  auto index_of = [&](std::size_t x, std::size_t y, const Table& t) {
    const auto& h = homs[x * n + y];
    return static_cast<std::size_t>(std::find(h.begin(), h.end(), t) - h.begin());
  };
  for (std::size_t x = 0; x < n; ++x) {
    Table id(carrier[x]);
    std::iota(id.begin(), id.end(), std::size_t{0});
    c.identities[x] = index_of(x, x, id);
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t f = 0; f < sizes[x * n + y]; ++f)
          for (std::size_t g = 0; g < sizes[y * n + z]; ++g) {
            const auto& ft = homs[x * n + y][f];
            const auto& gt = homs[y * n + z][g];
            Table comp(ft.size());
            for (std::size_t i = 0; i < ft.size(); ++i) comp[i] = gt[ft[i]];
            c.composition[c.triple_index(x, y, z)][g * sizes[x * n + y] + f] = index_of(x, z, comp);
          }
  return c;
}

} // namespace detail

/// Quotient of `c` by the smallest congruence identifying arrows f1, f2 : x -> y.
/// Returns the coarse category and the quotient maps, one per hom-set.
inline std::pair<FinCat, std::vector<FinMap>> congruence_quotient(const FinCat& c, std::size_t x, std::size_t y,
                                                                  std::size_t f1, std::size_t f2) {
  const auto n = c.object_count();
  std::vector<DisjointSets> sets;
  for (std::size_t i = 0; i < n * n; ++i) sets.emplace_back(c.homs[i].size);
  sets[x * n + y].unite(f1, f2);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t d = 0; d < n; ++d)
          for (std::size_t f = 0; f < c.hom_size(a, b); ++f)
            for (std::size_t g = 0; g < c.hom_size(b, d); ++g) {
              // g ~ g' and f ~ f' force g f ~ g' f'; checking against roots suffices.
              auto fr = sets[a * n + b].find(f);
              auto gr = sets[b * n + d].find(g);
              auto lhs = c.compose(a, b, d, g, f);
              auto rhs = c.compose(a, b, d, gr, fr);
              if (sets[a * n + d].unite(lhs, rhs)) grew = true;
            }
  }
  std::vector<std::size_t> sizes(n * n);
  std::vector<Table> labels(n * n);
  for (std::size_t i = 0; i < n * n; ++i) labels[i] = sets[i].labelling(sizes[i]);
  auto q = FinCat::with_hom_sizes(c.objects, sizes);
  for (std::size_t a = 0; a < n; ++a) q.identities[a] = labels[a * n + a][c.identity(a)];
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t f = 0; f < c.hom_size(a, b); ++f)
          for (std::size_t g = 0; g < c.hom_size(b, d); ++g) {
            auto lf = labels[a * n + b][f];
            auto lg = labels[b * n + d][g];
            q.composition[q.triple_index(a, b, d)][lg * sizes[a * n + b] + lf] =
                labels[a * n + d][c.compose(a, b, d, g, f)];
          }
  std::vector<FinMap> maps;
  for (std::size_t i = 0; i < n * n; ++i) maps.emplace_back(c.homs[i], q.homs[i], labels[i]);
  return {q, maps};
}

/// A valid ProCat within the bounds: the finest level is a concrete category,
/// a coarser level (if drawn) is a congruence quotient of it.
inline ProCat random_procat(Rng& rng, const ProCatBounds& b = {}) {
  std::optional<FinCat> fine;
  while (!(fine = detail::concrete_category(rng, b))) {
  }
  const auto levels = 1 + draw(rng, b.max_levels);
  std::vector<FinCat> chain{*fine};
  std::vector<std::vector<FinMap>> transitions;
  for (std::size_t k = 1; k < levels; ++k) {
    const auto& top = chain.front();
    const auto n = top.object_count();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n * n; ++i)
      if (top.homs[i].size >= 2) candidates.push_back(i);
    std::pair<FinCat, std::vector<FinMap>> q;
    if (candidates.empty() || draw(rng, 4) == 0) {
      q.first = top;
      for (const auto& h : top.homs) q.second.push_back(FinMap::identity(h));
    } else {
      auto i = candidates[draw(rng, candidates.size())];
      auto f1 = draw(rng, top.homs[i].size);
      auto f2 = (f1 + 1 + draw(rng, top.homs[i].size - 1)) % top.homs[i].size;
      q = congruence_quotient(top, i / n, i % n, f1, f2);
    }
    chain.insert(chain.begin(), std::move(q.first));
    transitions.insert(transitions.begin(), std::move(q.second));
  }
  ProCat p;
  p.objects = chain.front().objects;
  p.levels = std::move(chain);
  p.transitions = std::move(transitions);
  return p;
}

/// A functor at `level` with values of size <= max_size, drawn by shuffled search.
inline CtsFunctor random_functor(Rng& rng, const std::shared_ptr<const ProCat>& base, std::size_t level,
                                 std::size_t max_size, std::size_t min_size = 0) {
  const auto n = base->object_count();
  for (std::size_t attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::size_t> sizes(n);
    for (auto& s : sizes) s = min_size + draw(rng, max_size - min_size + 1);
    std::optional<CtsFunctor> found;
    SearchOptions opts;
    opts.limit = 1;
    opts.shuffle = &rng;
    for_each_functor(base, level, sizes, [&](const CtsFunctor& f) {
      found = f;
      return false;
    }, opts);
    if (found) return *found;
  }
  return min_size == 0 ? empty_functor(base, level) : constant_functor(base, level, min_size);
}

struct ChainBounds {
  std::size_t max_length = 5;
  std::size_t max_size = 4;
};

/// D_k is a quotient of D_{k+1}, sometimes with an extra summand so that the
/// arrow is not surjective.
inline ChainDiagram random_chain(Rng& rng, const std::shared_ptr<const ProCat>& base, const ChainBounds& b = {}) {
  ChainDiagram d;
  d.base = base;
  const auto length = 1 + draw(rng, b.max_length);
  const auto level = base->finest();
  std::vector<CtsFunctor> nodes{random_functor(rng, base, level, b.max_size, 1)};
  std::vector<NatTrans> arrows;
  const auto n = base->object_count();
  while (nodes.size() < length) {
    const auto& top = nodes.front();
    std::vector<Table> label(n);
    std::vector<std::size_t> counts(n);
    auto x = draw(rng, n);
    if (top.value_size(x) >= 2 && draw(rng, 3) != 0) {
      auto a = draw(rng, top.value_size(x));
      auto c = (a + 1 + draw(rng, top.value_size(x) - 1)) % top.value_size(x);
      label = generated_congruence(top, x, a, c, counts);
    } else {
      for (std::size_t y = 0; y < n; ++y) {
        label[y].resize(top.value_size(y));
        std::iota(label[y].begin(), label[y].end(), std::size_t{0});
        counts[y] = top.value_size(y);
      }
    }
    auto q = quotient_functor(top, label, counts);
    auto node = q.functor;
    auto tables = label;
    if (draw(rng, 3) == 0) {
      auto extra = random_functor(rng, base, level, 1);
      auto sum = functor_coproduct(node, extra);
      bool fits = true;
      for (std::size_t y = 0; y < n; ++y) fits = fits && sum.functor.value_size(y) <= b.max_size;
      if (fits) {
        node = sum.functor;
        for (std::size_t y = 0; y < n; ++y)
          for (auto& v : tables[y]) v = sum.inj1.component(y)(v);
      }
    }
    arrows.insert(arrows.begin(), NatTrans(top, node, tables));
    nodes.insert(nodes.begin(), std::move(node));
  }
  d.nodes = std::move(nodes);
  d.arrows = std::move(arrows);
  // Arrow k must have nodes[k+1] as its source object, not just an equal copy.
  for (std::size_t k = 0; k < d.arrows.size(); ++k) {
    d.arrows[k] = NatTrans(d.nodes[k + 1], d.nodes[k], d.arrows[k].tables());
  }
  return d;
}

} // namespace exo
