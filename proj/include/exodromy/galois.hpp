#pragma once

// Galois-category layer over C = Fun^cts(Pi, Fin) with fibre functors given by
// evaluation at chosen objects x_i of Pi.
//
// Cross-validation of the fundamental category computes, for every level k and
// fibre pair (i, j), the natural transformations ev_{x_i} => ev_{x_j} restricted
// to a generated family of level-k functors (the equaliser description of
// Hom(F_i, F_j) truncated to generators), and compares them with Hom_k(x_i, x_j).

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
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace exo {

struct GaloisPresentation {
  std::shared_ptr<const ProCat> base;
  std::vector<std::size_t> fibre_points;
  std::size_t generator_bound = 64;

  std::size_t fibre_count() const { return fibre_points.size(); }
};

inline ValidationReport validate_presentation(const GaloisPresentation& g) {
  ValidationReport report;
  if (!g.base) {
    report.add("shape", "presentation has no base category");
    return report;
  }
  report.merge(validate_procat(*g.base), "base");
  if (g.fibre_points.empty()) report.add("fibre-points", "at least one fibre point is required");
  std::vector<bool> seen(g.base->object_count(), false);
  for (std::size_t i = 0; i < g.fibre_points.size(); ++i) {
    auto x = g.fibre_points[i];
    if (x >= g.base->object_count()) {
      report.add("fibre-points", detail::concat("fibre point ", i, " names missing object ", x), {i, x});
    } else if (seen[x]) {
      report.add("fibre-points", detail::concat("object ", x, " is listed twice"), {i, x});
    } else {
      seen[x] = true;
    }
  }
  return report;
}

inline GaloisPresentation all_points(std::shared_ptr<const ProCat> base, std::size_t generator_bound = 64) {
  GaloisPresentation g{std::move(base), {}, generator_bound};
  for (std::size_t x = 0; x < g.base->object_count(); ++x) g.fibre_points.push_back(x);
  return g;
}

inline const FinSet& fibre_eval(const GaloisPresentation& g, std::size_t i, const CtsFunctor& a) {
  if (i >= g.fibre_points.size()) throw ShapeError(detail::concat("fibre_eval: no fibre point ", i));
  return a.values.at(g.fibre_points[i]);
}

// ---------------------------------------------------------------------------
// Fibre functors as explicit functors C -> Fin, so that non-evaluation
// functors can be fed to the same checker.

struct FibreFunctor {
  std::string name;
  std::function<FinSet(const CtsFunctor&)> on_objects;
  std::function<FinMap(const NatTrans&)> on_arrows;
};

inline FibreFunctor evaluation(const GaloisPresentation& g, std::size_t i) {
  if (i >= g.fibre_points.size()) throw ShapeError(detail::concat("evaluation: no fibre point ", i));
  const auto x = g.fibre_points[i];
  return {detail::concat("ev_", x), [x](const CtsFunctor& a) { return a.values.at(x); },
          [x](const NatTrans& t) { return t.component(x); }};
}

/// A(x) + {extra}: a functor C -> Fin that preserves coproducts of maps but not
/// the pretopos structure. Useful as a counterexample.
inline FibreFunctor pointed_evaluation(std::size_t x) {
  return {detail::concat("ev_", x, "+1"), [x](const CtsFunctor& a) { return FinSet(a.values.at(x).size + 1); },
          [x](const NatTrans& t) {
            auto table = t.component(x).table();
            table.push_back(t.target().value_size(x));
            return FinMap(FinSet(t.source().value_size(x) + 1), FinSet(t.target().value_size(x) + 1), table);
          }};
}

/// Checks that `fib` preserves the terminal and initial objects, binary products,
/// binary coproducts, equalisers and coequalisers of sampled parallel pairs, and
/// surjectivity of componentwise surjections among the samples.
inline ValidationReport pretopos_morphism_check(const FibreFunctor& fib, const std::vector<CtsFunctor>& samples,
                                                std::size_t pair_cap = 16) {
  ValidationReport report;
  if (samples.empty()) return report;
  const auto& base = samples.front().base;
  ++report.checked;
  if (fib.on_objects(terminal_functor(base)).size != 1) {
    report.add("terminal", fib.name + " does not send the terminal functor to a point");
  }
  ++report.checked;
  if (fib.on_objects(empty_functor(base)).size != 0) {
    report.add("initial", fib.name + " does not send the empty functor to the empty set");
  }
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t t = 0; t < samples.size(); ++t) {
      const auto& a = samples[s];
      const auto& b = samples[t];
      auto fa = fib.on_objects(a);
      auto fb = fib.on_objects(b);
      auto prod = functor_product(a, b);
      auto p1 = fib.on_arrows(prod.proj1);
      auto p2 = fib.on_arrows(prod.proj2);
      ++report.checked;
      {
        std::vector<std::size_t> table;
        for (std::size_t e = 0; e < p1.source().size; ++e) table.push_back(p1(e) * fb.size + p2(e));
        if (p1.source().size != fa.size * fb.size ||
            !FinMap(p1.source(), FinSet(fa.size * fb.size), table).is_bijective()) {
          report.add("product", detail::concat(fib.name, " does not preserve the product of samples ", s, " and ", t),
                     {s, t});
        }
      }
      auto cop = functor_coproduct(a, b);
      auto i1 = fib.on_arrows(cop.inj1);
      auto i2 = fib.on_arrows(cop.inj2);
      ++report.checked;
      {
        std::vector<std::size_t> hits(i1.target().size, 0);
        for (auto v : i1.table()) ++hits[v];
        for (auto v : i2.table()) ++hits[v];
        bool ok = i1.target().size == fa.size + fb.size &&
                  std::all_of(hits.begin(), hits.end(), [](std::size_t h) { return h == 1; });
        if (!ok) {
          report.add("coproduct",
                     detail::concat(fib.name, " does not preserve the coproduct of samples ", s, " and ", t), {s, t});
        }
      }
      SearchOptions opts;
      opts.limit = pair_cap;
      auto maps = nat_trans_set(a, b, opts);
      for (std::size_t u = 0; u < maps.size(); ++u) {
        const auto fu = fib.on_arrows(maps[u]);
        if (is_effective_epi(maps[u]) && !fu.is_surjective()) {
          report.add("effective-epi", detail::concat(fib.name, " sends a surjection ", s, "->", t, " #", u,
                                                     " to a non-surjection"), {s, t, u});
        }
        ++report.checked;
        for (std::size_t v = u + 1; v < maps.size(); ++v) {
          const auto fv = fib.on_arrows(maps[v]);
          auto eq = functor_equaliser(maps[u], maps[v]);
          auto fe = fib.on_arrows(eq.inclusion);
          auto expected = equaliser(fu, fv);
          ++report.checked;
          if (!fe.is_injective() || image_factorization(fe).mono.table() != expected.inclusion.table()) {
            report.add("equaliser", detail::concat(fib.name, " does not preserve the equaliser of maps ", u, ", ", v,
                                                   " between samples ", s, " and ", t), {s, t, u, v});
          }
          auto co = functor_coequaliser(maps[u], maps[v]);
          auto fq = fib.on_arrows(co.projection);
          auto expected_q = coequaliser(fu, fv);
          ++report.checked;
          bool ok = fq.target().size == expected_q.set.size && fq.is_surjective();
          for (std::size_t e = 0; ok && e < fq.source().size; ++e)
            for (std::size_t e2 = 0; ok && e2 < fq.source().size; ++e2)
              ok = (fq(e) == fq(e2)) == (expected_q.projection(e) == expected_q.projection(e2));
          if (!ok) {
            report.add("coequaliser", detail::concat(fib.name, " does not preserve the coequaliser of maps ", u,
                                                     ", ", v, " between samples ", s, " and ", t), {s, t, u, v});
          }
        }
      }
    }
  }
  return report;
}

inline ValidationReport pretopos_morphism_check(const GaloisPresentation& g, std::size_t i,
                                                const std::vector<CtsFunctor>& samples, std::size_t pair_cap = 16) {
  return pretopos_morphism_check(evaluation(g, i), samples, pair_cap);
}

inline bool bijective_at_fibres(const GaloisPresentation& g, const NatTrans& t) {
  return std::all_of(g.fibre_points.begin(), g.fibre_points.end(),
                     [&](std::size_t x) { return t.component(x).is_bijective(); });
}

inline ValidationReport joint_conservativity_check(const GaloisPresentation& g, const std::vector<NatTrans>& samples) {
  ValidationReport report;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    ++report.checked;
    if (bijective_at_fibres(g, samples[s]) && !is_iso(samples[s])) {
      std::size_t bad = 0;
      while (samples[s].component(bad).is_bijective()) ++bad;
      report.add("conservativity",
                 detail::concat("sample ", s, " is bijective at every fibre point but not at object ", bad), {s, bad});
    }
  }
  return report;
}

inline std::vector<Table> fibre_components(const GaloisPresentation& g, const NatTrans& t) {
  std::vector<Table> out;
  for (auto x : g.fibre_points) out.push_back(t.component(x).table());
  return out;
}

inline ValidationReport faithfulness_check(const GaloisPresentation& g, const CtsFunctor& a, const CtsFunctor& b) {
  ValidationReport report;
  std::map<std::vector<Table>, std::size_t> seen;
  std::size_t idx = 0;
  for_each_transformation(a, b, [&](const std::vector<Table>& t) {
    ++report.checked;
    std::vector<Table> restricted;
    for (auto x : g.fibre_points) restricted.push_back(t[x]);
    auto [it, fresh] = seen.emplace(restricted, idx);
    if (!fresh) {
      report.add("faithfulness", detail::concat("transformations ", it->second, " and ", idx,
                                                " agree at every fibre point"), {it->second, idx});
    }
    ++idx;
    return true;
  });
  return report;
}

inline ValidationReport subobject_injectivity_check(const GaloisPresentation& g, const CtsFunctor& a) {
  ValidationReport report;
  auto subs = subfunctor_lattice(a);
  std::map<std::vector<std::vector<bool>>, std::size_t> seen;
  for (std::size_t s = 0; s < subs.size(); ++s) {
    ++report.checked;
    std::vector<std::vector<bool>> restricted;
    for (auto x : g.fibre_points) restricted.push_back(subs[s].subset[x]);
    auto [it, fresh] = seen.emplace(restricted, s);
    if (!fresh) {
      report.add("subobjects", detail::concat("subfunctors ", it->second, " and ", s,
                                              " have the same fibres"), {it->second, s});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Generated test family

struct FamilyMember {
  std::string name;
  CtsFunctor functor;
};

struct TestFamily {
  std::size_t level = 0;
  std::vector<FamilyMember> members;
  std::vector<std::size_t> corepresentable;     // member index of h^x for every object x
  std::vector<std::size_t> refinement_of_lower; // member index of the refinement of each level-(k-1) member
};

/// Smallest arrow-closed objectwise equivalence relation identifying (x, a, b).
inline std::vector<Table> generated_congruence(const CtsFunctor& f, std::size_t x, std::size_t a, std::size_t b,
                                               std::vector<std::size_t>& counts) {
  const auto n = f.object_count();
  const auto& c = f.level_category();
  std::vector<DisjointSets> sets;
  for (std::size_t y = 0; y < n; ++y) sets.emplace_back(f.value_size(y));
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> stack{{x, a, b}};
  while (!stack.empty()) {
    auto [y, u, v] = stack.back();
    stack.pop_back();
    if (!sets[y].unite(u, v)) continue;
    for (std::size_t z = 0; z < n; ++z)
      for (std::size_t h = 0; h < c.hom_size(y, z); ++h) stack.emplace_back(z, f.apply(y, z, h, u), f.apply(y, z, h, v));
  }
  std::vector<Table> labels(n);
  counts.assign(n, 0);
  for (std::size_t y = 0; y < n; ++y) labels[y] = sets[y].labelling(counts[y]);
  return labels;
}

namespace detail {

inline void add_member(TestFamily& fam, std::string name, CtsFunctor f, std::size_t bound, std::size_t* index = nullptr) {
  if (f.total_size() > bound) return;
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    if (fam.members[m].functor == f) {
      if (index) *index = m;
      return;
    }
  }
  if (index) *index = fam.members.size();
  fam.members.push_back({std::move(name), std::move(f)});
}

} // namespace detail

/// Level-k test family: refinements of the level-(k-1) family, all corepresentables
/// h^x_(k), the terminal and empty functors, one round of binary products and
/// coproducts of those, principal subfunctors and principal quotients of the
/// corepresentables. Members larger than the generator bound are dropped, except
/// that an oversized corepresentable is an error.
inline TestFamily generate_test_family(const GaloisPresentation& g, std::size_t level) {
  const auto& base = g.base;
  if (level >= base->depth()) throw ShapeError(detail::concat("generate_test_family: no level ", level));
  TestFamily fam;
  fam.level = level;
  const auto bound = g.generator_bound;
  if (level > 0) {
    auto lower = generate_test_family(g, level - 1);
    for (const auto& m : lower.members) {
      std::size_t idx = 0;
      detail::add_member(fam, "refine(" + m.name + ")", refine(m.functor, level), bound, &idx);
      fam.refinement_of_lower.push_back(idx);
    }
  }
  const auto n = base->object_count();
  std::vector<std::pair<std::string, CtsFunctor>> seeds;
  for (std::size_t x = 0; x < n; ++x) {
    auto h = corepresentable(base, level, x);
    if (h.total_size() > bound) {
      throw StageError("generator-bound", detail::concat("corepresentable h^", x, " at level ", level, " has ",
                                                          h.total_size(), " elements, above the bound ", bound));
    }
    std::size_t idx = 0;
    auto name = detail::concat("h^", x);
    detail::add_member(fam, name, h, bound, &idx);
    fam.corepresentable.push_back(idx);
    seeds.emplace_back(name, h);
  }
  detail::add_member(fam, "1", terminal_functor(base, level), bound);
  detail::add_member(fam, "0", empty_functor(base, level), bound);
  seeds.emplace_back("1", terminal_functor(base, level));
  for (std::size_t s = 0; s < seeds.size(); ++s)
    for (std::size_t t = s; t < seeds.size(); ++t) {
      const auto& [sn, sf] = seeds[s];
      const auto& [tn, tf] = seeds[t];
      detail::add_member(fam, sn + "x" + tn, functor_product(sf, tf).functor, bound);
      detail::add_member(fam, sn + "+" + tn, functor_coproduct(sf, tf).functor, bound);
    }
  for (std::size_t x = 0; x < n; ++x) {
    const auto& h = seeds[x].second;
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t a = 0; a < h.value_size(y); ++a) {
        auto seed = empty_subset(h);
        seed[y][a] = true;
        auto sub = subfunctor_as_functor(subfunctor_closure(h, seed));
        detail::add_member(fam, detail::concat("<h^", x, "@", y, ":", a, ">"), std::move(sub.functor), bound);
        for (std::size_t b = a + 1; b < h.value_size(y); ++b) {
          std::vector<std::size_t> counts;
          auto labels = generated_congruence(h, y, a, b, counts);
          auto q = quotient_functor(h, labels, counts);
          detail::add_member(fam, detail::concat("h^", x, "/(", y, ":", a, "~", b, ")"), std::move(q.functor), bound);
        }
      }
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Natural transformations between fibre functors restricted to a family

/// A transformation ev_{x_i} => ev_{x_j} on the family: values[m][a] for a in m(x_i).
using FibreTransformation = std::vector<Table>;

struct FamilyMorphisms {
  struct Edge {
    std::size_t source, target;
    std::vector<Table> components; // full component tables
  };
  std::vector<Edge> edges;
  std::size_t skipped_pairs = 0;
};

/// Morphisms between family members. Maps out of corepresentables are always
/// complete (there are |m(x)| of them); other pairs are included only when they
/// have at most `budget` morphisms.
inline FamilyMorphisms family_morphisms(const TestFamily& fam, std::size_t budget = 256) {
  FamilyMorphisms out;
  std::vector<bool> is_corep(fam.members.size(), false);
  for (auto c : fam.corepresentable) is_corep[c] = true;
  for (std::size_t s = 0; s < fam.members.size(); ++s)
    for (std::size_t t = 0; t < fam.members.size(); ++t) {
      std::vector<std::vector<Table>> found;
      SearchOptions opts;
      if (!is_corep[s]) opts.limit = budget + 1;
      for_each_transformation(fam.members[s].functor, fam.members[t].functor, [&](const std::vector<Table>& tab) {
        found.push_back(tab);
        return true;
      }, opts);
      if (!is_corep[s] && found.size() > budget) {
        ++out.skipped_pairs;
        continue;
      }
      for (auto& f : found) out.edges.push_back({s, t, std::move(f)});
    }
  return out;
}

namespace detail {

class FibreTransformationSearch {
public:
  FibreTransformationSearch(const TestFamily& fam, const FamilyMorphisms& mor, std::size_t xi, std::size_t xj,
                            std::size_t first_member)
      : fam_(fam), xi_(xi), xj_(xj) {
    const auto m = fam.members.size();
    order_.push_back(first_member);
    for (std::size_t k = 0; k < m; ++k)
      if (k != first_member) order_.push_back(k);
    offset_.assign(m + 1, 0);
    // variables grouped by member in search order
    std::vector<std::size_t> start(m, 0);
    std::size_t total = 0;
    for (auto k : order_) {
      start[k] = total;
      total += fam.members[k].functor.value_size(xi_);
    }
    start_ = start;
    member_of_.resize(total);
    for (auto k : order_)
      for (std::size_t a = 0; a < fam.members[k].functor.value_size(xi_); ++a) member_of_[start[k] + a] = k;
    assign_.assign(total, unset);
    out_.resize(m);
    for (const auto& e : mor.edges) out_[e.source].push_back(&e);
  }

  std::vector<FibreTransformation> run(std::size_t limit) {
    limit_ = limit;
    for (std::size_t k = 0; k < fam_.members.size(); ++k) {
      const auto& f = fam_.members[k].functor;
      if (f.value_size(xi_) > 0 && f.value_size(xj_) == 0) return {};
    }
    dfs(0);
    return std::move(found_);
  }

private:
  bool assign(std::size_t k0, std::size_t a0, std::size_t b0) {
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> queue{{k0, a0, b0}};
    while (!queue.empty()) {
      auto [k, a, b] = queue.back();
      queue.pop_back();
      auto v = start_[k] + a;
      if (assign_[v] != unset) {
        if (assign_[v] != b) return false;
        continue;
      }
      assign_[v] = b;
      trail_.push_back(v);
      for (const auto* e : out_[k]) queue.emplace_back(e->target, e->components[xi_][a], e->components[xj_][b]);
    }
    return true;
  }

  void dfs(std::size_t from) {
    if (found_.size() >= limit_) return;
    while (from < assign_.size() && assign_[from] != unset) ++from;
    if (from == assign_.size()) {
      FibreTransformation t(fam_.members.size());
      for (std::size_t k = 0; k < t.size(); ++k)
        t[k].assign(assign_.begin() + start_[k], assign_.begin() + start_[k] + fam_.members[k].functor.value_size(xi_));
      found_.push_back(std::move(t));
      return;
    }
    const auto k = member_of_[from];
    const auto a = from - start_[k];
    for (std::size_t b = 0; b < fam_.members[k].functor.value_size(xj_); ++b) {
      auto mark = trail_.size();
      if (assign(k, a, b)) dfs(from + 1);
      while (trail_.size() > mark) {
        assign_[trail_.back()] = unset;
        trail_.pop_back();
      }
      if (found_.size() >= limit_) return;
    }
  }

  const TestFamily& fam_;
  std::size_t xi_, xj_;
  std::vector<std::size_t> order_, offset_, start_, member_of_, assign_, trail_;
  std::vector<std::vector<const FamilyMorphisms::Edge*>> out_;
  std::vector<FibreTransformation> found_;
  std::size_t limit_ = 0;
};

} // namespace detail

/// All family-natural transformations ev_{x_i} => ev_{x_j}, at most `limit` of them.
inline std::vector<FibreTransformation> fibre_transformations(const TestFamily& fam, const FamilyMorphisms& mor,
                                                              std::size_t xi, std::size_t xj, std::size_t limit) {
  detail::FibreTransformationSearch search(fam, mor, xi, xj, fam.corepresentable.at(xi));
  return search.run(limit);
}

/// eta_{h^{x_i}}(id_{x_i}) for a transformation out of ev_{x_i}.
inline std::size_t yoneda_element(const TestFamily& fam, const FibreTransformation& t, std::size_t xi) {
  const auto& c = fam.members[fam.corepresentable.at(xi)].functor.level_category();
  return t[fam.corepresentable[xi]][c.identity(xi)];
}

inline FibreTransformation compose_fibre(const FibreTransformation& theta, const FibreTransformation& eta) {
  FibreTransformation r(eta.size());
  for (std::size_t m = 0; m < eta.size(); ++m) {
    r[m].resize(eta[m].size());
    for (std::size_t a = 0; a < eta[m].size(); ++a) r[m][a] = theta[m][eta[m][a]];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fundamental category

struct FundamentalCategory {
  std::shared_ptr<const ProCat> category;
  std::vector<std::size_t> fibre_points;  // object of the base behind each object
  std::vector<std::size_t> family_sizes;  // per level, when cross-validated
  std::vector<std::size_t> skipped_pairs; // per level: member pairs above the morphism budget
  ValidationReport cross_validation;
};

/// Full sub-pro-category of the base on the fibre points.
inline ProCat full_subcategory(const ProCat& p, const std::vector<std::size_t>& points) {
  const auto n = p.object_count();
  const auto m = points.size();
  ProCat q;
  std::vector<std::string> labels;
  if (!p.objects.labels.empty())
    for (auto x : points) labels.push_back(p.objects.labels[x]);
  q.objects = FinSet(m, labels);
  for (const auto& lvl : p.levels) {
    FinCat c;
    c.objects = q.objects;
    for (auto x : points)
      for (auto y : points) c.homs.push_back(lvl.hom(x, y));
    for (auto x : points) c.identities.push_back(lvl.identity(x));
    for (auto x : points)
      for (auto y : points)
        for (auto z : points) c.composition.push_back(lvl.composition[(x * n + y) * n + z]);
    q.levels.push_back(std::move(c));
  }
  for (const auto& t : p.transitions) {
    std::vector<FinMap> maps;
    for (auto x : points)
      for (auto y : points) maps.push_back(t[x * n + y]);
    q.transitions.push_back(std::move(maps));
  }
  return q;
}

struct CrossValidationOptions {
  bool enabled = true;
  std::size_t morphism_budget = 256;
};

/// Solutions per level and fibre pair, used both for cross-validation and for
/// rebuilding the fundamental category from evaluations alone.
struct EvaluationData {
  std::vector<TestFamily> families;
  std::vector<FamilyMorphisms> morphisms;
  // solutions[k][i*n+j]
  std::vector<std::vector<std::vector<FibreTransformation>>> solutions;
};

inline EvaluationData evaluation_data(const GaloisPresentation& g, std::size_t morphism_budget = 256) {
  EvaluationData data;
  const auto& base = *g.base;
  const auto nf = g.fibre_count();
  for (std::size_t k = 0; k < base.depth(); ++k) {
    data.families.push_back(generate_test_family(g, k));
    data.morphisms.push_back(family_morphisms(data.families.back(), morphism_budget));
    std::vector<std::vector<FibreTransformation>> sol(nf * nf);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nf; ++j) {
        const auto xi = g.fibre_points[i];
        const auto xj = g.fibre_points[j];
        // one more than the expected count, so an undersized family shows up as a mismatch
        sol[i * nf + j] = fibre_transformations(data.families.back(), data.morphisms.back(), xi, xj,
                                                base.level(k).hom_size(xi, xj) + 1);
      }
    data.solutions.push_back(std::move(sol));
  }
  return data;
}

inline ValidationReport cross_validate(const GaloisPresentation& g, const EvaluationData& data) {
  ValidationReport report;
  const auto& base = *g.base;
  const auto nf = g.fibre_count();
  for (std::size_t k = 0; k < base.depth(); ++k) {
    const auto& fam = data.families[k];
    const auto& c = base.level(k);
    std::vector<std::map<std::size_t, std::size_t>> by_element(nf * nf);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nf; ++j) {
        const auto xi = g.fibre_points[i];
        const auto xj = g.fibre_points[j];
        const auto& sols = data.solutions[k][i * nf + j];
        ++report.checked;
        if (sols.size() != c.hom_size(xi, xj)) {
          report.add("cardinality", detail::concat("level ", k, ", hom (", i, ",", j, "): ", sols.size(),
                                                   sols.size() > c.hom_size(xi, xj) ? " or more" : "",
                                                   " transformations between fibre functors, ", c.hom_size(xi, xj),
                                                   " arrows"), {k, i, j});
          continue;
        }
        for (std::size_t s = 0; s < sols.size(); ++s) {
          auto e = yoneda_element(fam, sols[s], xi);
          if (!by_element[i * nf + j].emplace(e, s).second) {
            report.add("yoneda", detail::concat("level ", k, ", hom (", i, ",", j,
                                                "): two transformations share the Yoneda element ", e), {k, i, j, e});
          }
        }
      }
    if (!report.ok()) continue;
    for (std::size_t i = 0; i < nf; ++i) {
      const auto xi = g.fibre_points[i];
      auto id = by_element[i * nf + i].at(c.identity(xi));
      const auto& ident = data.solutions[k][i * nf + i][id];
      ++report.checked;
      for (std::size_t m = 0; m < ident.size(); ++m)
        for (std::size_t a = 0; a < ident[m].size(); ++a)
          if (ident[m][a] != a) {
            report.add("identity", detail::concat("level ", k, ": the transformation with Yoneda element id_", i,
                                                  " is not the identity"), {k, i});
            m = ident.size();
            break;
          }
    }
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nf; ++j)
        for (std::size_t l = 0; l < nf; ++l) {
          const auto xi = g.fibre_points[i], xj = g.fibre_points[j], xl = g.fibre_points[l];
          for (const auto& eta : data.solutions[k][i * nf + j])
            for (const auto& theta : data.solutions[k][j * nf + l]) {
              ++report.checked;
              auto comp = compose_fibre(theta, eta);
              auto expected = c.compose(xi, xj, xl, yoneda_element(fam, theta, xj), yoneda_element(fam, eta, xi));
              auto it = by_element[i * nf + l].find(yoneda_element(fam, comp, xi));
              if (it == by_element[i * nf + l].end() || it->first != expected ||
                  data.solutions[k][i * nf + l][it->second] != comp) {
                report.add("composition", detail::concat("level ", k, ": composite over fibre points (", i, ",", j,
                                                         ",", l, ") disagrees with composition of arrows"),
                           {k, i, j, l});
              }
            }
        }
  }
  return report;
}

inline FundamentalCategory fundamental_category(const GaloisPresentation& g, const CrossValidationOptions& opts = {}) {
  auto valid = validate_presentation(g);
  if (!valid.ok()) throw ValidationError("presentation", {}, "invalid presentation:\n" + valid.to_string());
  FundamentalCategory fc;
  fc.category = std::make_shared<const ProCat>(full_subcategory(*g.base, g.fibre_points));
  fc.fibre_points = g.fibre_points;
  if (!opts.enabled) return fc;
  auto data = evaluation_data(g, opts.morphism_budget);
  for (std::size_t k = 0; k < data.families.size(); ++k) {
    fc.family_sizes.push_back(data.families[k].members.size());
    fc.skipped_pairs.push_back(data.morphisms[k].skipped_pairs);
  }
  fc.cross_validation = cross_validate(g, data);
  if (!fc.cross_validation.ok()) {
    throw StageError("cross-validation", fc.cross_validation.issues.front().message);
  }
  return fc;
}

/// Rebuilds Pi_1 from transformations between fibre functors only, without
/// reading the base hom-sets: arrows are the solutions, composition is
/// composition of transformations, transitions restrict to refined members.
inline ProCat reconstruct_from_evaluations(const GaloisPresentation& g, const EvaluationData& data) {
  const auto nf = g.fibre_count();
  ProCat p;
  p.objects = FinSet(nf);
  for (std::size_t k = 0; k < data.families.size(); ++k) {
    const auto& sol = data.solutions[k];
    std::vector<std::map<FibreTransformation, std::size_t>> index(nf * nf);
    std::vector<std::size_t> sizes;
    for (std::size_t h = 0; h < nf * nf; ++h) {
      for (std::size_t s = 0; s < sol[h].size(); ++s) index[h].emplace(sol[h][s], s);
      sizes.push_back(sol[h].size());
    }
    auto c = FinCat::with_hom_sizes(p.objects, sizes);
    for (std::size_t i = 0; i < nf; ++i) {
      FibreTransformation ident;
      for (const auto& m : data.families[k].members) ident.push_back(FinMap::identity(m.functor.values[g.fibre_points[i]]).table());
      auto it = index[i * nf + i].find(ident);
      if (it == index[i * nf + i].end()) throw StageError("reconstruction", detail::concat("no identity at ", i));
      c.identities[i] = it->second;
    }
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nf; ++j)
        for (std::size_t l = 0; l < nf; ++l)
          for (std::size_t f = 0; f < sizes[i * nf + j]; ++f)
            for (std::size_t h = 0; h < sizes[j * nf + l]; ++h) {
              auto comp = compose_fibre(sol[j * nf + l][h], sol[i * nf + j][f]);
              auto it = index[i * nf + l].find(comp);
              if (it == index[i * nf + l].end()) {
                throw StageError("reconstruction", detail::concat("composite over (", i, ",", j, ",", l,
                                                                  ") is not a transformation at level ", k));
              }
              c.composition[c.triple_index(i, j, l)][h * sizes[i * nf + j] + f] = it->second;
            }
    p.levels.push_back(std::move(c));
    if (k > 0) {
      const auto& lower = data.solutions[k - 1];
      const auto& refinement = data.families[k].refinement_of_lower;
      std::vector<FinMap> maps;
      for (std::size_t h = 0; h < nf * nf; ++h) {
        std::map<FibreTransformation, std::size_t> lower_index;
        for (std::size_t s = 0; s < lower[h].size(); ++s) lower_index.emplace(lower[h][s], s);
        Table table;
        for (const auto& t : sol[h]) {
          FibreTransformation restricted;
          for (auto r : refinement) restricted.push_back(t[r]);
          auto it = lower_index.find(restricted);
          if (it == lower_index.end()) {
            throw StageError("reconstruction", detail::concat("restriction to level ", k - 1, " is not a transformation"));
          }
          table.push_back(it->second);
        }
        maps.emplace_back(FinSet(sol[h].size()), FinSet(lower[h].size()), table);
      }
      p.transitions.push_back(std::move(maps));
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Categories of elements

/// (A, a): a family member with one point per chosen fibre index.
struct ElementsNode {
  std::size_t member = 0;
  std::vector<std::size_t> point;

  friend bool operator==(const ElementsNode&, const ElementsNode&) = default;
};

/// el(F) truncated to family members of total size <= window, where F is the
/// product of the evaluations at `indices` (fibre indices, repeats allowed);
/// no indices means F is terminal.
struct ElementsCategory {
  const TestFamily* family = nullptr;
  std::vector<std::size_t> objects; // base objects behind the chosen indices
  std::vector<ElementsNode> nodes;

  const CtsFunctor& object(const ElementsNode& u) const { return family->members[u.member].functor; }

  std::vector<NatTrans> morphisms(std::size_t u, std::size_t v, std::optional<std::size_t> limit = {}) const {
    const auto& a = nodes[u];
    const auto& b = nodes[v];
    std::vector<NatTrans> out;
    auto ap = std::make_shared<const CtsFunctor>(object(a));
    auto bp = std::make_shared<const CtsFunctor>(object(b));
    for_each_transformation(*ap, *bp, [&](const std::vector<Table>& t) {
      for (std::size_t c = 0; c < objects.size(); ++c)
        if (t[objects[c]][a.point[c]] != b.point[c]) return true;
      out.emplace_back(ap, bp, t);
      return !limit || out.size() < *limit;
    });
    return out;
  }
};

inline ElementsCategory elements_category(const GaloisPresentation& g, const TestFamily& fam,
                                          const std::vector<std::size_t>& indices, std::size_t window) {
  if (window == 0) throw ShapeError("elements_category: window must be at least 1");
  ElementsCategory el;
  el.family = &fam;
  for (auto i : indices) {
    if (i >= g.fibre_count()) throw ShapeError(detail::concat("elements_category: no fibre point ", i));
    el.objects.push_back(g.fibre_points[i]);
  }
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    const auto& f = fam.members[m].functor;
    if (f.total_size() > window) continue;
    std::vector<std::size_t> point(el.objects.size(), 0);
    bool nonempty = std::all_of(el.objects.begin(), el.objects.end(), [&](std::size_t x) { return f.value_size(x) > 0; });
    if (!nonempty) continue;
    while (true) {
      el.nodes.push_back({m, point});
      bool advanced = false;
      for (std::size_t c = el.objects.size(); c-- > 0;) {
        if (++point[c] < f.value_size(el.objects[c])) {
          advanced = true;
          break;
        }
        point[c] = 0;
      }
      if (!advanced) break;
    }
  }
  return el;
}

/// Both halves of cofilteredness inside the truncation: every pair of nodes has
/// the product node over it, and every parallel pair of node morphisms is
/// equalised by the equaliser node.
inline ValidationReport cofilteredness_check(const ElementsCategory& el, std::size_t parallel_cap = 8) {
  ValidationReport report;
  const auto nc = el.objects.size();
  for (std::size_t u = 0; u < el.nodes.size(); ++u)
    for (std::size_t v = 0; v < el.nodes.size(); ++v) {
      const auto& a = el.object(el.nodes[u]);
      const auto& b = el.object(el.nodes[v]);
      auto prod = functor_product(a, b);
      ++report.checked;
      std::vector<std::size_t> point;
      for (std::size_t c = 0; c < nc; ++c) {
        point.push_back(el.nodes[u].point[c] * b.value_size(el.objects[c]) + el.nodes[v].point[c]);
      }
      for (std::size_t c = 0; c < nc; ++c) {
        const auto x = el.objects[c];
        if (prod.proj1.component(x)(point[c]) != el.nodes[u].point[c] ||
            prod.proj2.component(x)(point[c]) != el.nodes[v].point[c]) {
          report.add("product-node", detail::concat("product node over nodes ", u, " and ", v,
                                                    " does not project to them"), {u, v});
          break;
        }
      }
      if (!check_nat_trans(prod.proj1).ok() || !check_nat_trans(prod.proj2).ok()) {
        report.add("product-node", detail::concat("projections over nodes ", u, ", ", v, " are not natural"), {u, v});
      }
      auto maps = el.morphisms(u, v, parallel_cap);
      for (std::size_t s = 0; s < maps.size(); ++s)
        for (std::size_t t = s + 1; t < maps.size(); ++t) {
          ++report.checked;
          auto eq = functor_equaliser(maps[s], maps[t]);
          // the point of u lies in the equaliser because both maps send it to the point of v
          for (std::size_t c = 0; c < nc; ++c) {
            const auto x = el.objects[c];
            const auto& incl = eq.inclusion.component(x).table();
            if (std::find(incl.begin(), incl.end(), el.nodes[u].point[c]) == incl.end()) {
              report.add("equaliser-node", detail::concat("equaliser node misses the point of node ", u,
                                                          " for parallel pair ", s, ", ", t), {u, v, s, t});
              break;
            }
          }
          if (!(compose(maps[s], eq.inclusion) == compose(maps[t], eq.inclusion))) {
            report.add("equaliser-node", detail::concat("equaliser node does not equalise pair ", s, ", ", t,
                                                        " from node ", u, " to node ", v), {u, v, s, t});
          }
        }
    }
  return report;
}

} // namespace exo
