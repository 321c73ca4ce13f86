#pragma once

// The exodromy equivalence ev : Fun^cts(Pi, Fin) -> Fun^cts(Pi_1, Fin), run as
// an algorithm: covers by coproducts of corepresentables, realization of
// subobjects, kernel pairs and their quotients, and the reconstruction of Pi
// from its category of continuous functors.

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"
#include "exodromy/funcat.hpp"
#include "exodromy/galois.hpp"
#include "exodromy/procat.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace exo {

struct ExodromyContext {
  GaloisPresentation presentation;
  FundamentalCategory pi1;

  const ProCat& base() const { return *presentation.base; }
  const std::shared_ptr<const ProCat>& pi1_ptr() const { return pi1.category; }
};

inline ExodromyContext make_context(const GaloisPresentation& g, const CrossValidationOptions& opts = {}) {
  return {g, fundamental_category(g, opts)};
}

/// i |-> A(x_i), with Pi_1 arrows acting as the base arrows they are.
inline CtsFunctor ev(const ExodromyContext& ctx, const CtsFunctor& a) {
  const auto& g = ctx.presentation;
  const auto nf = g.fibre_count();
  const auto n = a.object_count();
  std::vector<FinSet> values;
  for (auto x : g.fibre_points) values.push_back(a.values.at(x));
  auto r = blank_functor(ctx.pi1.category, a.level, values);
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t j = 0; j < nf; ++j)
      r.actions[i * nf + j] = a.actions[g.fibre_points[i] * n + g.fibre_points[j]];
  return r;
}

inline NatTrans ev(const ExodromyContext& ctx, const NatTrans& t) {
  std::vector<Table> tables;
  for (auto x : ctx.presentation.fibre_points) tables.push_back(t.component(x).table());
  return NatTrans(ev(ctx, t.source()), ev(ctx, t.target()), tables);
}

inline void require_over_pi1(const ExodromyContext& ctx, const CtsFunctor& f, const char* op) {
  if (!f.base || !(f.base == ctx.pi1.category || *f.base == *ctx.pi1.category)) {
    throw ShapeError(detail::concat(op, ": functor does not live on the fundamental category"));
  }
}

struct CoverResult {
  std::size_t level = 0;
  CtsFunctor object;                  // A over Pi
  std::vector<std::pair<std::size_t, std::size_t>> summands; // (fibre index i, element of F(x_i))
  NatTrans covering_map;              // ev(A) => F
};

/// A = coprod over (i, e in F(x_i)) of h^{x_i} at level m; the summand (i, e)
/// sends id_{x_i} to e. Starts at F's level and refines while the map fails
/// to be surjective.
inline CoverResult canonical_cover(const ExodromyContext& ctx, const CtsFunctor& f) {
  require_over_pi1(ctx, f, "canonical_cover");
  const auto& g = ctx.presentation;
  const auto nf = g.fibre_count();
  std::string failure;
  for (std::size_t m = f.level; m < g.base->depth(); ++m) {
    CoverResult r;
    r.level = m;
    const auto fm = refine(f, m);
    std::vector<CtsFunctor> parts;
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t e = 0; e < f.value_size(i); ++e) {
        parts.push_back(corepresentable(g.base, m, g.fibre_points[i]));
        r.summands.emplace_back(i, e);
      }
    r.object = coproduct_all(g.base, m, parts);
    const auto& lvl = g.base->level(m);
    std::vector<Table> tables(nf);
    for (std::size_t j = 0; j < nf; ++j) {
      for (const auto& [i, e] : r.summands) {
        for (std::size_t h = 0; h < lvl.hom_size(g.fibre_points[i], g.fibre_points[j]); ++h) {
          tables[j].push_back(fm.apply(i, j, h, e));
        }
      }
    }
    r.covering_map = NatTrans(ev(ctx, r.object), f, tables);
    std::size_t bad = nf;
    for (std::size_t j = 0; j < nf && bad == nf; ++j)
      if (!r.covering_map.component(j).is_surjective()) bad = j;
    if (bad == nf && check_nat_trans(r.covering_map).ok()) return r;
    failure = detail::concat("component at fibre point ", bad, " is not surjective at level ", m);
  }
  throw StageError("cover", "no level gives a surjective cover: " + failure);
}

/// The subfunctor of A generated by the fibre-point elements of s; it must restrict to s.
inline Subfunctor subobject_realization(const ExodromyContext& ctx, const CtsFunctor& a, const Subfunctor& s) {
  const auto& g = ctx.presentation;
  if (s.subset.size() != g.fibre_count()) throw ShapeError("subobject_realization: one subset per fibre point");
  auto seeds = empty_subset(a);
  for (std::size_t i = 0; i < g.fibre_count(); ++i) {
    if (s.subset[i].size() != a.value_size(g.fibre_points[i])) {
      throw ShapeError(detail::concat("subobject_realization: subset ", i, " has the wrong length"));
    }
    seeds[g.fibre_points[i]] = s.subset[i];
  }
  auto r = subfunctor_closure(a, seeds);
  for (std::size_t i = 0; i < g.fibre_count(); ++i) {
    if (r.subset[g.fibre_points[i]] != s.subset[i]) {
      throw StageError("subobject-realization",
                       detail::concat("closure over the base adds elements at fibre point ", i,
                                      "; the subpresheaf is not closed over the fundamental category"));
    }
  }
  return r;
}

struct LocalFullnessWitness {
  CtsFunctor cover;   // C
  NatTrans epi;       // f : C -> A
  NatTrans map;       // h : C -> B
  std::string route;  // "identity" or "pointed-cover"
};

/// Given alpha : ev(A) => ev(B), finds f : C ->> A and h : C -> B with
/// ev(h) = alpha . ev(f). Tries C = A first, then the pointed cover of A.
inline LocalFullnessWitness local_fullness_witness(const ExodromyContext& ctx, const CtsFunctor& a,
                                                   const CtsFunctor& b, const NatTrans& alpha,
                                                   std::size_t window = 64) {
  const auto& g = ctx.presentation;
  const auto nf = g.fibre_count();
  auto matches = [&](const std::vector<Table>& comps, const NatTrans& f) {
    for (std::size_t i = 0; i < nf; ++i) {
      const auto x = g.fibre_points[i];
      for (std::size_t c = 0; c < f.source().value_size(x); ++c)
        if (comps[x][c] != alpha.component(i)(f.component(x)(c))) return false;
    }
    return true;
  };
  {
    auto id = identity_nat(a);
    std::optional<std::vector<Table>> found;
    for_each_transformation(a, b, [&](const std::vector<Table>& t) {
      if (!matches(t, id)) return true;
      found = t;
      return false;
    });
    if (found) return {a, id, NatTrans(a, b, *found), "identity"};
  }
  const auto m = std::max({a.level, b.level, alpha.source().level, alpha.target().level});
  const auto am = refine(a, m);
  const auto bm = refine(b, m);
  std::vector<CtsFunctor> parts;
  std::vector<std::pair<std::size_t, std::size_t>> points;
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t e = 0; e < a.value_size(g.fibre_points[i]); ++e) {
      parts.push_back(corepresentable(g.base, m, g.fibre_points[i]));
      points.emplace_back(i, e);
    }
  auto c = coproduct_all(g.base, m, parts);
  if (c.total_size() > window) {
    throw StageError("window", detail::concat("pointed cover has ", c.total_size(), " elements, above the window ",
                                              window));
  }
  const auto n = g.base->object_count();
  const auto& lvl = g.base->level(m);
  std::vector<Table> ft(n), ht(n);
  for (std::size_t y = 0; y < n; ++y)
    for (const auto& [i, e] : points) {
      const auto xi = g.fibre_points[i];
      const auto be = alpha.component(i)(e);
      for (std::size_t h = 0; h < lvl.hom_size(xi, y); ++h) {
        ft[y].push_back(am.apply(xi, y, h, e));
        ht[y].push_back(bm.apply(xi, y, h, be));
      }
    }
  NatTrans f(c, a, ft), h(c, b, ht);
  if (!is_effective_epi(f)) {
    throw StageError("window", "the pointed cover does not surject onto A; the fibre points are not conservative");
  }
  if (!check_nat_trans(h).ok() || !matches(ht, f)) {
    throw StageError("local-fullness", "the pointed cover map does not realize alpha");
  }
  return {c, f, h, "pointed-cover"};
}

struct RealizationTrace {
  CtsFunctor input;                // F over Pi_1
  CoverResult cover;               // A with ev(A) ->> F
  Subfunctor kernel;               // R subset ev(A) x ev(A)
  Subfunctor kernel_subobject;     // B subset A x A with ev(B) = R
  CtsFunctor quotient;             // A / B
  NatTrans projection;             // A ->> A / B
  std::vector<Table> iso_witness;  // ev(A / B)(x_i) -> F(x_i)
};

inline RealizationTrace realize(const ExodromyContext& ctx, const CtsFunctor& f) {
  require_over_pi1(ctx, f, "realize");
  {
    auto r = check_functor(f);
    if (!r.ok()) throw StageError("input", r.issues.front().message);
  }
  const auto& g = ctx.presentation;
  const auto nf = g.fibre_count();
  RealizationTrace t;
  t.input = f;
  t.cover = canonical_cover(ctx, f);
  const auto& a = t.cover.object;

  t.kernel = kernel_pair_subfunctor(t.cover.covering_map);
  {
    auto r = check_subfunctor(t.kernel);
    if (!r.ok()) throw StageError("kernel-pair", r.issues.front().message);
  }

  auto aa = functor_product(a, a).functor;
  if (!(ev(ctx, aa) == t.kernel.ambient)) {
    throw StageError("kernel-pair", "ev(A x A) differs from ev(A) x ev(A)");
  }
  t.kernel_subobject = subobject_realization(ctx, aa, t.kernel);

  for (std::size_t x = 0; x < a.object_count(); ++x) {
    if (auto bad = relation_at(a, t.kernel_subobject, x).violation()) {
      throw StageError("equivalence", detail::concat("object ", x, ": ", bad->what()));
    }
  }

  try {
    auto q = quotient_by_equiv_subfunctor(a, t.kernel_subobject);
    t.quotient = q.functor;
    t.projection = q.projection;
  } catch (const std::exception& e) {
    throw StageError("quotient", e.what());
  }

  // ev(A/B) -> F: a class goes where its members go.
  const auto evq = ev(ctx, t.quotient);
  const auto fm = refine(f, std::max(f.level, t.quotient.level));
  for (std::size_t i = 0; i < nf; ++i) {
    const auto x = g.fibre_points[i];
    Table w(t.quotient.value_size(x), detail::unset);
    for (std::size_t e = 0; e < a.value_size(x); ++e) {
      auto cls = t.projection.component(x)(e);
      auto target = t.cover.covering_map.component(i)(e);
      if (w[cls] != detail::unset && w[cls] != target) {
        throw StageError("iso", detail::concat("class ", cls, " at fibre point ", i, " meets two elements of F"));
      }
      w[cls] = target;
    }
    if (!FinMap(FinSet(w.size()), f.values[i], w).is_bijective()) {
      throw StageError("iso", detail::concat("induced map at fibre point ", i, " is not a bijection"));
    }
    t.iso_witness.push_back(std::move(w));
  }
  NatTrans iso(evq, fm, t.iso_witness);
  {
    auto r = check_nat_trans(iso);
    if (!r.ok()) throw StageError("iso", "induced bijection is not natural: " + r.issues.front().message);
  }
  return t;
}

/// Hom(A, B) -> Hom(ev A, ev B) is a bijection, and ev respects composition of
/// the pairs A -> B -> A.
inline ValidationReport full_faithfulness_check(const ExodromyContext& ctx, const CtsFunctor& a, const CtsFunctor& b,
                                                std::size_t cap = 512) {
  ValidationReport report;
  SearchOptions opts;
  opts.limit = cap + 1;
  auto up = nat_trans_set(a, b, opts);
  auto eva = ev(ctx, a);
  auto evb = ev(ctx, b);
  auto down = nat_trans_set(eva, evb, opts);
  if (up.size() > cap || down.size() > cap) {
    report.add("budget", detail::concat("more than ", cap, " transformations; pair skipped"));
    return report;
  }
  ++report.checked;
  std::map<std::vector<Table>, std::size_t> images;
  for (std::size_t u = 0; u < up.size(); ++u) {
    auto img = fibre_components(ctx.presentation, up[u]);
    auto [it, fresh] = images.emplace(img, u);
    if (!fresh) report.add("faithful", detail::concat("transformations ", it->second, " and ", u, " have equal images"),
                           {it->second, u});
  }
  std::size_t hit = 0;
  for (const auto& d : down)
    if (images.count(d.tables())) ++hit;
  if (up.size() != down.size() || hit != down.size()) {
    report.add("full", detail::concat(up.size(), " transformations upstairs, ", down.size(), " downstairs, ", hit,
                                      " of them realized"), {up.size(), down.size()});
  }
  auto back = nat_trans_set(b, a, opts);
  if (back.size() <= cap) {
    for (const auto& f : up)
      for (const auto& h : back) {
        ++report.checked;
        if (!(ev(ctx, compose(h, f)) == compose(ev(ctx, h), ev(ctx, f)))) {
          report.add("composition", "ev does not preserve a composite A -> B -> A");
        }
      }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Isomorphism of pro-categories

struct ProCatIsomorphism {
  std::vector<std::size_t> objects;
  std::vector<std::vector<Table>> homs; // homs[k][x*n+y] : Hom_k(x,y) -> Hom'_k(phi x, phi y)
};

namespace detail {

class ProCatIsoSearch {
public:
  ProCatIsoSearch(const ProCat& p, const ProCat& q, std::vector<std::size_t> objects)
      : p_(p), q_(q), obj_(std::move(objects)), c_(p.levels.back()), d_(q.levels.back()) {
    n_ = p.object_count();
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y) {
        offset_.push_back(total_);
        total_ += c_.hom_size(x, y);
      }
    assign_.assign(total_, unset);
    used_.resize(n_ * n_);
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y) used_[x * n_ + y].assign(d_.hom_size(obj_[x], obj_[y]), false);
  }

  std::optional<ProCatIsomorphism> run() {
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y)
        if (c_.hom_size(x, y) != d_.hom_size(obj_[x], obj_[y])) return std::nullopt;
    for (std::size_t x = 0; x < n_; ++x)
      if (!set(x, x, c_.identity(x), d_.identity(obj_[x]))) return std::nullopt;
    if (!dfs(0)) return std::nullopt;
    return result_;
  }

private:
  std::size_t var(std::size_t x, std::size_t y, std::size_t h) const { return offset_[x * n_ + y] + h; }

  bool set(std::size_t x, std::size_t y, std::size_t h, std::size_t v) {
    auto& u = used_[x * n_ + y];
    if (u[v]) return false;
    u[v] = true;
    assign_[var(x, y, h)] = v;
    trail_.push_back({x, y, h});
    return consistent(x, y, h);
  }

  // Every composition triple involving (x, y, h) with all three values assigned commutes.
  bool consistent(std::size_t x, std::size_t y, std::size_t h) {
    for (std::size_t z = 0; z < n_; ++z) {
      for (std::size_t g = 0; g < c_.hom_size(y, z); ++g) { // g . h
        auto vg = assign_[var(y, z, g)];
        auto vgh = assign_[var(x, z, c_.compose(x, y, z, g, h))];
        if (vg == unset || vgh == unset) continue;
        if (d_.compose(obj_[x], obj_[y], obj_[z], vg, assign_[var(x, y, h)]) != vgh) return false;
      }
      for (std::size_t f = 0; f < c_.hom_size(z, x); ++f) { // h . f
        auto vf = assign_[var(z, x, f)];
        auto vhf = assign_[var(z, y, c_.compose(z, x, y, h, f))];
        if (vf == unset || vhf == unset) continue;
        if (d_.compose(obj_[z], obj_[x], obj_[y], assign_[var(x, y, h)], vf) != vhf) return false;
      }
    }
    // h as a composite
    for (std::size_t w = 0; w < n_; ++w)
      for (std::size_t f = 0; f < c_.hom_size(x, w); ++f) {
        auto vf = assign_[var(x, w, f)];
        if (vf == unset) continue;
        for (std::size_t g = 0; g < c_.hom_size(w, y); ++g) {
          if (c_.compose(x, w, y, g, f) != h) continue;
          auto vg = assign_[var(w, y, g)];
          if (vg == unset) continue;
          if (d_.compose(obj_[x], obj_[w], obj_[y], vg, vf) != assign_[var(x, y, h)]) return false;
        }
      }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      auto [x, y, h] = trail_.back();
      trail_.pop_back();
      used_[x * n_ + y][assign_[var(x, y, h)]] = false;
      assign_[var(x, y, h)] = unset;
    }
  }

  bool dfs(std::size_t from) {
    while (from < total_ && assign_[from] != unset) ++from;
    if (from == total_) return finish();
    std::size_t pair = 0;
    while (pair + 1 < offset_.size() && offset_[pair + 1] <= from) ++pair;
    const auto x = pair / n_, y = pair % n_, h = from - offset_[pair];
    for (std::size_t v = 0; v < d_.hom_size(obj_[x], obj_[y]); ++v) {
      auto mark = trail_.size();
      if (!used_[pair][v] && set(x, y, h, v) && dfs(from + 1)) return true;
      undo(mark);
    }
    return false;
  }

  // Coarser levels are forced by surjectivity of the transitions.
  bool finish() {
    const auto depth = p_.depth();
    if (q_.depth() != depth) return false;
    ProCatIsomorphism iso;
    iso.objects = obj_;
    iso.homs.resize(depth);
    auto& top = iso.homs[depth - 1];
    top.resize(n_ * n_);
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y)
        for (std::size_t h = 0; h < c_.hom_size(x, y); ++h) top[x * n_ + y].push_back(assign_[var(x, y, h)]);
    for (std::size_t k = depth - 1; k > 0; --k) {
      auto& lower = iso.homs[k - 1];
      lower.resize(n_ * n_);
      for (std::size_t x = 0; x < n_; ++x)
        for (std::size_t y = 0; y < n_; ++y) {
          const auto& ck = p_.level(k - 1);
          const auto& dk = q_.level(k - 1);
          if (ck.hom_size(x, y) != dk.hom_size(obj_[x], obj_[y])) return false;
          Table t(ck.hom_size(x, y), unset);
          const auto& tp = p_.transitions[k - 1][x * n_ + y];
          const auto& tq = q_.transitions[k - 1][obj_[x] * n_ + obj_[y]];
          for (std::size_t h = 0; h < tp.source().size; ++h) {
            auto image = tq(iso.homs[k][x * n_ + y][h]);
            auto& slot = t[tp(h)];
            if (slot != unset && slot != image) return false;
            slot = image;
          }
          if (std::find(t.begin(), t.end(), unset) != t.end()) return false;
          if (!FinMap(FinSet(t.size()), FinSet(t.size()), t).is_bijective()) return false;
          lower[x * n_ + y] = std::move(t);
        }
    }
    result_ = std::move(iso);
    return true;
  }

  struct Var {
    std::size_t x, y, h;
  };
  const ProCat& p_;
  const ProCat& q_;
  std::vector<std::size_t> obj_;
  const FinCat& c_;
  const FinCat& d_;
  std::size_t n_ = 0, total_ = 0;
  std::vector<std::size_t> offset_, assign_;
  std::vector<std::vector<bool>> used_;
  std::vector<Var> trail_;
  ProCatIsomorphism result_;
};

} // namespace detail

/// Exhaustive search: object bijections, then finest-level hom bijections
/// respecting identities and composition; coarser levels must be induced.
inline std::optional<ProCatIsomorphism> find_procat_isomorphism(const ProCat& p, const ProCat& q) {
  if (p.object_count() != q.object_count() || p.depth() != q.depth()) return std::nullopt;
  std::vector<std::size_t> perm(p.object_count());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    detail::ProCatIsoSearch search(p, q, perm);
    if (auto iso = search.run()) return iso;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

/// Rebuilds Pi from evaluations at every object and compares it with p.
inline ValidationReport reconstruction_check(const ProCat& p, std::size_t generator_bound = 64) {
  ValidationReport report;
  auto base = std::make_shared<const ProCat>(p);
  auto g = all_points(base, generator_bound);
  auto valid = validate_presentation(g);
  if (!valid.ok()) {
    report.merge(valid, "input");
    return report;
  }
  auto data = evaluation_data(g);
  report.merge(cross_validate(g, data), "cross-validation");
  ProCat rebuilt;
  try {
    rebuilt = reconstruct_from_evaluations(g, data);
  } catch (const StageError& e) {
    report.add("reconstruction", e.what());
    return report;
  }
  report.merge(validate_procat(rebuilt), "rebuilt");
  ++report.checked;
  if (!find_procat_isomorphism(p, rebuilt)) {
    report.add("isomorphism", "the category rebuilt from evaluations is not isomorphic to the original");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Coinitiality of Psi : el(F_{x_1}) x ... x el(F_{x_n}) -> el(F_x)

struct PsiReport {
  ValidationReport report;
  std::size_t nodes = 0;
  std::size_t legs = 0;  // objects of (Psi | (A, a)) examined
  std::size_t zigzags = 0;
};

namespace detail {

/// An object of (Psi | (A, a)): members B_i with points b_i and maps u_i : B_i -> A, u_i(b_i) = a_i.
struct PsiLeg {
  std::vector<std::size_t> members;
  std::vector<std::size_t> points;
  std::vector<NatTrans> maps;
};

} // namespace detail

inline PsiReport psi_coinitiality_check(const ExodromyContext& ctx, std::size_t window, std::size_t leg_cap = 6) {
  PsiReport out;
  const auto& g = ctx.presentation;
  const auto nf = g.fibre_count();
  const auto level = g.base->finest();
  auto fam = generate_test_family(g, level);
  std::vector<std::size_t> all(nf);
  for (std::size_t i = 0; i < nf; ++i) all[i] = i;
  auto el = elements_category(g, fam, all, window);
  out.nodes = el.nodes.size();

  for (std::size_t u = 0; u < el.nodes.size(); ++u) {
    const auto& node = el.nodes[u];
    const auto& a = el.object(node);
    // (a) the fold map A + ... + A -> A carries psi(a_1, ..., a_n) to a.
    {
      std::vector<CtsFunctor> copies(nf, a);
      auto sum = coproduct_all(g.base, a.level, copies);
      std::vector<Table> fold(a.object_count());
      for (std::size_t x = 0; x < a.object_count(); ++x)
        for (std::size_t c = 0; c < nf; ++c)
          for (std::size_t e = 0; e < a.value_size(x); ++e) fold[x].push_back(e);
      NatTrans nabla(sum, a, fold);
      ++out.report.checked;
      bool ok = check_nat_trans(nabla).ok();
      for (std::size_t i = 0; i < nf && ok; ++i) {
        const auto x = g.fibre_points[i];
        auto psi = i * a.value_size(x) + node.point[i];
        ok = nabla.component(x)(psi) == node.point[i];
      }
      if (!ok) out.report.add("nonempty", detail::concat("fold map fails over node ", u), {u});
    }
    // (b) legs over (A, a) from window members, joined through D_i = B_i x_A C_i.
    std::vector<detail::PsiLeg> legs;
    std::vector<std::vector<std::pair<std::size_t, NatTrans>>> per_coordinate(nf);
    for (std::size_t i = 0; i < nf; ++i) {
      const auto x = g.fibre_points[i];
      for (std::size_t m = 0; m < fam.members.size() && per_coordinate[i].size() < leg_cap; ++m) {
        const auto& b = fam.members[m].functor;
        if (b.total_size() > window) continue;
        auto maps = nat_trans_set(b, a);
        for (auto& t : maps) {
          for (std::size_t bp = 0; bp < b.value_size(x); ++bp) {
            if (t.component(x)(bp) == node.point[i] && per_coordinate[i].size() < leg_cap) {
              per_coordinate[i].emplace_back(m * 1024 + bp, t);
            }
          }
        }
      }
    }
    // Legs: choose for every coordinate one candidate; use diagonal choices
    // (the r-th candidate everywhere, clamped) to keep the count linear.
    std::size_t longest = 0;
    bool empty_coordinate = false;
    for (const auto& c : per_coordinate) {
      longest = std::max(longest, c.size());
      empty_coordinate = empty_coordinate || c.empty();
    }
    if (empty_coordinate) {
      out.report.add("nonempty", detail::concat("no leg over node ", u, " in the window"), {u});
      continue;
    }
    for (std::size_t r = 0; r < longest; ++r) {
      detail::PsiLeg leg;
      for (std::size_t i = 0; i < nf; ++i) {
        const auto& [code, t] = per_coordinate[i][std::min(r, per_coordinate[i].size() - 1)];
        leg.members.push_back(code / 1024);
        leg.points.push_back(code % 1024);
        leg.maps.push_back(t);
      }
      legs.push_back(std::move(leg));
    }
    out.legs += legs.size();
    for (std::size_t l1 = 0; l1 < legs.size(); ++l1)
      for (std::size_t l2 = 0; l2 < legs.size(); ++l2) {
        ++out.report.checked;
        bool ok = true;
        for (std::size_t i = 0; i < nf && ok; ++i) {
          const auto x = g.fibre_points[i];
          auto pb = functor_pullback(legs[l1].maps[i], legs[l2].maps[i]);
          // d_i = (b_i, c_i) is a point of D_i(x_i)
          const auto& p1 = pb.proj1.component(x).table();
          const auto& p2 = pb.proj2.component(x).table();
          std::optional<std::size_t> d;
          for (std::size_t e = 0; e < p1.size(); ++e)
            if (p1[e] == legs[l1].points[i] && p2[e] == legs[l2].points[i]) d = e;
          ok = d.has_value() && check_nat_trans(pb.proj1).ok() && check_nat_trans(pb.proj2).ok() &&
               compose(legs[l1].maps[i], pb.proj1) == compose(legs[l2].maps[i], pb.proj2);
        }
        if (!ok) {
          out.report.add("connected", detail::concat("legs ", l1, " and ", l2, " over node ", u,
                                                     " are not joined by the fibre-product node"), {u, l1, l2});
        } else {
          ++out.zigzags;
        }
      }
  }
  return out;
}

} // namespace exo
