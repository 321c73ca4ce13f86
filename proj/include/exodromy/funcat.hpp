#pragma once

// Continuous finite-set-valued functors on a pro-category, represented by the
// level through which they factor. Continuity is then automatic: the set of
// arrows sending a to b is a union of fibres of the projection to that level.

#include "exodromy/errors.hpp"
#include "exodromy/finset.hpp"
#include "exodromy/procat.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace exo {

using Table = std::vector<std::size_t>;

struct CtsFunctor {
  std::shared_ptr<const ProCat> base;
  std::size_t level = 0;
  std::vector<FinSet> values;               // values[x]
  std::vector<std::vector<Table>> actions;  // actions[x*n+y][h] : values[x] -> values[y]

  const ProCat& category() const { return *base; }
  const FinCat& level_category() const { return base->level(level); }
  std::size_t object_count() const { return base->object_count(); }
  std::size_t value_size(std::size_t x) const { return values.at(x).size; }

  std::size_t apply(std::size_t x, std::size_t y, std::size_t h, std::size_t a) const {
    return actions[x * object_count() + y][h][a];
  }

  FinMap arrow(std::size_t x, std::size_t y, std::size_t h) const {
    return FinMap(values.at(x), values.at(y), actions.at(x * object_count() + y).at(h));
  }

  std::size_t total_size() const {
    std::size_t t = 0;
    for (const auto& v : values) t += v.size;
    return t;
  }

  friend bool operator==(const CtsFunctor& a, const CtsFunctor& b) {
    if (a.base != b.base && !(a.base && b.base && *a.base == *b.base)) return false;
    return a.level == b.level && a.values == b.values && a.actions == b.actions;
  }
};

inline bool same_base(const CtsFunctor& a, const CtsFunctor& b) {
  return a.base == b.base || (a.base && b.base && *a.base == *b.base);
}

inline void require_same_base(const CtsFunctor& a, const CtsFunctor& b, const char* op) {
  if (!same_base(a, b)) throw ShapeError(detail::concat(op, ": functors live on different pro-categories"));
}

inline ValidationReport check_functor(const CtsFunctor& f) {
  ValidationReport report;
  if (!f.base) {
    report.add("shape", "functor has no base category");
    return report;
  }
  if (f.level >= f.base->depth()) {
    report.add("level", detail::concat("level ", f.level, " beyond the ", f.base->depth(), " levels of the base"));
    return report;
  }
  const auto& c = f.level_category();
  const auto n = c.object_count();
  if (f.values.size() != n || f.actions.size() != n * n) {
    report.add("shape", "functor data does not match the object count");
    return report;
  }
  bool shapes = true;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const auto& tables = f.actions[x * n + y];
      if (tables.size() != c.hom_size(x, y)) {
        report.add("shape", detail::concat("Hom(", x, ",", y, ") has ", c.hom_size(x, y), " arrows but ",
                                           tables.size(), " action tables"), {x, y});
        shapes = false;
        continue;
      }
      for (std::size_t h = 0; h < tables.size(); ++h) {
        bool ok = tables[h].size() == f.value_size(x) &&
                  std::all_of(tables[h].begin(), tables[h].end(), [&](auto v) { return v < f.value_size(y); });
        if (!ok) {
          report.add("shape", detail::concat("action table of arrow ", h, " in Hom(", x, ",", y,
                                             ") is not a map F(", x, ") -> F(", y, ")"), {x, y, h});
          shapes = false;
        }
      }
    }
  }
  if (!shapes) return report;
  for (std::size_t x = 0; x < n; ++x) {
    ++report.checked;
    const auto& t = f.actions[x * n + x][c.identity(x)];
    for (std::size_t a = 0; a < t.size(); ++a) {
      if (t[a] != a) {
        report.add("identity", detail::concat("F(id_", x, ") moves element ", a), {x, a});
        break;
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t fa = 0; fa < c.hom_size(x, y); ++fa)
          for (std::size_t g = 0; g < c.hom_size(y, z); ++g) {
            ++report.checked;
            auto gf = c.compose(x, y, z, g, fa);
            for (std::size_t a = 0; a < f.value_size(x); ++a) {
              if (f.apply(x, z, gf, a) != f.apply(y, z, g, f.apply(x, y, fa, a))) {
                report.add("composition",
                           detail::concat("F(g.f) != F(g)F(f) for composable pair (g,f) = (", g, ",", fa,
                                          ") over ", x, "->", y, "->", z, " at element ", a),
                           {g, fa, x, y, z, a});
                break;
              }
            }
          }
  return report;
}

/// Blank functor data with tables sized for the given values (all entries 0).
inline CtsFunctor blank_functor(std::shared_ptr<const ProCat> base, std::size_t level, std::vector<FinSet> values) {
  CtsFunctor f;
  f.base = std::move(base);
  f.level = level;
  f.values = std::move(values);
  const auto& c = f.level_category();
  const auto n = c.object_count();
  f.actions.resize(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      f.actions[x * n + y].assign(c.hom_size(x, y), Table(f.values[x].size, 0));
  return f;
}

inline CtsFunctor constant_functor(std::shared_ptr<const ProCat> base, std::size_t level, std::size_t size) {
  const auto n = base->object_count();
  auto f = blank_functor(std::move(base), level, std::vector<FinSet>(n, FinSet(size)));
  for (auto& tables : f.actions)
    for (auto& t : tables)
      for (std::size_t a = 0; a < t.size(); ++a) t[a] = a;
  return f;
}

inline CtsFunctor terminal_functor(std::shared_ptr<const ProCat> base, std::size_t level = 0) {
  return constant_functor(std::move(base), level, 1);
}

inline CtsFunctor empty_functor(std::shared_ptr<const ProCat> base, std::size_t level = 0) {
  return constant_functor(std::move(base), level, 0);
}

/// h^x at level k: y ↦ Hom_k(x, y), arrows act by post-composition.
inline CtsFunctor corepresentable(std::shared_ptr<const ProCat> base, std::size_t level, std::size_t x) {
  const auto& c = base->level(level);
  const auto n = c.object_count();
  if (x >= n) throw ShapeError(detail::concat("corepresentable: object ", x, " out of range"));
  std::vector<FinSet> values;
  for (std::size_t y = 0; y < n; ++y) values.emplace_back(c.hom_size(x, y));
  auto f = blank_functor(base, level, std::move(values));
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t z = 0; z < n; ++z)
      for (std::size_t g = 0; g < c.hom_size(y, z); ++g)
        for (std::size_t a = 0; a < c.hom_size(x, y); ++a) f.actions[y * n + z][g][a] = c.compose(x, y, z, g, a);
  return f;
}

/// The same functor presented through a finer level.
inline CtsFunctor refine(const CtsFunctor& f, std::size_t level) {
  if (level < f.level || level >= f.base->depth()) {
    throw ShapeError(detail::concat("refine: cannot move a level-", f.level, " functor to level ", level));
  }
  if (level == f.level) return f;
  auto r = blank_functor(f.base, level, f.values);
  const auto n = f.object_count();
  const auto& c = r.level_category();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h)
        r.actions[x * n + y][h] = f.actions[x * n + y][f.base->project(x, y, h, level, f.level)];
  return r;
}

/// Morphism in Fun^cts(Π, Fin). Components are level independent; naturality is
/// checked at the finer of the two endpoint levels.
struct NatTrans {
  std::shared_ptr<const CtsFunctor> source_ptr;
  std::shared_ptr<const CtsFunctor> target_ptr;
  std::vector<FinMap> components;

  NatTrans() = default;
  NatTrans(CtsFunctor source, CtsFunctor target, const std::vector<Table>& tables)
      : NatTrans(std::make_shared<const CtsFunctor>(std::move(source)),
                 std::make_shared<const CtsFunctor>(std::move(target)), tables) {}
  NatTrans(std::shared_ptr<const CtsFunctor> source, std::shared_ptr<const CtsFunctor> target,
           const std::vector<Table>& tables)
      : source_ptr(std::move(source)), target_ptr(std::move(target)) {
    if (tables.size() != source_ptr->object_count()) throw ShapeError("NatTrans: one component per object");
    for (std::size_t x = 0; x < tables.size(); ++x) {
      components.emplace_back(source_ptr->values[x], target_ptr->values[x], tables[x]);
    }
  }

  const CtsFunctor& source() const { return *source_ptr; }
  const CtsFunctor& target() const { return *target_ptr; }
  const FinMap& component(std::size_t x) const { return components.at(x); }

  std::vector<Table> tables() const {
    std::vector<Table> t;
    for (const auto& c : components) t.push_back(c.table());
    return t;
  }

  friend bool operator==(const NatTrans& a, const NatTrans& b) {
    return a.source() == b.source() && a.target() == b.target() && a.components == b.components;
  }
};

inline std::size_t common_level(const CtsFunctor& a, const CtsFunctor& b) { return std::max(a.level, b.level); }

inline ValidationReport check_nat_trans(const NatTrans& t) {
  ValidationReport report;
  const auto& s = t.source();
  const auto& g = t.target();
  if (!same_base(s, g)) {
    report.add("shape", "source and target live on different pro-categories");
    return report;
  }
  const auto m = common_level(s, g);
  const auto fs = refine(s, m);
  const auto fg = refine(g, m);
  const auto& c = fs.level_category();
  const auto n = c.object_count();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h) {
        ++report.checked;
        for (std::size_t a = 0; a < fs.value_size(x); ++a) {
          if (t.component(y)(fs.apply(x, y, h, a)) != fg.apply(x, y, h, t.component(x)(a))) {
            report.add("naturality", detail::concat("square for arrow ", h, " in Hom(", x, ",", y,
                                                    ") fails at element ", a), {x, y, h, a});
            break;
          }
        }
      }
  return report;
}

inline NatTrans identity_nat(const CtsFunctor& f) {
  auto p = std::make_shared<const CtsFunctor>(f);
  std::vector<Table> tables;
  for (const auto& v : f.values) tables.push_back(FinMap::identity(v).table());
  return NatTrans(p, p, tables);
}

/// beta ∘ alpha
inline NatTrans compose(const NatTrans& beta, const NatTrans& alpha) {
  if (!(alpha.target() == beta.source())) throw ShapeError("compose: transformations are not composable");
  std::vector<Table> tables;
  for (std::size_t x = 0; x < alpha.components.size(); ++x) {
    tables.push_back(exo::compose(beta.component(x), alpha.component(x)).table());
  }
  return NatTrans(alpha.source_ptr, beta.target_ptr, tables);
}

inline bool is_mono(const NatTrans& t) {
  return std::all_of(t.components.begin(), t.components.end(), [](const FinMap& m) { return m.is_injective(); });
}

inline bool is_effective_epi(const NatTrans& t) {
  return std::all_of(t.components.begin(), t.components.end(), [](const FinMap& m) { return m.is_surjective(); });
}

inline bool is_iso(const NatTrans& t) { return is_mono(t) && is_effective_epi(t); }

struct SearchOptions {
  std::optional<std::size_t> limit;   // stop after this many solutions
  bool injective = false;             // only componentwise injective maps
  std::mt19937_64* shuffle = nullptr; // randomise value order (for generators)
};

namespace detail {

inline std::vector<std::size_t> value_order(std::size_t n, std::mt19937_64* rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (rng) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[(*rng)() % i]);
  }
  return order;
}

constexpr std::size_t unset = static_cast<std::size_t>(-1);

/// Backtracking search for natural transformations f => g with forward propagation
/// along every arrow: fixing phi_x(a) = b forces phi_y(F(h)a) = G(h)b.
class TransformationSearch {
public:
  TransformationSearch(const CtsFunctor& f, const CtsFunctor& g, const SearchOptions& opts)
      : f_(refine(f, common_level(f, g))), g_(refine(g, common_level(f, g))), opts_(opts) {
    const auto& c = f_.level_category();
    n_ = c.object_count();
    out_.resize(n_);
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y)
        for (std::size_t h = 0; h < c.hom_size(x, y); ++h)
          if (h != c.identity(x) || x != y) out_[x].emplace_back(y, h);
    offset_.resize(n_ + 1, 0);
    for (std::size_t x = 0; x < n_; ++x) {
      offset_[x + 1] = offset_[x] + f_.value_size(x);
      for (std::size_t a = 0; a < f_.value_size(x); ++a) var_object_.push_back(x);
    }
    assign_.assign(offset_[n_], unset);
    used_.resize(n_);
    for (std::size_t x = 0; x < n_; ++x) used_[x].assign(g_.value_size(x), false);
  }

  std::size_t run(const std::function<bool(const std::vector<Table>&)>& visit) {
    visit_ = &visit;
    count_ = 0;
    stop_ = false;
    if (opts_.injective) {
      for (std::size_t x = 0; x < n_; ++x)
        if (f_.value_size(x) > g_.value_size(x)) return 0;
    }
    dfs(0);
    return count_;
  }

private:
  bool assign(std::size_t x0, std::size_t a0, std::size_t b0) {
    queue_.clear();
    queue_.push_back({x0, a0, b0});
    while (!queue_.empty()) {
      auto [x, a, b] = queue_.back();
      queue_.pop_back();
      auto v = offset_[x] + a;
      if (assign_[v] != unset) {
        if (assign_[v] != b) return false;
        continue;
      }
      if (opts_.injective) {
        if (used_[x][b]) return false;
        used_[x][b] = true;
      }
      assign_[v] = b;
      trail_.push_back(v);
      for (auto [y, h] : out_[x]) queue_.push_back({y, f_.apply(x, y, h, a), g_.apply(x, y, h, b)});
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      auto v = trail_.back();
      trail_.pop_back();
      if (opts_.injective) used_[var_object_[v]][assign_[v]] = false;
      assign_[v] = unset;
    }
  }

  void dfs(std::size_t from) {
    if (stop_) return;
    while (from < assign_.size() && assign_[from] != unset) ++from;
    if (from == assign_.size()) {
      std::vector<Table> tables(n_);
      for (std::size_t x = 0; x < n_; ++x)
        tables[x].assign(assign_.begin() + offset_[x], assign_.begin() + offset_[x + 1]);
      ++count_;
      if (!(*visit_)(tables) || (opts_.limit && count_ >= *opts_.limit)) stop_ = true;
      return;
    }
    const auto x = var_object_[from];
    const auto a = from - offset_[x];
    for (auto b : value_order(g_.value_size(x), opts_.shuffle)) {
      auto mark = trail_.size();
      if (assign(x, a, b)) dfs(from + 1);
      undo(mark);
      if (stop_) return;
    }
  }

  struct Pending {
    std::size_t x, a, b;
  };

  CtsFunctor f_, g_;
  SearchOptions opts_;
  std::size_t n_ = 0;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out_;
  std::vector<std::size_t> offset_, var_object_, assign_, trail_;
  std::vector<std::vector<bool>> used_;
  std::vector<Pending> queue_;
  const std::function<bool(const std::vector<Table>&)>* visit_ = nullptr;
  std::size_t count_ = 0;
  bool stop_ = false;
};

} // namespace detail

/// Visits every natural transformation f => g in lexicographic order of the
/// concatenated component tables. Returns the number visited.
inline std::size_t for_each_transformation(const CtsFunctor& f, const CtsFunctor& g,
                                           const std::function<bool(const std::vector<Table>&)>& visit,
                                           const SearchOptions& opts = {}) {
  require_same_base(f, g, "for_each_transformation");
  detail::TransformationSearch search(f, g, opts);
  return search.run(visit);
}

inline std::vector<NatTrans> nat_trans_set(const CtsFunctor& f, const CtsFunctor& g, const SearchOptions& opts = {}) {
  auto fp = std::make_shared<const CtsFunctor>(f);
  auto gp = std::make_shared<const CtsFunctor>(g);
  std::vector<NatTrans> out;
  for_each_transformation(f, g, [&](const std::vector<Table>& t) {
    out.emplace_back(fp, gp, t);
    return true;
  }, opts);
  return out;
}

/// Number of transformations, or nullopt when there are more than `cap`.
inline std::optional<std::size_t> count_nat_trans(const CtsFunctor& f, const CtsFunctor& g, std::size_t cap) {
  SearchOptions opts;
  opts.limit = cap + 1;
  auto n = for_each_transformation(f, g, [](const std::vector<Table>&) { return true; }, opts);
  if (n > cap) return std::nullopt;
  return n;
}

/// Exhaustive search over componentwise bijections, pruned by value sizes.
inline std::optional<NatTrans> find_isomorphism(const CtsFunctor& a, const CtsFunctor& b) {
  if (!same_base(a, b) || a.values.size() != b.values.size()) return std::nullopt;
  for (std::size_t x = 0; x < a.values.size(); ++x)
    if (a.value_size(x) != b.value_size(x)) return std::nullopt;
  SearchOptions opts;
  opts.injective = true;
  opts.limit = 1;
  auto found = nat_trans_set(a, b, opts);
  if (found.empty()) return std::nullopt;
  return found.front();
}

inline bool isomorphic(const CtsFunctor& a, const CtsFunctor& b) { return find_isomorphism(a, b).has_value(); }

// ---------------------------------------------------------------------------
// Pointwise pretopos structure. Operands are refined to their common level.

struct FunctorProduct {
  CtsFunctor functor;
  NatTrans proj1;
  NatTrans proj2;
};

inline FunctorProduct functor_product(const CtsFunctor& a0, const CtsFunctor& b0) {
  require_same_base(a0, b0, "functor_product");
  const auto m = common_level(a0, b0);
  const auto a = refine(a0, m);
  const auto b = refine(b0, m);
  const auto n = a.object_count();
  std::vector<FinSet> values;
  std::vector<Table> p1, p2;
  for (std::size_t x = 0; x < n; ++x) {
    auto p = product(a.values[x], b.values[x]);
    values.push_back(p.set);
    p1.push_back(p.proj1.table());
    p2.push_back(p.proj2.table());
  }
  auto r = blank_functor(a.base, m, values);
  const auto& c = r.level_category();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h)
        for (std::size_t i = 0; i < a.value_size(x); ++i)
          for (std::size_t j = 0; j < b.value_size(x); ++j)
            r.actions[x * n + y][h][i * b.value_size(x) + j] =
                a.apply(x, y, h, i) * b.value_size(y) + b.apply(x, y, h, j);
  auto rp = std::make_shared<const CtsFunctor>(r);
  return {r, NatTrans(rp, std::make_shared<const CtsFunctor>(a0), p1),
          NatTrans(rp, std::make_shared<const CtsFunctor>(b0), p2)};
}

struct FunctorCoproduct {
  CtsFunctor functor;
  NatTrans inj1;
  NatTrans inj2;
};

inline FunctorCoproduct functor_coproduct(const CtsFunctor& a0, const CtsFunctor& b0) {
  require_same_base(a0, b0, "functor_coproduct");
  const auto m = common_level(a0, b0);
  const auto a = refine(a0, m);
  const auto b = refine(b0, m);
  const auto n = a.object_count();
  std::vector<FinSet> values;
  std::vector<Table> i1, i2;
  for (std::size_t x = 0; x < n; ++x) {
    auto c = coproduct(a.values[x], b.values[x]);
    values.push_back(c.set);
    i1.push_back(c.inj1.table());
    i2.push_back(c.inj2.table());
  }
  auto r = blank_functor(a.base, m, values);
  const auto& c = r.level_category();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h) {
        auto& t = r.actions[x * n + y][h];
        for (std::size_t i = 0; i < a.value_size(x); ++i) t[i] = a.apply(x, y, h, i);
        for (std::size_t j = 0; j < b.value_size(x); ++j)
          t[a.value_size(x) + j] = a.value_size(y) + b.apply(x, y, h, j);
      }
  auto rp = std::make_shared<const CtsFunctor>(r);
  return {r, NatTrans(std::make_shared<const CtsFunctor>(a0), rp, i1),
          NatTrans(std::make_shared<const CtsFunctor>(b0), rp, i2)};
}

/// Coproduct of a list; summands occupy consecutive blocks in list order.
inline CtsFunctor coproduct_all(std::shared_ptr<const ProCat> base, std::size_t level,
                                const std::vector<CtsFunctor>& parts) {
  auto acc = empty_functor(std::move(base), level);
  for (const auto& p : parts) acc = functor_coproduct(acc, p).functor;
  return acc;
}

inline void require_parallel(const NatTrans& s, const NatTrans& t, const char* op) {
  if (!(s.source() == t.source()) || !(s.target() == t.target())) {
    throw ShapeError(detail::concat(op, ": transformations are not parallel"));
  }
}

struct FunctorSub {
  CtsFunctor functor;
  NatTrans inclusion;
};

/// Restriction of `f` (refined to `level`) to elementwise subsets closed under the action.
inline CtsFunctor restrict_functor(const CtsFunctor& f, const std::vector<std::vector<std::size_t>>& keep,
                                   std::vector<std::vector<std::size_t>>& position) {
  const auto n = f.object_count();
  position.assign(n, {});
  std::vector<FinSet> values;
  for (std::size_t x = 0; x < n; ++x) {
    position[x].assign(f.value_size(x), detail::unset);
    for (std::size_t i = 0; i < keep[x].size(); ++i) position[x][keep[x][i]] = i;
    values.emplace_back(keep[x].size());
  }
  auto r = blank_functor(f.base, f.level, values);
  const auto& c = r.level_category();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h)
        for (std::size_t i = 0; i < keep[x].size(); ++i) {
          auto img = position[y][f.apply(x, y, h, keep[x][i])];
          if (img == detail::unset) throw ShapeError("restrict_functor: subset is not closed under the action");
          r.actions[x * n + y][h][i] = img;
        }
  return r;
}

inline FunctorSub functor_equaliser(const NatTrans& s, const NatTrans& t) {
  require_parallel(s, t, "functor_equaliser");
  const auto m = common_level(s.source(), s.target());
  const auto a = refine(s.source(), m);
  const auto n = a.object_count();
  std::vector<std::vector<std::size_t>> keep(n), pos;
  for (std::size_t x = 0; x < n; ++x) keep[x] = equaliser(s.component(x), t.component(x)).inclusion.table();
  auto e = restrict_functor(a, keep, pos);
  return {e, NatTrans(std::make_shared<const CtsFunctor>(e), s.source_ptr, keep)};
}

struct FunctorQuotient {
  CtsFunctor functor;
  NatTrans projection;
};

/// Pointwise quotient of `b` by the given class labelling (must be compatible with the action).
inline FunctorQuotient quotient_functor(const CtsFunctor& b0, const std::vector<Table>& label,
                                        const std::vector<std::size_t>& class_counts,
                                        std::shared_ptr<const CtsFunctor> original = nullptr) {
  const auto& b = b0;
  const auto n = b.object_count();
  std::vector<FinSet> values;
  std::vector<Table> rep(n);
  for (std::size_t x = 0; x < n; ++x) {
    values.emplace_back(class_counts[x]);
    rep[x].assign(class_counts[x], 0);
    for (std::size_t a = b.value_size(x); a-- > 0;) rep[x][label[x][a]] = a;
  }
  auto q = blank_functor(b.base, b.level, values);
  const auto& c = q.level_category();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h)
        for (std::size_t k = 0; k < class_counts[x]; ++k) {
          q.actions[x * n + y][h][k] = label[y][b.apply(x, y, h, rep[x][k])];
          for (std::size_t a = 0; a < b.value_size(x); ++a) {
            if (label[x][a] == k && label[y][b.apply(x, y, h, a)] != q.actions[x * n + y][h][k]) {
              throw ShapeError("quotient_functor: relation is not compatible with the action");
            }
          }
        }
  if (!original) original = std::make_shared<const CtsFunctor>(b);
  return {q, NatTrans(original, std::make_shared<const CtsFunctor>(q), label)};
}

inline FunctorQuotient functor_coequaliser(const NatTrans& s, const NatTrans& t) {
  require_parallel(s, t, "functor_coequaliser");
  const auto m = common_level(s.source(), s.target());
  const auto b = refine(s.target(), m);
  const auto n = b.object_count();
  std::vector<Table> label(n);
  std::vector<std::size_t> counts(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto q = coequaliser(s.component(x), t.component(x));
    label[x] = q.projection.table();
    counts[x] = q.set.size;
  }
  return quotient_functor(b, label, counts, s.target_ptr);
}

struct FunctorPullback {
  CtsFunctor functor;
  NatTrans proj1;
  NatTrans proj2;
};

/// A ×_C B for f: A => C and g: B => C, as a subfunctor of A × B.
inline FunctorPullback functor_pullback(const NatTrans& f, const NatTrans& g) {
  if (!(f.target() == g.target())) throw ShapeError("functor_pullback: maps have different targets");
  auto prod = functor_product(f.source(), g.source());
  const auto& p = prod.functor;
  const auto n = p.object_count();
  std::vector<std::vector<std::size_t>> keep(n), pos;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t e = 0; e < p.value_size(x); ++e) {
      if (f.component(x)(prod.proj1.component(x)(e)) == g.component(x)(prod.proj2.component(x)(e))) keep[x].push_back(e);
    }
  }
  auto r = restrict_functor(p, keep, pos);
  auto rp = std::make_shared<const CtsFunctor>(r);
  std::vector<Table> t1(n), t2(n);
  for (std::size_t x = 0; x < n; ++x)
    for (auto e : keep[x]) {
      t1[x].push_back(prod.proj1.component(x)(e));
      t2[x].push_back(prod.proj2.component(x)(e));
    }
  return {r, NatTrans(rp, f.source_ptr, t1), NatTrans(rp, g.source_ptr, t2)};
}

struct FunctorImage {
  CtsFunctor image;
  NatTrans epi;
  NatTrans mono;
};

inline FunctorImage functor_image(const NatTrans& t) {
  const auto m = common_level(t.source(), t.target());
  const auto b = refine(t.target(), m);
  const auto n = b.object_count();
  std::vector<std::vector<std::size_t>> keep(n), pos;
  std::vector<Table> epi(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto fac = image_factorization(t.component(x));
    keep[x] = fac.mono.table();
    epi[x] = fac.epi.table();
  }
  auto img = restrict_functor(b, keep, pos);
  auto ip = std::make_shared<const CtsFunctor>(img);
  return {img, NatTrans(t.source_ptr, ip, epi), NatTrans(ip, t.target_ptr, keep)};
}

// ---------------------------------------------------------------------------
// Subfunctors

struct Subfunctor {
  CtsFunctor ambient;
  std::vector<std::vector<bool>> subset; // subset[x][a]

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& v : subset) s += static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
    return s;
  }

  friend bool operator==(const Subfunctor&, const Subfunctor&) = default;
};

inline ValidationReport check_subfunctor(const Subfunctor& s) {
  ValidationReport report;
  const auto& f = s.ambient;
  const auto n = f.object_count();
  if (s.subset.size() != n) {
    report.add("shape", "one subset per object required");
    return report;
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (s.subset[x].size() != f.value_size(x)) {
      report.add("shape", detail::concat("subset at object ", x, " has the wrong length"), {x});
      return report;
    }
  }
  const auto& c = f.level_category();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h) {
        ++report.checked;
        for (std::size_t a = 0; a < f.value_size(x); ++a) {
          if (s.subset[x][a] && !s.subset[y][f.apply(x, y, h, a)]) {
            report.add("closure", detail::concat("arrow ", h, " in Hom(", x, ",", y, ") sends member ", a,
                                                 " outside the subset"), {x, y, h, a});
            break;
          }
        }
      }
  return report;
}

/// Smallest subfunctor containing the given seeds.
inline Subfunctor subfunctor_closure(const CtsFunctor& f, const std::vector<std::vector<bool>>& seeds) {
  Subfunctor s{f, seeds};
  const auto n = f.object_count();
  const auto& c = f.level_category();
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < f.value_size(x); ++a)
      if (s.subset[x][a]) stack.emplace_back(x, a);
  while (!stack.empty()) {
    auto [x, a] = stack.back();
    stack.pop_back();
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t h = 0; h < c.hom_size(x, y); ++h) {
        auto b = f.apply(x, y, h, a);
        if (!s.subset[y][b]) {
          s.subset[y][b] = true;
          stack.emplace_back(y, b);
        }
      }
  }
  return s;
}

inline std::vector<std::vector<bool>> empty_subset(const CtsFunctor& f) {
  std::vector<std::vector<bool>> m;
  for (const auto& v : f.values) m.emplace_back(v.size, false);
  return m;
}

inline FunctorSub subfunctor_as_functor(const Subfunctor& s) {
  const auto n = s.ambient.object_count();
  std::vector<std::vector<std::size_t>> keep(n), pos;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < s.subset[x].size(); ++a)
      if (s.subset[x][a]) keep[x].push_back(a);
  auto r = restrict_functor(s.ambient, keep, pos);
  return {r, NatTrans(std::make_shared<const CtsFunctor>(r), std::make_shared<const CtsFunctor>(s.ambient), keep)};
}

/// All subfunctors, ordered by size and then by membership mask.
inline std::vector<Subfunctor> subfunctor_lattice(const CtsFunctor& f) {
  const auto n = f.object_count();
  std::vector<std::pair<std::size_t, std::size_t>> elements;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < f.value_size(x); ++a) elements.emplace_back(x, a);

  auto flatten = [&](const Subfunctor& s) {
    std::vector<bool> mask;
    for (const auto& v : s.subset) mask.insert(mask.end(), v.begin(), v.end());
    return mask;
  };
  std::vector<std::vector<bool>> principal;
  for (auto [x, a] : elements) {
    auto seeds = empty_subset(f);
    seeds[x][a] = true;
    principal.push_back(flatten(subfunctor_closure(f, seeds)));
  }
  std::set<std::vector<bool>> seen;
  std::vector<std::vector<bool>> frontier{std::vector<bool>(elements.size(), false)};
  seen.insert(frontier.front());
  while (!frontier.empty()) {
    std::vector<std::vector<bool>> next;
    for (const auto& s : frontier) {
      for (std::size_t e = 0; e < elements.size(); ++e) {
        if (s[e]) continue;
        auto u = s;
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = u[i] || principal[e][i];
        if (seen.insert(u).second) next.push_back(std::move(u));
      }
    }
    frontier = std::move(next);
  }
  std::vector<std::vector<bool>> masks(seen.begin(), seen.end());
  std::stable_sort(masks.begin(), masks.end(), [](const auto& a, const auto& b) {
    return std::count(a.begin(), a.end(), true) < std::count(b.begin(), b.end(), true);
  });
  std::vector<Subfunctor> out;
  for (const auto& m : masks) {
    Subfunctor s{f, empty_subset(f)};
    std::size_t i = 0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t a = 0; a < f.value_size(x); ++a) s.subset[x][a] = m[i++];
    out.push_back(std::move(s));
  }
  return out;
}

/// Objectwise equivalence relation carried by a subfunctor of f × f.
inline EquivRelation relation_at(const CtsFunctor& f, const Subfunctor& r, std::size_t x) {
  EquivRelation rel{f.values[x], {}};
  const auto k = f.value_size(x);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      if (r.subset[x][a * k + b]) rel.pairs.emplace(a, b);
  return rel;
}

inline void require_relation_shape(const CtsFunctor& f, const Subfunctor& r, const char* op) {
  if (r.subset.size() != f.object_count()) throw ShapeError(detail::concat(op, ": wrong object count"));
  for (std::size_t x = 0; x < f.object_count(); ++x) {
    if (r.ambient.value_size(x) != f.value_size(x) * f.value_size(x) || r.subset[x].size() != r.ambient.value_size(x)) {
      throw ShapeError(detail::concat(op, ": relation is not a subobject of F x F at object ", x));
    }
  }
}

/// Subfunctor of A × A given by the kernel pair of t: A => B.
inline Subfunctor kernel_pair_subfunctor(const NatTrans& t) {
  auto prod = functor_product(t.source(), t.source());
  Subfunctor r{prod.functor, empty_subset(prod.functor)};
  for (std::size_t x = 0; x < t.source().object_count(); ++x) {
    const auto k = t.source().value_size(x);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) r.subset[x][a * k + b] = t.component(x)(a) == t.component(x)(b);
  }
  return r;
}

/// Quotient of f by an arrow-closed objectwise equivalence relation r ⊆ f × f.
inline FunctorQuotient quotient_by_equiv_subfunctor(const CtsFunctor& f, const Subfunctor& r) {
  require_relation_shape(f, r, "quotient_by_equiv_subfunctor");
  const auto n = f.object_count();
  for (std::size_t x = 0; x < n; ++x) {
    if (auto bad = relation_at(f, r, x).violation()) {
      auto witness = bad->witness();
      witness.insert(witness.begin(), x);
      throw ValidationError(bad->law(), witness, detail::concat("object ", x, ": ", bad->what()));
    }
  }
  auto closure = check_subfunctor(r);
  if (!closure.ok()) {
    const auto& w = closure.issues.front().witness;
    throw ValidationError("closure", w, "relation is not closed under the arrow action: " + closure.issues.front().message);
  }
  const auto m = std::max(f.level, r.ambient.level);
  const auto fr = refine(f, m);
  std::vector<Table> label(n);
  std::vector<std::size_t> counts(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto q = quotient_by_equiv(relation_at(f, r, x));
    label[x] = q.projection.table();
    counts[x] = q.set.size;
  }
  return quotient_functor(fr, label, counts, std::make_shared<const CtsFunctor>(f));
}

/// Effective-epi test: the coequaliser of the kernel pair of t maps bijectively onto the target.
inline bool coequaliser_of_kernel_pair_reconstructs(const NatTrans& t) {
  auto kp = functor_pullback(t, t);
  auto q = functor_coequaliser(kp.proj1, kp.proj2);
  for (std::size_t x = 0; x < t.source().object_count(); ++x) {
    const auto& proj = q.projection.component(x);
    Table induced(q.functor.value_size(x), detail::unset);
    for (std::size_t a = 0; a < proj.source().size; ++a) {
      auto& slot = induced[proj(a)];
      if (slot != detail::unset && slot != t.component(x)(a)) return false;
      slot = t.component(x)(a);
    }
    if (induced.size() != t.target().value_size(x)) return false;
    FinMap m(FinSet(induced.size()), t.target().values[x], induced);
    if (!m.is_bijective()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Enumeration of functors with prescribed value sizes.

namespace detail {

/// Constraint propagation over the action tables of every arrow at one level.
class FunctorSearch {
public:
  FunctorSearch(std::shared_ptr<const ProCat> base, std::size_t level, std::vector<std::size_t> sizes,
                const SearchOptions& opts)
      : base_(std::move(base)), level_(level), sizes_(std::move(sizes)), opts_(opts) {
    const auto& c = base_->level(level_);
    n_ = c.object_count();
    arrow_id_.assign(n_ * n_, {});
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y)
        for (std::size_t h = 0; h < c.hom_size(x, y); ++h) {
          arrow_id_[x * n_ + y].push_back(arrows_.size());
          arrows_.push_back({x, y, h});
        }
    post_.resize(arrows_.size());
    pre_.resize(arrows_.size());
    fact_.resize(arrows_.size());
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y)
        for (std::size_t z = 0; z < n_; ++z)
          for (std::size_t f = 0; f < c.hom_size(x, y); ++f)
            for (std::size_t g = 0; g < c.hom_size(y, z); ++g) {
              auto fi = arrow_id_[x * n_ + y][f];
              auto gi = arrow_id_[y * n_ + z][g];
              auto gf = arrow_id_[x * n_ + z][c.compose(x, y, z, g, f)];
              post_[fi].push_back({gi, gf});
              pre_[gi].push_back({fi, gf});
              fact_[gf].push_back({gi, fi});
            }
    offset_.resize(arrows_.size() + 1, 0);
    for (std::size_t i = 0; i < arrows_.size(); ++i) offset_[i + 1] = offset_[i] + sizes_[arrows_[i].x];
    assign_.assign(offset_.back(), unset);
  }

  std::size_t run(const std::function<bool(const CtsFunctor&)>& visit) {
    visit_ = &visit;
    const auto& c = base_->level(level_);
    for (std::size_t x = 0; x < n_; ++x) {
      auto id = arrow_id_[x * n_ + x][c.identity(x)];
      for (std::size_t a = 0; a < sizes_[x]; ++a)
        if (!assign(id, a, a)) return 0;
    }
    // Arrows into an empty value admit no table from a nonempty source.
    dfs(0);
    return count_;
  }

private:
  struct Arrow {
    std::size_t x, y, h;
  };
  struct Link {
    std::size_t other, composite;
  };

  std::size_t get(std::size_t arrow, std::size_t a) const { return assign_[offset_[arrow] + a]; }

  bool assign(std::size_t arrow0, std::size_t a0, std::size_t b0) {
    queue_.clear();
    queue_.push_back({arrow0, a0, b0});
    while (!queue_.empty()) {
      auto [f, a, b] = queue_.back();
      queue_.pop_back();
      if (b >= sizes_[arrows_[f].y]) return false;
      auto v = offset_[f] + a;
      if (assign_[v] != unset) {
        if (assign_[v] != b) return false;
        continue;
      }
      assign_[v] = b;
      trail_.push_back(v);
      for (auto [g, gf] : post_[f]) {
        auto c = get(g, b);
        if (c != unset) {
          queue_.push_back({gf, a, c});
        } else if (auto d = get(gf, a); d != unset) {
          queue_.push_back({g, b, d});
        }
      }
      for (auto [k, fk] : pre_[f]) {
        for (std::size_t a2 = 0; a2 < sizes_[arrows_[k].x]; ++a2)
          if (get(k, a2) == a) queue_.push_back({fk, a2, b});
      }
      for (auto [g, f2] : fact_[f]) {
        auto b2 = get(f2, a);
        if (b2 == unset) continue;
        auto c = get(g, b2);
        if (c != unset) {
          if (c != b) return false;
        } else {
          queue_.push_back({g, b2, b});
        }
      }
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      assign_[trail_.back()] = unset;
      trail_.pop_back();
    }
  }

  void dfs(std::size_t from) {
    if (stop_) return;
    while (from < assign_.size() && assign_[from] != unset) ++from;
    if (from == assign_.size()) {
      emit();
      return;
    }
    std::size_t arrow = 0;
    while (offset_[arrow + 1] <= from) ++arrow;
    const auto a = from - offset_[arrow];
    for (auto b : value_order(sizes_[arrows_[arrow].y], opts_.shuffle)) {
      auto mark = trail_.size();
      if (assign(arrow, a, b)) dfs(from + 1);
      undo(mark);
      if (stop_) return;
    }
  }

  void emit() {
    std::vector<FinSet> values;
    for (auto s : sizes_) values.emplace_back(s);
    auto f = blank_functor(base_, level_, values);
    for (std::size_t i = 0; i < arrows_.size(); ++i) {
      auto& t = f.actions[arrows_[i].x * n_ + arrows_[i].y][arrows_[i].h];
      for (std::size_t a = 0; a < t.size(); ++a) t[a] = get(i, a);
    }
    ++count_;
    if (!(*visit_)(f) || (opts_.limit && count_ >= *opts_.limit)) stop_ = true;
  }

  struct Pending {
    std::size_t arrow, a, b;
  };

  std::shared_ptr<const ProCat> base_;
  std::size_t level_;
  std::vector<std::size_t> sizes_;
  SearchOptions opts_;
  std::size_t n_ = 0;
  std::vector<Arrow> arrows_;
  std::vector<std::vector<std::size_t>> arrow_id_;
  std::vector<std::vector<Link>> post_, pre_, fact_;
  std::vector<std::size_t> offset_, assign_, trail_;
  std::vector<Pending> queue_;
  const std::function<bool(const CtsFunctor&)>* visit_ = nullptr;
  std::size_t count_ = 0;
  bool stop_ = false;
};

} // namespace detail

/// Every functor at `level` with the given value sizes (deterministic order unless shuffled).
inline std::size_t for_each_functor(std::shared_ptr<const ProCat> base, std::size_t level,
                                    std::vector<std::size_t> sizes,
                                    const std::function<bool(const CtsFunctor&)>& visit,
                                    const SearchOptions& opts = {}) {
  if (sizes.size() != base->object_count()) throw ShapeError("for_each_functor: one size per object");
  detail::FunctorSearch search(std::move(base), level, std::move(sizes), opts);
  return search.run(visit);
}

/// Every functor at `level` whose values all have size <= max_size.
inline std::vector<CtsFunctor> all_functors(const std::shared_ptr<const ProCat>& base, std::size_t level,
                                            std::size_t max_size) {
  std::vector<CtsFunctor> out;
  const auto n = base->object_count();
  std::vector<std::size_t> sizes(n, 0);
  while (true) {
    for_each_functor(base, level, sizes, [&](const CtsFunctor& f) {
      out.push_back(f);
      return true;
    });
    std::size_t i = 0;
    while (i < n && sizes[i] == max_size) sizes[i++] = 0;
    if (i == n) break;
    ++sizes[i];
  }
  return out;
}

} // namespace exo
