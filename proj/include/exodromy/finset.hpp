#pragma once

// The base pretopos Fin: finite sets are {0, ..., size-1}, maps are tables.
// Every construction below fixes a canonical element order so results are
// structurally comparable:
//   product      lexicographic, first factor major
//   coproduct    first summand block, then second
//   quotients    classes ordered by least representative
//   images       ordered as in the target

#include "exodromy/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace exo {

struct FinSet {
  std::size_t size = 0;
  std::vector<std::string> labels; // empty, or exactly `size` distinct names

  FinSet() = default;
  explicit FinSet(std::size_t n) : size(n) {}
  FinSet(std::size_t n, std::vector<std::string> names) : size(n), labels(std::move(names)) {
    if (!labels.empty() && labels.size() != size) {
      throw ShapeError(detail::concat("FinSet: ", labels.size(), " labels for ", size, " elements"));
    }
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ShapeError("FinSet: labels must be pairwise distinct");
    }
  }

  bool empty() const noexcept { return size == 0; }

  friend bool operator==(const FinSet&, const FinSet&) = default;
};

class FinMap {
public:
  FinMap() = default;

  FinMap(FinSet source, FinSet target, std::vector<std::size_t> table)
      : source_(std::move(source)), target_(std::move(target)), table_(std::move(table)) {
    if (table_.size() != source_.size) {
      throw ShapeError(detail::concat("FinMap: table has ", table_.size(), " entries, source has ",
                                      source_.size));
    }
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if (table_[i] >= target_.size) {
        throw ShapeError(detail::concat("FinMap: entry ", i, " -> ", table_[i],
                                        " out of range for target of size ", target_.size));
      }
    }
  }

  static FinMap identity(const FinSet& s) {
    std::vector<std::size_t> t(s.size);
    std::iota(t.begin(), t.end(), std::size_t{0});
    return FinMap(s, s, std::move(t));
  }

  const FinSet& source() const noexcept { return source_; }
  const FinSet& target() const noexcept { return target_; }
  const std::vector<std::size_t>& table() const noexcept { return table_; }
  std::size_t operator()(std::size_t i) const { return table_.at(i); }

  bool is_injective() const {
    std::vector<bool> hit(target_.size, false);
    for (auto v : table_) {
      if (hit[v]) return false;
      hit[v] = true;
    }
    return true;
  }

  bool is_surjective() const {
    std::vector<bool> hit(target_.size, false);
    for (auto v : table_) hit[v] = true;
    return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
  }

  bool is_bijective() const { return source_.size == target_.size && is_injective(); }

  friend bool operator==(const FinMap&, const FinMap&) = default;

private:
  FinSet source_;
  FinSet target_;
  std::vector<std::size_t> table_;
};

/// g ∘ f
inline FinMap compose(const FinMap& g, const FinMap& f) {
  if (f.target().size != g.source().size) {
    throw ShapeError(detail::concat("compose: target of size ", f.target().size,
                                    " does not meet source of size ", g.source().size));
  }
  std::vector<std::size_t> t(f.source().size);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g(f(i));
  return FinMap(f.source(), g.target(), std::move(t));
}

/// Union-find with path halving; used for every quotient construction.
class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a; // smallest index stays root
    return true;
  }

  /// Class index per element, classes numbered by least representative.
  std::vector<std::size_t> labelling(std::size_t& class_count) {
    std::vector<std::size_t> root_label(parent_.size(), static_cast<std::size_t>(-1));
    std::vector<std::size_t> label(parent_.size());
    class_count = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      auto r = find(i);
      if (root_label[r] == static_cast<std::size_t>(-1)) root_label[r] = class_count++;
      label[i] = root_label[r];
    }
    return label;
  }

private:
  std::vector<std::size_t> parent_;
};

struct Product {
  FinSet set;
  FinMap proj1;
  FinMap proj2;
};

inline Product product(const FinSet& a, const FinSet& b) {
  FinSet p(a.size * b.size);
  std::vector<std::size_t> t1(p.size), t2(p.size);
  for (std::size_t i = 0; i < a.size; ++i) {
    for (std::size_t j = 0; j < b.size; ++j) {
      t1[i * b.size + j] = i;
      t2[i * b.size + j] = j;
    }
  }
  return {p, FinMap(p, a, std::move(t1)), FinMap(p, b, std::move(t2))};
}

struct Coproduct {
  FinSet set;
  FinMap inj1;
  FinMap inj2;
};

inline Coproduct coproduct(const FinSet& a, const FinSet& b) {
  FinSet c(a.size + b.size);
  std::vector<std::size_t> t1(a.size), t2(b.size);
  std::iota(t1.begin(), t1.end(), std::size_t{0});
  std::iota(t2.begin(), t2.end(), a.size);
  return {c, FinMap(a, c, std::move(t1)), FinMap(b, c, std::move(t2))};
}

struct Equaliser {
  FinSet set;
  FinMap inclusion;
};

inline void require_parallel(const FinMap& f, const FinMap& g, const char* op) {
  if (f.source().size != g.source().size || f.target().size != g.target().size) {
    throw ShapeError(detail::concat(op, ": maps are not parallel (", f.source().size, "->",
                                    f.target().size, " vs ", g.source().size, "->",
                                    g.target().size, ")"));
  }
}

inline Equaliser equaliser(const FinMap& f, const FinMap& g) {
  require_parallel(f, g, "equaliser");
  std::vector<std::size_t> incl;
  for (std::size_t i = 0; i < f.source().size; ++i) {
    if (f(i) == g(i)) incl.push_back(i);
  }
  FinSet e(incl.size());
  return {e, FinMap(e, f.source(), std::move(incl))};
}

struct Pullback {
  FinSet set;
  FinMap proj1;
  FinMap proj2;
};

/// A ×_C B for f: A → C, g: B → C; pairs in lexicographic order.
inline Pullback pullback(const FinMap& f, const FinMap& g) {
  if (f.target().size != g.target().size) {
    throw ShapeError("pullback: maps have different targets");
  }
  std::vector<std::size_t> t1, t2;
  for (std::size_t i = 0; i < f.source().size; ++i) {
    for (std::size_t j = 0; j < g.source().size; ++j) {
      if (f(i) == g(j)) {
        t1.push_back(i);
        t2.push_back(j);
      }
    }
  }
  FinSet p(t1.size());
  return {p, FinMap(p, f.source(), std::move(t1)), FinMap(p, g.source(), std::move(t2))};
}

struct Quotient {
  FinSet set;
  FinMap projection;
};

inline Quotient coequaliser(const FinMap& f, const FinMap& g) {
  require_parallel(f, g, "coequaliser");
  DisjointSets classes(f.target().size);
  for (std::size_t s = 0; s < f.source().size; ++s) classes.unite(f(s), g(s));
  std::size_t n = 0;
  auto label = classes.labelling(n);
  FinSet q(n);
  return {q, FinMap(f.target(), q, std::move(label))};
}

struct ImageFactorization {
  FinMap epi;
  FinMap mono;
};

inline ImageFactorization image_factorization(const FinMap& f) {
  std::vector<bool> hit(f.target().size, false);
  for (auto v : f.table()) hit[v] = true;
  std::vector<std::size_t> mono_table;
  std::vector<std::size_t> position(f.target().size, 0);
  for (std::size_t y = 0; y < hit.size(); ++y) {
    if (hit[y]) {
      position[y] = mono_table.size();
      mono_table.push_back(y);
    }
  }
  FinSet image(mono_table.size());
  std::vector<std::size_t> epi_table(f.source().size);
  for (std::size_t i = 0; i < epi_table.size(); ++i) epi_table[i] = position[f(i)];
  return {FinMap(f.source(), image, std::move(epi_table)),
          FinMap(image, f.target(), std::move(mono_table))};
}

/// A relation stored as its full pair set.
struct EquivRelation {
  FinSet carrier;
  std::set<std::pair<std::size_t, std::size_t>> pairs;

  bool contains(std::size_t a, std::size_t b) const { return pairs.count({a, b}) != 0; }

  /// First violated law, with a witness: reflexivity (x), symmetry (x, y), transitivity (x, y, z).
  std::optional<ValidationError> violation() const {
    for (const auto& [a, b] : pairs) {
      if (a >= carrier.size || b >= carrier.size) {
        return ValidationError("range", {a, b}, detail::concat("pair (", a, ",", b, ") out of range"));
      }
    }
    for (std::size_t x = 0; x < carrier.size; ++x) {
      if (!contains(x, x)) {
        return ValidationError("reflexivity", {x, x},
                               detail::concat("reflexivity fails: (", x, ",", x, ") missing"));
      }
    }
    for (const auto& [a, b] : pairs) {
      if (!contains(b, a)) {
        return ValidationError("symmetry", {a, b},
                               detail::concat("symmetry fails: (", a, ",", b, ") present, (", b,
                                              ",", a, ") missing"));
      }
    }
    for (const auto& [a, b] : pairs) {
      for (auto it = pairs.lower_bound({b, 0}); it != pairs.end() && it->first == b; ++it) {
        if (!contains(a, it->second)) {
          return ValidationError("transitivity", {a, b, it->second},
                                 detail::concat("transitivity fails: (", a, ",", b, ") and (", b,
                                                ",", it->second, ") present, (", a, ",",
                                                it->second, ") missing"));
        }
      }
    }
    return std::nullopt;
  }

  bool is_equivalence() const { return !violation().has_value(); }

  friend bool operator==(const EquivRelation&, const EquivRelation&) = default;
};

inline EquivRelation kernel_pair(const FinMap& f) {
  EquivRelation r{f.source(), {}};
  for (std::size_t a = 0; a < f.source().size; ++a) {
    for (std::size_t b = 0; b < f.source().size; ++b) {
      if (f(a) == f(b)) r.pairs.emplace(a, b);
    }
  }
  return r;
}

inline Quotient quotient_by_equiv(const EquivRelation& r) {
  if (auto bad = r.violation()) throw *bad;
  DisjointSets classes(r.carrier.size);
  for (const auto& [a, b] : r.pairs) classes.unite(a, b);
  std::size_t n = 0;
  auto label = classes.labelling(n);
  FinSet q(n);
  return {q, FinMap(r.carrier, q, std::move(label))};
}

} // namespace exo
