#pragma once

// Property suites over Fun^cts(Pi, Fin) and its fibre functors. Each suite
// returns counts and the first few failures in a fixed order, so two runs with
// the same seed print the same report.

#include "exodromy/errors.hpp"
#include "exodromy/exodromy.hpp"
#include "exodromy/funcat.hpp"
#include "exodromy/galois.hpp"
#include "exodromy/opcompact.hpp"
#include "exodromy/random.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace exo {

struct SuiteReport {
  std::string name;
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::size_t skipped = 0;
  std::size_t failure_count = 0;
  std::vector<std::string> failures; // first few, in discovery order

  bool ok() const { return failure_count == 0; }

  void absorb(const ValidationReport& r, const std::string& where, std::size_t keep = 5) {
    checks += r.checked;
    for (const auto& issue : r.issues) {
      if (issue.code == "budget") {
        ++skipped;
        continue;
      }
      ++failure_count;
      if (failures.size() < keep) {
        std::ostringstream msg;
        msg << where << ": " << issue.code << ": " << issue.message;
        if (!issue.witness.empty()) {
          msg << " [witness";
          for (auto w : issue.witness) msg << ' ' << w;
          msg << ']';
        }
        failures.push_back(msg.str());
      }
    }
  }

  void fail(const std::string& where, const std::string& what) {
    ValidationReport r;
    r.add("exception", what);
    absorb(r, where);
  }
};

inline std::string render_text(const std::vector<SuiteReport>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << "suite " << r.name << ": " << (r.ok() ? "pass" : "FAIL") << " (instances " << r.instances << ", checks "
        << r.checks << ", skipped " << r.skipped << ", failures " << r.failure_count << ")\n";
    for (const auto& f : r.failures) out << "  " << f << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Pretopos axioms

/// All arrow-closed objectwise equivalence relations on f, as class labellings,
/// obtained as joins of principal (generated) congruences.
inline std::vector<std::vector<Table>> congruences(const CtsFunctor& f) {
  const auto n = f.object_count();
  std::vector<std::vector<Table>> generators;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < f.value_size(x); ++a)
      for (std::size_t b = a + 1; b < f.value_size(x); ++b) {
        std::vector<std::size_t> counts;
        generators.push_back(generated_congruence(f, x, a, b, counts));
      }
  auto normalise = [&](const std::vector<Table>& labels) {
    std::vector<Table> out(n);
    for (std::size_t x = 0; x < n; ++x) {
      std::map<std::size_t, std::size_t> rename;
      for (auto l : labels[x]) out[x].push_back(rename.emplace(l, rename.size()).first->second);
    }
    return out;
  };
  std::vector<Table> discrete(n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < f.value_size(x); ++a) discrete[x].push_back(a);
  std::set<std::vector<Table>> seen{discrete};
  std::vector<std::vector<Table>> out{discrete};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& g : generators) {
      std::vector<Table> join(n);
      for (std::size_t x = 0; x < n; ++x) {
        DisjointSets sets(f.value_size(x));
        for (std::size_t a = 0; a < f.value_size(x); ++a)
          for (std::size_t b = 0; b < a; ++b)
            if (out[i][x][a] == out[i][x][b] || g[x][a] == g[x][b]) sets.unite(a, b);
        std::size_t count = 0;
        join[x] = sets.labelling(count);
      }
      join = normalise(join);
      if (seen.insert(join).second) out.push_back(join);
    }
  }
  return out;
}

inline Subfunctor relation_from_labels(const CtsFunctor& f, const std::vector<Table>& labels) {
  auto prod = functor_product(f, f).functor;
  Subfunctor r{prod, empty_subset(prod)};
  for (std::size_t x = 0; x < f.object_count(); ++x) {
    const auto k = f.value_size(x);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) r.subset[x][a * k + b] = labels[x][a] == labels[x][b];
  }
  return r;
}

struct PretoposOptions {
  std::size_t max_value = 3;
  std::size_t hom_cap = 4096;   // skip a universal-property count above this
  std::size_t map_samples = 4;  // transformations drawn per operation
};

namespace detail {

inline std::optional<std::vector<NatTrans>> capped_maps(const CtsFunctor& a, const CtsFunctor& b, std::size_t cap) {
  SearchOptions opts;
  opts.limit = cap + 1;
  auto maps = nat_trans_set(a, b, opts);
  if (maps.size() > cap) return std::nullopt;
  return maps;
}

inline std::vector<NatTrans> sample_maps(Rng& rng, const CtsFunctor& a, const CtsFunctor& b, std::size_t count) {
  SearchOptions opts;
  opts.limit = count;
  opts.shuffle = &rng;
  return nat_trans_set(a, b, opts);
}

} // namespace detail

/// Axioms (1)-(4) on one base with random objects A, B, C, checked through
/// universal properties against probe objects (0, 1, every h^x, A).
inline ValidationReport pretopos_instance(const std::shared_ptr<const ProCat>& base, Rng& rng,
                                          const PretoposOptions& o = {}) {
  ValidationReport report;
  const auto n = base->object_count();
  const auto top = base->finest();
  auto level = [&] { return draw(rng, base->depth()); };
  const auto a = random_functor(rng, base, level(), o.max_value);
  const auto b = random_functor(rng, base, level(), o.max_value);
  const auto c = random_functor(rng, base, level(), o.max_value);
  const auto one = terminal_functor(base);
  const auto zero = empty_functor(base);
  std::vector<CtsFunctor> probes{zero, one};
  for (std::size_t x = 0; x < n; ++x) probes.push_back(corepresentable(base, top, x));
  probes.push_back(a);

  auto count = [&](const CtsFunctor& s, const CtsFunctor& t) { return detail::capped_maps(s, t, o.hom_cap); };
  auto skip = [&](const std::string& what) { report.add("budget", what); };

  // (1) finite limits: terminal object, products, equalisers, pullbacks.
  for (std::size_t p = 0; p < probes.size(); ++p) {
    ++report.checked;
    auto to_one = count(probes[p], one);
    if (!to_one || to_one->size() != 1) report.add("terminal", detail::concat("probe ", p, " has ", to_one ? to_one->size() : 0, " maps to 1"), {p});
  }
  const auto prod = functor_product(a, b);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    auto into_prod = count(probes[p], prod.functor);
    auto into_a = count(probes[p], a);
    auto into_b = count(probes[p], b);
    if (!into_prod || !into_a || !into_b) {
      skip("product probe");
      continue;
    }
    ++report.checked;
    std::set<std::pair<std::vector<Table>, std::vector<Table>>> pairs;
    for (const auto& u : *into_prod) pairs.emplace(compose(prod.proj1, u).tables(), compose(prod.proj2, u).tables());
    if (into_prod->size() != into_a->size() * into_b->size() || pairs.size() != into_prod->size()) {
      report.add("product", detail::concat("probe ", p, ": ", into_prod->size(), " maps into A x B, ", into_a->size(),
                                           " x ", into_b->size(), " pairs"), {p});
    }
  }
  auto parallel = detail::sample_maps(rng, a, b, o.map_samples);
  for (std::size_t s = 0; s < parallel.size(); ++s)
    for (std::size_t t = s + 1; t < parallel.size(); ++t) {
      auto eq = functor_equaliser(parallel[s], parallel[t]);
      ++report.checked;
      if (!is_mono(eq.inclusion) || !(compose(parallel[s], eq.inclusion) == compose(parallel[t], eq.inclusion))) {
        report.add("equaliser", detail::concat("inclusion for pair (", s, ", ", t, ") is not an equalising mono"), {s, t});
      }
      for (std::size_t p = 0; p < probes.size(); ++p) {
        auto into_eq = count(probes[p], eq.functor);
        auto into_a = count(probes[p], a);
        if (!into_eq || !into_a) {
          skip("equaliser probe");
          continue;
        }
        ++report.checked;
        std::size_t equalised = 0;
        for (const auto& u : *into_a) equalised += compose(parallel[s], u) == compose(parallel[t], u);
        if (equalised != into_eq->size()) {
          report.add("equaliser", detail::concat("probe ", p, ": ", into_eq->size(), " maps into E, ", equalised,
                                                 " equalised maps into A"), {s, t, p});
        }
      }
    }
  {
    auto fs = detail::sample_maps(rng, a, c, 2);
    auto gs = detail::sample_maps(rng, b, c, 2);
    for (const auto& f : fs)
      for (const auto& g : gs) {
        auto pb = functor_pullback(f, g);
        for (std::size_t p = 0; p < probes.size(); ++p) {
          auto into_pb = count(probes[p], pb.functor);
          auto into_a = count(probes[p], a);
          auto into_b = count(probes[p], b);
          if (!into_pb || !into_a || !into_b) {
            skip("pullback probe");
            continue;
          }
          ++report.checked;
          std::size_t cones = 0;
          for (const auto& u : *into_a)
            for (const auto& v : *into_b) cones += compose(f, u) == compose(g, v);
          if (cones != into_pb->size()) {
            report.add("pullback", detail::concat("probe ", p, ": ", into_pb->size(), " maps into the pullback, ",
                                                  cones, " commuting pairs"), {p});
          }
        }
      }
  }

  // (2) coproducts: initial object, universal property, disjointness, stability.
  const auto sum = functor_coproduct(a, b);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    ++report.checked;
    auto from_zero = count(zero, probes[p]);
    if (!from_zero || from_zero->size() != 1) report.add("initial", detail::concat("probe ", p, " does not receive exactly one map from 0"), {p});
    auto out_sum = count(sum.functor, probes[p]);
    auto out_a = count(a, probes[p]);
    auto out_b = count(b, probes[p]);
    if (!out_sum || !out_a || !out_b) {
      skip("coproduct probe");
      continue;
    }
    ++report.checked;
    if (out_sum->size() != out_a->size() * out_b->size()) {
      report.add("coproduct", detail::concat("probe ", p, ": ", out_sum->size(), " maps out of A + B, ", out_a->size(),
                                             " x ", out_b->size(), " pairs"), {p});
    }
  }
  ++report.checked;
  if (functor_pullback(sum.inj1, sum.inj2).functor.total_size() != 0) {
    report.add("disjoint", "the summands of A + B intersect");
  }
  if (!is_mono(sum.inj1) || !is_mono(sum.inj2)) report.add("disjoint", "a coproduct injection is not mono");
  for (const auto& f : detail::sample_maps(rng, c, sum.functor, o.map_samples)) {
    ++report.checked;
    auto p1 = functor_pullback(f, sum.inj1);
    auto p2 = functor_pullback(f, sum.inj2);
    auto glued = functor_coproduct(p1.functor, p2.functor);
    std::vector<Table> canonical(n);
    for (std::size_t x = 0; x < n; ++x) {
      canonical[x] = p1.proj1.component(x).table();
      const auto& second = p2.proj1.component(x).table();
      canonical[x].insert(canonical[x].end(), second.begin(), second.end());
    }
    NatTrans back(glued.functor, c, canonical);
    if (!check_nat_trans(back).ok() || !is_iso(back)) {
      report.add("stability", "pulling A + B back along a map C -> A + B does not split C");
    }
  }

  // (3) every equivalence relation is effective.
  for (const auto& labels : congruences(a)) {
    ++report.checked;
    auto r = relation_from_labels(a, labels);
    if (!check_subfunctor(r).ok()) {
      report.add("congruence", "a joined congruence is not arrow-closed");
      continue;
    }
    auto q = quotient_by_equiv_subfunctor(a, r);
    if (!(kernel_pair_subfunctor(q.projection).subset == r.subset)) {
      report.add("effective", "the kernel pair of A -> A/R differs from R");
    }
    if (!coequaliser_of_kernel_pair_reconstructs(q.projection)) {
      report.add("effective", "A/R is not the coequaliser of R");
    }
  }

  // (4) surjections are effective epimorphisms, stable under pullback.
  for (const auto& t : detail::sample_maps(rng, a, b, o.map_samples)) {
    auto im = functor_image(t);
    ++report.checked;
    if (!(compose(im.mono, im.epi) == t) || !is_mono(im.mono) || !is_effective_epi(im.epi)) {
      report.add("image", "image factorisation does not recompose to the map");
    }
    auto e = im.epi;
    if (!coequaliser_of_kernel_pair_reconstructs(e)) report.add("effective-epi", "image epi is not effective");
    for (const auto& g : detail::sample_maps(rng, c, im.image, 2)) {
      ++report.checked;
      auto pb = functor_pullback(e, g);
      if (!is_effective_epi(pb.proj2) || !coequaliser_of_kernel_pair_reconstructs(pb.proj2)) {
        report.add("stability", "a pulled-back surjection is not an effective epimorphism");
      }
    }
  }
  return report;
}

inline SuiteReport pretopos_suite_random(std::uint64_t seed, std::size_t instances, const ProCatBounds& bounds = {},
                                         const PretoposOptions& o = {}) {
  SuiteReport out;
  out.name = "pretopos";
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    auto base = std::make_shared<const ProCat>(random_procat(rng, bounds));
    ++out.instances;
    try {
      out.absorb(pretopos_instance(base, rng, o), detail::concat("instance ", i));
    } catch (const std::exception& e) {
      out.fail(detail::concat("instance ", i), e.what());
    }
  }
  return out;
}

inline SuiteReport pretopos_suite(const GaloisPresentation& g, std::uint64_t seed, std::size_t instances = 25,
                                  const PretoposOptions& o = {}) {
  SuiteReport out;
  out.name = "pretopos";
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    ++out.instances;
    try {
      out.absorb(pretopos_instance(g.base, rng, o), detail::concat("instance ", i));
    } catch (const std::exception& e) {
      out.fail(detail::concat("instance ", i), e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementary lemmas on the generated family

struct LemmaOptions {
  std::size_t window = 12;        // members above this total size are left out
  std::size_t maps_per_pair = 64; // transformations examined for mono/epi detection
};

inline ValidationReport hom_finiteness_check(const CtsFunctor& a, const CtsFunctor& b) {
  ValidationReport report;
  ++report.checked;
  // |Hom(A,B)| is bounded by the product of |B(x)|^|A(x)|.
  double bound = 1;
  for (std::size_t x = 0; x < a.object_count(); ++x)
    for (std::size_t e = 0; e < a.value_size(x); ++e) bound *= static_cast<double>(b.value_size(x));
  constexpr std::size_t enumeration_cap = 1000000;
  if (bound > static_cast<double>(enumeration_cap)) {
    // Counting past the cap would not decide anything: the pointwise bound itself is larger.
    if (!count_nat_trans(a, b, enumeration_cap)) {
      report.add("budget", detail::concat("more than ", enumeration_cap, " transformations; bound not checked"));
    }
    return report;
  }
  auto c = count_nat_trans(a, b, static_cast<std::size_t>(bound));
  if (!c) report.add("finite", "more transformations than the pointwise bound allows");
  return report;
}

inline ValidationReport mono_epi_detection_check(const GaloisPresentation& g, const NatTrans& t) {
  ValidationReport report;
  bool inj = true, surj = true;
  for (auto x : g.fibre_points) {
    inj = inj && t.component(x).is_injective();
    surj = surj && t.component(x).is_surjective();
  }
  ++report.checked;
  if (inj && !is_mono(t)) report.add("mono", "injective at the fibre points but not a monomorphism");
  if (surj && !(is_effective_epi(t) && coequaliser_of_kernel_pair_reconstructs(t))) {
    report.add("epi", "surjective at the fibre points but not an effective epimorphism");
  }
  return report;
}

inline SuiteReport lemmas_suite(const GaloisPresentation& g, const LemmaOptions& o = {}) {
  SuiteReport out;
  out.name = "lemmas";
  try {
    auto fam = generate_test_family(g, g.base->finest());
    std::vector<CtsFunctor> members;
    for (const auto& m : fam.members)
      if (m.functor.total_size() <= o.window) members.push_back(m.functor);
    out.instances = members.size();
    std::vector<NatTrans> samples;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto where = detail::concat("member ", i);
      out.absorb(subobject_injectivity_check(g, members[i]), where);
      for (std::size_t j = 0; j < members.size(); ++j) {
        const auto pair = detail::concat("pair (", i, ", ", j, ")");
        out.absorb(faithfulness_check(g, members[i], members[j]), pair);
        out.absorb(hom_finiteness_check(members[i], members[j]), pair);
        SearchOptions opts;
        opts.limit = o.maps_per_pair;
        for (const auto& t : nat_trans_set(members[i], members[j], opts)) {
          out.absorb(mono_epi_detection_check(g, t), pair);
          if (samples.size() < 512) samples.push_back(t);
        }
      }
    }
    out.absorb(joint_conservativity_check(g, samples), "conservativity");
    for (std::size_t i = 0; i < g.fibre_count(); ++i) {
      out.absorb(pretopos_morphism_check(g, i, members), detail::concat("fibre functor ", i));
    }
  } catch (const std::exception& e) {
    out.fail("lemmas", e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exodromy round trips

struct ExodromyOptions {
  std::size_t max_value = 3; // realize every functor on Pi_1 with values up to this size
  std::size_t window = 12;   // family members used for full faithfulness and Psi
};

inline SuiteReport exodromy_suite(const GaloisPresentation& g, const ExodromyOptions& o = {}) {
  SuiteReport out;
  out.name = "exodromy";
  try {
    auto ctx = make_context(g);
    const auto& pi1 = ctx.pi1_ptr();
    for (std::size_t level = 0; level < pi1->depth(); ++level) {
      for (const auto& f : all_functors(pi1, level, o.max_value)) {
        ++out.instances;
        ++out.checks;
        const auto where = detail::concat("functor ", out.instances - 1, " at level ", level);
        try {
          auto t = realize(ctx, f);
          if (!isomorphic(ev(ctx, t.quotient), f)) out.fail(where, "ev of the realized object is not isomorphic to F");
        } catch (const std::exception& e) {
          out.fail(where, e.what());
        }
      }
    }
    auto fam = generate_test_family(g, g.base->finest());
    std::vector<CtsFunctor> members;
    for (const auto& m : fam.members)
      if (m.functor.total_size() <= o.window) members.push_back(m.functor);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = 0; j < members.size(); ++j) {
        out.absorb(full_faithfulness_check(ctx, members[i], members[j]), detail::concat("pair (", i, ", ", j, ")"));
      }
    out.absorb(reconstruction_check(*g.base, g.generator_bound), "reconstruction");
    if (g.fibre_count() >= 2) out.absorb(psi_coinitiality_check(ctx, o.window).report, "psi");
  } catch (const std::exception& e) {
    out.fail("exodromy", e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Opcompactness

inline ValidationReport opcompact_instance(const std::shared_ptr<const ProCat>& base, Rng& rng,
                                           const ChainBounds& b = {}, std::size_t max_target = 3) {
  auto d = random_chain(rng, base, b);
  auto f = random_functor(rng, base, draw(rng, base->depth()), max_target);
  auto w = opcompactness_check(d, f);
  auto report = w.report;
  ++report.checked;
  return report;
}

inline SuiteReport opcompact_suite_random(std::uint64_t seed, std::size_t instances, const ProCatBounds& bounds,
                                          const ChainBounds& chain = {}) {
  SuiteReport out;
  out.name = "opcompact";
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    ++out.instances;
    try {
      auto base = std::make_shared<const ProCat>(random_procat(rng, bounds));
      out.absorb(opcompact_instance(base, rng, chain), detail::concat("diagram ", i));
    } catch (const std::exception& e) {
      out.fail(detail::concat("diagram ", i), e.what());
    }
  }
  return out;
}

inline SuiteReport opcompact_suite(const GaloisPresentation& g, std::uint64_t seed, std::size_t instances = 25,
                                   const ChainBounds& chain = {}) {
  SuiteReport out;
  out.name = "opcompact";
  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    ++out.instances;
    try {
      out.absorb(opcompact_instance(g.base, rng, chain), detail::concat("diagram ", i));
    } catch (const std::exception& e) {
      out.fail(detail::concat("diagram ", i), e.what());
    }
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"pretopos", "lemmas", "exodromy", "opcompact"};
  return names;
}

/// Runs one named suite, or all of them for "all", on a presentation.
inline std::vector<SuiteReport> run_suites(const GaloisPresentation& g, const std::string& which, std::uint64_t seed) {
  std::vector<SuiteReport> out;
  auto want = [&](const char* name) { return which == "all" || which == name; };
  if (want("pretopos")) out.push_back(pretopos_suite(g, seed));
  if (want("lemmas")) out.push_back(lemmas_suite(g));
  if (want("exodromy")) out.push_back(exodromy_suite(g));
  if (want("opcompact")) out.push_back(opcompact_suite(g, seed));
  return out;
}

} // namespace exo
