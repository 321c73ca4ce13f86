#include "exodromy/exodromy.hpp"
#include "exodromy/random.hpp"
#include "exodromy/strat.hpp"
#include "exodromy/suites.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace exo;

// Refining a functor to a finer level changes neither its transformations nor
// its isomorphism class.
TEST(Properties, RefinementInvariance) {
  Rng rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    auto base = std::make_shared<const ProCat>(random_procat(rng));
    if (base->depth() < 2) continue;
    auto a = random_functor(rng, base, 0, 3);
    auto b = random_functor(rng, base, 0, 3);
    auto ra = refine(a, base->finest());
    auto rb = refine(b, base->finest());
    EXPECT_TRUE(check_functor(ra).ok());
    EXPECT_EQ(nat_trans_set(a, b).size(), nat_trans_set(ra, rb).size());
    EXPECT_EQ(nat_trans_set(a, b).size(), nat_trans_set(a, rb).size());
    EXPECT_EQ(isomorphic(a, b), isomorphic(ra, rb));
  }
}

TEST(Properties, YonedaCountsOnRandomCategories) {
  Rng rng(72);
  for (int trial = 0; trial < 40; ++trial) {
    auto base = std::make_shared<const ProCat>(random_procat(rng));
    auto level = draw(rng, base->depth());
    auto f = random_functor(rng, base, level, 3);
    for (std::size_t x = 0; x < base->object_count(); ++x) {
      auto h = corepresentable(base, level, x);
      EXPECT_EQ(oracle::nat_trans(h, f).size(), f.value_size(x));
      EXPECT_EQ(nat_trans_set(h, f).size(), f.value_size(x));
    }
  }
}

TEST(Properties, YonedaElementsOfFibreTransformationsAreDistinctArrows) {
  for (const auto* name : {"bs3", "z2-exit", "three-stratum", "bzhat"}) {
    auto g = canned_example(name)->presentation;
    for (std::size_t k = 0; k < g.base->depth(); ++k) {
      auto fam = generate_test_family(g, k);
      auto mor = family_morphisms(fam);
      for (std::size_t i = 0; i < g.fibre_count(); ++i)
        for (std::size_t j = 0; j < g.fibre_count(); ++j) {
          const auto x = g.fibre_points[i], y = g.fibre_points[j];
          auto sols = fibre_transformations(fam, mor, x, y, 1000);
          std::set<std::size_t> elements;
          for (const auto& t : sols) elements.insert(yoneda_element(fam, t, x));
          EXPECT_EQ(elements.size(), sols.size()) << name;
          EXPECT_EQ(sols.size(), g.base->level(k).hom_size(x, y)) << name;
        }
    }
  }
}

// A limit point survives at every level: each finest arrow projects to every
// coarser level, and every coarse arrow has a preimage.
TEST(Properties, TransitionsAreSurjectiveAndCompatible) {
  Rng rng(73);
  for (int trial = 0; trial < 60; ++trial) {
    auto p = random_procat(rng);
    const auto n = p.object_count();
    for (std::size_t k = 0; k + 1 < p.depth(); ++k)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
          std::vector<bool> hit(p.level(k).hom_size(x, y), false);
          for (std::size_t h = 0; h < p.level(k + 1).hom_size(x, y); ++h) hit[p.project(x, y, h, k + 1, k)] = true;
          for (bool b : hit) EXPECT_TRUE(b);
        }
    const auto top = p.finest();
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t h = 0; h < p.level(top).hom_size(x, y); ++h)
          for (std::size_t k = 0; k < top; ++k)
            EXPECT_EQ(p.project(x, y, h, top, k), p.project(x, y, p.project(x, y, h, top, k + 1), k + 1, k));
  }
}

TEST(Properties, RealizeRoundTripOnRandomCategories) {
  Rng rng(74);
  ProCatBounds bounds;
  bounds.max_hom = 2;
  for (int trial = 0; trial < 15; ++trial) {
    auto base = std::make_shared<const ProCat>(random_procat(rng, bounds));
    auto ctx = make_context(all_points(base));
    auto f = random_functor(rng, ctx.pi1_ptr(), draw(rng, base->depth()), 2);
    auto t = realize(ctx, f);
    EXPECT_TRUE(oracle::isomorphic(ev(ctx, t.quotient), refine(f, std::max(f.level, t.quotient.level))));
  }
}

TEST(Properties, GeneratorsAreDeterministic) {
  Rng a(99), b(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_procat(a);
    auto q = random_procat(b);
    ASSERT_EQ(p, q);
    auto base = std::make_shared<const ProCat>(p);
    EXPECT_EQ(random_functor(a, base, 0, 3), random_functor(b, base, 0, 3));
  }
  EXPECT_EQ(render_text({pretopos_suite_random(5, 5)}), render_text({pretopos_suite_random(5, 5)}));
}

TEST(Properties, ProductAndCoproductSizes) {
  Rng rng(75);
  for (int trial = 0; trial < 30; ++trial) {
    auto base = std::make_shared<const ProCat>(random_procat(rng));
    auto a = random_functor(rng, base, draw(rng, base->depth()), 3);
    auto b = random_functor(rng, base, draw(rng, base->depth()), 3);
    auto prod = functor_product(a, b).functor;
    auto sum = functor_coproduct(a, b).functor;
    for (std::size_t x = 0; x < base->object_count(); ++x) {
      EXPECT_EQ(prod.value_size(x), a.value_size(x) * b.value_size(x));
      EXPECT_EQ(sum.value_size(x), a.value_size(x) + b.value_size(x));
    }
    EXPECT_TRUE(oracle::functorial(prod));
    EXPECT_TRUE(oracle::functorial(sum));
  }
}

TEST(Properties, HomFinitenessReportsBudgetAboveTheEnumerationCap) {
  auto pt = oracle::bg(cyclic_group(1));
  auto small = hom_finiteness_check(constant_functor(pt, 0, 3), constant_functor(pt, 0, 4));
  EXPECT_TRUE(small.ok());
  // 4^10 transformations exceed the cap; this must not count as a failure.
  auto big = hom_finiteness_check(constant_functor(pt, 0, 10), constant_functor(pt, 0, 4));
  ASSERT_EQ(big.issues.size(), 1u);
  EXPECT_EQ(big.issues[0].code, "budget");
}
