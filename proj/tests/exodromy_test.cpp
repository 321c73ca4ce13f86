#include "exodromy/exodromy.hpp"
#include "exodromy/random.hpp"
#include "exodromy/strat.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace exo;

namespace {

ExodromyContext context(const std::string& name) { return make_context(canned_example(name)->presentation); }

/// S3 permuting {0, 1, 2}: the cosets of a subgroup of order two.
CtsFunctor cosets(const std::shared_ptr<const ProCat>& pi1) {
  std::vector<Table> action;
  for (const auto& p : s3_elements()) action.push_back(p);
  return oracle::group_set(pi1, 0, action);
}

std::string stage_of(const std::function<void()>& run) {
  try {
    run();
  } catch (const StageError& e) {
    return e.stage();
  }
  return "none";
}

} // namespace

TEST(Ev, RestrictsToTheFibrePoints) {
  auto ctx = context("bs3");
  auto reg = oracle::regular(ctx.presentation.base, 0);
  auto e = ev(ctx, reg);
  EXPECT_EQ(e.values, reg.values);
  EXPECT_EQ(e.actions, reg.actions);
  EXPECT_EQ(e.base, ctx.pi1_ptr());

  auto one = context("two-curves-one-point");
  auto ec = ev(one, constant_functor(one.presentation.base, 0, 2));
  EXPECT_EQ(ec.values, (std::vector<FinSet>{FinSet(2)}));
  EXPECT_EQ(ec.actions, (std::vector<std::vector<Table>>{{{0, 1}}}));
}

TEST(Ev, OnTransformationsKeepsFibreComponents) {
  auto ctx = context("open-closed");
  const auto& base = ctx.presentation.base;
  auto a = corepresentable(base, 0, 0);
  auto t = nat_trans_set(a, terminal_functor(base));
  ASSERT_EQ(t.size(), 1u);
  auto et = ev(ctx, t[0]);
  EXPECT_EQ(et.tables(), t[0].tables());
  EXPECT_TRUE(check_nat_trans(et).ok());
}

TEST(CanonicalCover, TerminalFunctor) {
  auto ctx = context("terminal");
  auto cover = canonical_cover(ctx, terminal_functor(ctx.pi1_ptr()));
  EXPECT_EQ(cover.level, 0u);
  EXPECT_EQ(cover.summands.size(), 1u);
  EXPECT_EQ(cover.object.total_size(), 1u);
  EXPECT_TRUE(is_effective_epi(cover.covering_map));
}

TEST(CanonicalCover, RegularRepresentationOfZ2) {
  auto ctx = context("bz2");
  auto f = oracle::regular(ctx.pi1_ptr(), 0);
  auto cover = canonical_cover(ctx, f);
  EXPECT_EQ(cover.summands, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {0, 1}}));
  EXPECT_EQ(cover.object.total_size(), 4u);
  EXPECT_TRUE(is_effective_epi(cover.covering_map));
  EXPECT_TRUE(check_nat_trans(cover.covering_map).ok());
}

TEST(CanonicalCover, SignRepresentationOfTheTruncatedIntegersStaysCoarse) {
  auto ctx = context("bzhat");
  auto sign = oracle::regular(ctx.pi1_ptr(), 0);
  auto cover = canonical_cover(ctx, sign);
  EXPECT_EQ(cover.level, 0u);
  EXPECT_EQ(cover.object.level, 0u);
  EXPECT_EQ(cover.object.total_size(), 4u);
  EXPECT_TRUE(is_effective_epi(cover.covering_map));
}

TEST(CanonicalCover, RejectsFunctorsOnOtherCategories) {
  auto ctx = context("bz2");
  auto other = oracle::bg(cyclic_group(3));
  EXPECT_THROW(canonical_cover(ctx, terminal_functor(other)), ShapeError);
}

TEST(SubobjectRealization, ClosedSubsetsAreRealized) {
  auto ctx = context("bs3");
  auto a = oracle::regular(ctx.presentation.base, 0);
  Subfunctor whole{ev(ctx, a), {std::vector<bool>(6, true)}};
  auto r = subobject_realization(ctx, a, whole);
  EXPECT_EQ(r.subset[0], std::vector<bool>(6, true));
  Subfunctor none{ev(ctx, a), {std::vector<bool>(6, false)}};
  EXPECT_EQ(subobject_realization(ctx, a, none).size(), 0u);
}

TEST(SubobjectRealization, NonClosedSubsetFailsWithItsStage) {
  auto ctx = context("bs3");
  auto a = oracle::regular(ctx.presentation.base, 0);
  Subfunctor single{ev(ctx, a), {{true, false, false, false, false, false}}};
  EXPECT_EQ(stage_of([&] { subobject_realization(ctx, a, single); }), "subobject-realization");
}

TEST(LocalFullness, EveryFibreMapLiftsThroughTheIdentityRoute) {
  auto ctx = context("z2-exit");
  const auto& base = ctx.presentation.base;
  std::vector<CtsFunctor> fs{corepresentable(base, 0, 0), corepresentable(base, 0, 1), constant_functor(base, 0, 2)};
  for (const auto& a : fs)
    for (const auto& b : fs)
      for (const auto& alpha : nat_trans_set(ev(ctx, a), ev(ctx, b))) {
        auto w = local_fullness_witness(ctx, a, b, alpha);
        EXPECT_EQ(w.route, "identity");
        EXPECT_TRUE(is_effective_epi(w.epi));
        EXPECT_TRUE(check_nat_trans(w.map).ok());
        EXPECT_EQ(ev(ctx, w.map).tables(), compose(alpha, ev(ctx, w.epi)).tables());
      }
}

TEST(LocalFullness, UnobservedObjectsDefeatThePointedCover) {
  // Two objects, identity arrows only, fibre functor at object 0.
  auto c = FinCat::with_hom_sizes(FinSet(2), {1, 0, 0, 1});
  auto base = std::make_shared<const ProCat>(single_level(c));
  auto ctx = make_context({base, {0}, 64});
  auto a = constant_functor(base, 0, 1);
  auto b = blank_functor(base, 0, {FinSet(1), FinSet(0)});
  b.actions[0][0] = {0};
  ASSERT_TRUE(check_functor(b).ok());
  auto alpha = NatTrans(ev(ctx, a), ev(ctx, b), {{0}});
  EXPECT_EQ(stage_of([&] { local_fullness_witness(ctx, a, b, alpha); }), "window");
}

TEST(Realize, SymmetricGroupCosets) {
  auto ctx = context("bs3");
  auto f = cosets(ctx.pi1_ptr());
  ASSERT_TRUE(check_functor(f).ok());
  auto t = realize(ctx, f);
  EXPECT_EQ(t.cover.object.total_size(), 18u);
  EXPECT_EQ(t.quotient.total_size(), 3u);
  EXPECT_TRUE(oracle::isomorphic(ev(ctx, t.quotient), f));
  EXPECT_TRUE(is_effective_epi(t.projection));
  ASSERT_EQ(t.iso_witness.size(), 1u);
  EXPECT_TRUE(oracle::bijective(t.iso_witness[0], 3));
}

TEST(Realize, RoundTripOnEveryCannedExample) {
  for (const auto& ex : canned_examples()) {
    auto ctx = make_context(ex.presentation);
    const auto& pi1 = ctx.pi1_ptr();
    for (std::size_t level = 0; level < pi1->depth(); ++level)
      for (const auto& f : all_functors(pi1, level, 2)) {
        auto t = realize(ctx, f);
        EXPECT_TRUE(oracle::isomorphic(ev(ctx, t.quotient), refine(f, std::max(f.level, t.quotient.level))))
            << ex.name;
        EXPECT_TRUE(check_functor(t.quotient).ok());
      }
  }
}

TEST(Realize, InputStageRejectsBrokenFunctors) {
  auto ctx = context("bz2");
  auto bad = oracle::group_set(ctx.pi1_ptr(), 0, {{1, 0}, {1, 0}});
  EXPECT_EQ(stage_of([&] { realize(ctx, bad); }), "input");
}

TEST(FullFaithfulness, HoldsOnFamilies) {
  for (const auto& name : {"bs3", "open-closed", "z2-exit", "two-curves"}) {
    auto ctx = context(name);
    auto fam = generate_test_family(ctx.presentation, 0);
    for (const auto& a : fam.members)
      for (const auto& b : fam.members) {
        if (a.functor.total_size() > 8 || b.functor.total_size() > 8) continue;
        auto r = full_faithfulness_check(ctx, a.functor, b.functor);
        EXPECT_TRUE(r.ok()) << name << " " << a.name << " -> " << b.name << "\n" << r.to_string();
      }
  }
}

TEST(FullFaithfulness, BudgetIsReportedSeparately) {
  auto ctx = context("terminal");
  auto big = constant_functor(ctx.presentation.base, 0, 4);
  auto r = full_faithfulness_check(ctx, big, big, 10);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].code, "budget");
}

TEST(FullFaithfulness, FailsWithoutConservativeFibres) {
  auto c = FinCat::with_hom_sizes(FinSet(2), {1, 0, 0, 1});
  auto base = std::make_shared<const ProCat>(single_level(c));
  auto ctx = make_context({base, {0}, 64});
  auto two = constant_functor(base, 0, 2);
  auto r = full_faithfulness_check(ctx, two, two);
  EXPECT_FALSE(r.ok());
}

TEST(ProCatIsomorphism, FindsReorderingsAndRejectsDifferentGroups) {
  auto p = build_strata(three_stratum_spec());
  auto q = build_strata(reorder_strata(three_stratum_spec(), {2, 0, 1}));
  auto iso = find_procat_isomorphism(p, q);
  ASSERT_TRUE(iso.has_value());
  EXPECT_EQ(iso->objects.size(), 3u);
  EXPECT_FALSE(find_procat_isomorphism(build_bg(cyclic_group(2)), build_bg(cyclic_group(3))).has_value());
  EXPECT_FALSE(find_procat_isomorphism(build_bg(cyclic_group(4)), build_bg(cyclic_chain({2, 2}))).has_value());
}

TEST(ProCatIsomorphism, DistinguishesGroupsOfTheSameOrder) {
  Group klein;
  klein.order = 4;
  klein.table.resize(16);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) klein.table[a * 4 + b] = a ^ b;
  EXPECT_FALSE(find_procat_isomorphism(build_bg(cyclic_group(4)), build_bg(klein)).has_value());
  EXPECT_TRUE(find_procat_isomorphism(build_bg(klein), build_bg(klein)).has_value());
}

TEST(Reconstruction, CannedAndSmallCategories) {
  EXPECT_TRUE(reconstruction_check(build_bg(cyclic_group(1))).ok());
  EXPECT_TRUE(reconstruction_check(build_bg(cyclic_chain({2, 4}))).ok());
  EXPECT_TRUE(reconstruction_check(build_bg(symmetric_group_3())).ok());
  auto r = reconstruction_check(build_strata(two_curves_spec()));
  EXPECT_TRUE(r.ok()) << r.to_string();
}

TEST(Reconstruction, RandomProCats) {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_procat(rng);
    auto r = reconstruction_check(p);
    EXPECT_TRUE(r.ok()) << r.to_string();
  }
}

TEST(Psi, CoinitialOnMultiPointExamples) {
  for (const auto& name : {"two-curves", "open-closed", "z2-exit"}) {
    auto ctx = context(name);
    auto psi = psi_coinitiality_check(ctx, 6);
    EXPECT_TRUE(psi.report.ok()) << name << "\n" << psi.report.to_string();
    EXPECT_GT(psi.nodes, 0u);
    EXPECT_GT(psi.legs, 0u);
    EXPECT_GT(psi.zigzags, 0u);
  }
}
