#include "exodromy/exodromy.hpp"
#include "exodromy/strat.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace exo;

TEST(Groups, StandardGroupsAreValid) {
  EXPECT_TRUE(validate_group(cyclic_group(1)).ok());
  EXPECT_TRUE(validate_group(cyclic_group(5)).ok());
  auto s3 = symmetric_group_3();
  EXPECT_TRUE(validate_group(s3).ok());
  EXPECT_EQ(s3.order, 6u);
  // non-abelian
  bool commutes = true;
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) commutes = commutes && s3.mul(a, b) == s3.mul(b, a);
  EXPECT_FALSE(commutes);
}

TEST(Groups, BrokenTablesAreReported) {
  Group g;
  g.order = 2;
  g.table = {0, 1, 1, 1};
  auto r = validate_group(g);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.issues.front().code, "inverse");
  EXPECT_THROW(cyclic_chain({2, 3}), ShapeError);
  GroupChain bad{{cyclic_group(2), cyclic_group(4)}, {{0, 0, 0, 0}}};
  EXPECT_FALSE(validate_chain(bad).ok());
}

TEST(BuildBG, TrivialGroup) {
  auto p = build_bg(cyclic_group(1));
  EXPECT_EQ(p.object_count(), 1u);
  EXPECT_EQ(p.depth(), 1u);
  EXPECT_EQ(p.level(0).hom_size(0, 0), 1u);
  EXPECT_EQ(p.objects.labels, (std::vector<std::string>{"pt"}));
}

TEST(BuildBG, SymmetricGroupCompositionIsTheGroupLaw) {
  auto g = symmetric_group_3();
  auto p = build_bg(g);
  const auto& c = p.level(0);
  EXPECT_EQ(c.hom_size(0, 0), 6u);
  EXPECT_EQ(c.identity(0), g.identity);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) EXPECT_EQ(c.compose(0, 0, 0, a, b), g.mul(a, b));
}

TEST(BuildBG, CyclicChain) {
  auto p = build_bg(cyclic_chain({2, 4, 8}));
  ASSERT_EQ(p.depth(), 3u);
  EXPECT_EQ(p.level(0).hom_size(0, 0), 2u);
  EXPECT_EQ(p.level(1).hom_size(0, 0), 4u);
  EXPECT_EQ(p.level(2).hom_size(0, 0), 8u);
  for (std::size_t h = 0; h < 8; ++h) {
    EXPECT_EQ(p.project(0, 0, h, 2, 1), h % 4);
    EXPECT_EQ(p.project(0, 0, h, 2, 0), h % 2);
  }
  EXPECT_TRUE(validate_procat(p).ok());
}

TEST(BuildStrata, OpenClosed) {
  auto p = build_strata(open_closed_spec());
  const auto& c = p.level(0);
  EXPECT_EQ(c.hom_size(0, 1), 1u);
  EXPECT_EQ(c.hom_size(1, 0), 0u);
  EXPECT_EQ(c.hom_size(0, 0), 1u);
  EXPECT_EQ(c.hom_size(1, 1), 1u);
}

TEST(BuildStrata, ExitPathsCarryBothActions) {
  auto p = build_strata(z2_exit_spec());
  const auto& c = p.level(0);
  EXPECT_EQ(c.hom_size(0, 0), 2u);
  EXPECT_EQ(c.hom_size(0, 1), 2u);
  // precomposing with the generator of Z/2 swaps the two exit paths
  EXPECT_EQ(c.compose(0, 0, 1, 0, 1), 1u);
  EXPECT_EQ(c.compose(0, 0, 1, 1, 1), 0u);
  // the closed stratum has trivial monodromy, so postcomposition fixes paths
  EXPECT_EQ(c.compose(0, 1, 1, 0, 1), 1u);
}

TEST(BuildStrata, ThreeStrata) {
  auto p = build_strata(three_stratum_spec());
  const auto& c = p.level(0);
  EXPECT_EQ(c.hom_size(0, 2), 1u);
  EXPECT_EQ(c.hom_size(2, 0), 0u);
  EXPECT_EQ(c.compose(0, 1, 2, 0, 0), 0u);
}

TEST(BuildStrata, TwoCurvesGiveAPreorder) {
  // Each stratum is one curve minus a meeting point, so each specialises to the other.
  auto p = build_strata(two_curves_spec());
  const auto& c = p.level(0);
  EXPECT_EQ(c.hom_size(0, 1), 1u);
  EXPECT_EQ(c.hom_size(1, 0), 1u);
  EXPECT_EQ(c.compose(0, 1, 0, 0, 0), c.identity(0));
  EXPECT_EQ(c.compose(1, 0, 1, 0, 0), c.identity(1));
}

TEST(BuildStrata, RejectsMalformedSpecs) {
  auto loop = open_closed_spec();
  loop.exits.push_back(trivial_exit(0, 0));
  EXPECT_THROW(build_strata(loop), ShapeError);

  auto twice = open_closed_spec();
  twice.exits.push_back(trivial_exit(0, 1));
  EXPECT_THROW(build_strata(twice), ShapeError);

  auto missing = three_stratum_spec();
  missing.compositions.clear();
  EXPECT_THROW(build_strata(missing), ShapeError);

  auto bad_action = z2_exit_spec();
  bad_action.exits[0].right = {1, 0, 1, 0}; // identity moves path 0
  try {
    build_strata(bad_action);
    FAIL() << "expected an action violation";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.law(), "action");
  }

  auto unequal = open_closed_spec();
  unequal.monodromy[0] = cyclic_chain({2, 4});
  EXPECT_THROW(build_strata(unequal), ShapeError);
}

TEST(BuildStrata, NonAssociativeCompositionIsCaught) {
  // Two exit paths U -> Z with Z/2 acting on both sides; a composition table
  // that ignores the actions cannot be associative.
  StrataSpec s;
  s.strata = FinSet(2, {"A", "B"});
  s.monodromy = {single(cyclic_group(2)), single(cyclic_group(2))};
  s.exits = {{0, 1, 2, {0, 1, 1, 0}, {0, 1, 1, 0}}, {1, 0, 2, {0, 1, 1, 0}, {0, 1, 1, 0}}};
  s.compositions = {{0, 1, 0, {0, 0, 0, 0}}, {1, 0, 1, {0, 0, 0, 0}}};
  EXPECT_THROW(build_strata(s), ValidationError);
}

TEST(ReorderStrata, GivesAnIsomorphicCategory) {
  for (auto spec : {three_stratum_spec(), z2_exit_spec(), two_curves_spec()}) {
    const auto n = spec.strata.size;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = n - 1 - i;
    auto p = build_strata(spec);
    auto q = build_strata(reorder_strata(spec, perm));
    auto iso = find_procat_isomorphism(p, q);
    ASSERT_TRUE(iso.has_value());
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        EXPECT_EQ(p.level(0).hom_size(x, y), q.level(0).hom_size(iso->objects[x], iso->objects[y]));
  }
}

TEST(Canned, ListAndLookup) {
  auto all = canned_examples();
  std::set<std::string> names;
  for (const auto& e : all) {
    names.insert(e.name);
    EXPECT_FALSE(e.description.empty());
    EXPECT_TRUE(validate_presentation(e.presentation).ok()) << e.name;
    EXPECT_EQ(e.spec.has_value(), e.presentation.base->object_count() > 1) << e.name;
  }
  for (const auto* n : {"terminal", "bz2", "bs3", "bzhat", "open-closed", "two-curves", "three-stratum"})
    EXPECT_TRUE(names.count(n)) << n;
  EXPECT_EQ(names.size(), all.size());
  EXPECT_FALSE(canned_example("nope").has_value());
  EXPECT_EQ(canned_example("two-curves-one-point")->presentation.fibre_points, (std::vector<std::size_t>{0}));
  EXPECT_EQ(canned_example("bzhat")->presentation.base->depth(), 2u);
}
