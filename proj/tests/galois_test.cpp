#include "exodromy/galois.hpp"
#include "exodromy/strat.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace exo;

namespace {

/// Two objects and only identity arrows, observed at object 0 alone.
GaloisPresentation discrete_one_point() {
  auto c = FinCat::with_hom_sizes(FinSet(2), {1, 0, 0, 1});
  auto base = std::make_shared<const ProCat>(single_level(c));
  return {base, {0}, 64};
}

GaloisPresentation canned(const std::string& name) { return canned_example(name)->presentation; }

bool has_code(const ValidationReport& r, const std::string& code) {
  for (const auto& i : r.issues)
    if (i.code == code) return true;
  return false;
}

std::vector<CtsFunctor> family_functors(const GaloisPresentation& g, std::size_t window) {
  std::vector<CtsFunctor> out;
  for (const auto& m : generate_test_family(g, g.base->finest()).members)
    if (m.functor.total_size() <= window) out.push_back(m.functor);
  return out;
}

} // namespace

TEST(Presentation, ValidatesFibrePoints) {
  auto g = canned("two-curves");
  EXPECT_TRUE(validate_presentation(g).ok());
  g.fibre_points = {0, 0};
  EXPECT_TRUE(has_code(validate_presentation(g), "fibre-points"));
  g.fibre_points = {2};
  EXPECT_TRUE(has_code(validate_presentation(g), "fibre-points"));
  g.fibre_points = {};
  EXPECT_FALSE(validate_presentation(g).ok());
}

TEST(FibreEval, ReadsTheValueAtTheChosenPoint) {
  auto g = canned("bs3");
  EXPECT_EQ(fibre_eval(g, 0, terminal_functor(g.base)).size, 1u);
  EXPECT_EQ(fibre_eval(g, 0, oracle::regular(g.base, 0)).size, 6u);
  EXPECT_EQ(fibre_eval(g, 0, corepresentable(g.base, 0, 0)).size, 6u);
  EXPECT_THROW(fibre_eval(g, 1, terminal_functor(g.base)), ShapeError);
  auto oc = canned("open-closed");
  auto h = corepresentable(oc.base, 0, 0);
  EXPECT_EQ(fibre_eval(oc, 0, h).size, 1u);
  EXPECT_EQ(fibre_eval(oc, 1, h).size, 1u);
  auto hz = corepresentable(oc.base, 0, 1);
  EXPECT_EQ(fibre_eval(oc, 0, hz).size, 0u);
}

TEST(PretoposMorphism, EvaluationsPass) {
  for (const auto& name : {"bz2", "bs3", "open-closed", "two-curves", "z2-exit"}) {
    auto g = canned(name);
    auto samples = family_functors(g, 8);
    for (std::size_t i = 0; i < g.fibre_count(); ++i) {
      auto r = pretopos_morphism_check(g, i, samples);
      EXPECT_TRUE(r.ok()) << name << "\n" << r.to_string();
      EXPECT_GT(r.checked, 0u);
    }
  }
}

TEST(PretoposMorphism, PointedEvaluationFails) {
  auto g = canned("bz2");
  auto r = pretopos_morphism_check(pointed_evaluation(0), family_functors(g, 8));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_code(r, "terminal"));
}

TEST(JointConservativity, HoldsWhenEveryObjectIsAPoint) {
  auto g = canned("two-curves");
  auto fs = family_functors(g, 6);
  std::vector<NatTrans> samples;
  for (const auto& a : fs)
    for (const auto& b : fs)
      for (auto& t : nat_trans_set(a, b)) samples.push_back(std::move(t));
  auto r = joint_conservativity_check(g, samples);
  EXPECT_TRUE(r.ok()) << r.to_string();
  EXPECT_EQ(r.checked, samples.size());
}

TEST(JointConservativity, PlantedCounterexample) {
  auto g = discrete_one_point();
  auto a = blank_functor(g.base, 0, {FinSet(1), FinSet(0)});
  auto b = blank_functor(g.base, 0, {FinSet(1), FinSet(1)});
  for (auto* f : {&a, &b})
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t e = 0; e < f->value_size(x); ++e) f->actions[x * 2 + x][0][e] = e;
  NatTrans t(a, b, {{0}, {}});
  ASSERT_TRUE(check_nat_trans(t).ok());
  auto r = joint_conservativity_check(g, {t});
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].witness, (std::vector<std::size_t>{0, 1}));
}

TEST(Faithfulness, HoldsOnCannedFamilies) {
  for (const auto& name : {"bz2", "bzhat", "open-closed", "z2-exit", "three-stratum"}) {
    auto g = canned(name);
    auto fs = family_functors(g, 6);
    for (const auto& a : fs) {
      EXPECT_TRUE(subobject_injectivity_check(g, a).ok()) << name;
      for (const auto& b : fs) EXPECT_TRUE(faithfulness_check(g, a, b).ok()) << name;
    }
  }
}

TEST(Faithfulness, FailsWhenAnObjectIsNotObserved) {
  auto g = discrete_one_point();
  auto c = constant_functor(g.base, 0, 2);
  EXPECT_TRUE(has_code(faithfulness_check(g, c, c), "faithfulness"));
  EXPECT_TRUE(has_code(subobject_injectivity_check(g, c), "subobjects"));
}

TEST(TestFamily, ContainsCorepresentablesAndRefinements) {
  auto g = canned("bzhat");
  auto fam = generate_test_family(g, 1);
  ASSERT_EQ(fam.corepresentable.size(), 1u);
  EXPECT_EQ(fam.members[fam.corepresentable[0]].functor, corepresentable(g.base, 1, 0));
  auto lower = generate_test_family(g, 0);
  EXPECT_EQ(fam.refinement_of_lower.size(), lower.members.size());
  for (std::size_t i = 0; i < lower.members.size(); ++i)
    EXPECT_EQ(fam.members[fam.refinement_of_lower[i]].functor, refine(lower.members[i].functor, 1));
  for (const auto& m : fam.members) {
    EXPECT_TRUE(check_functor(m.functor).ok()) << m.name;
    EXPECT_LE(m.functor.total_size(), g.generator_bound);
  }
}

TEST(FibreTransformations, CountMatchesHomSets) {
  for (const auto& name : {"bz2", "bs3", "open-closed", "z2-exit"}) {
    auto g = canned(name);
    auto data = evaluation_data(g);
    for (std::size_t k = 0; k < g.base->depth(); ++k)
      for (std::size_t i = 0; i < g.fibre_count(); ++i)
        for (std::size_t j = 0; j < g.fibre_count(); ++j)
          EXPECT_EQ(data.solutions[k][i * g.fibre_count() + j].size(),
                    g.base->level(k).hom_size(g.fibre_points[i], g.fibre_points[j]))
              << name;
  }
}

TEST(ElementsCategory, NodesAndCofilteredness) {
  auto g = canned("bz2");
  auto fam = generate_test_family(g, 0);
  auto el = elements_category(g, fam, {0}, 6);
  std::size_t expected = 0;
  for (const auto& m : fam.members)
    if (m.functor.total_size() <= 6) expected += m.functor.value_size(0);
  EXPECT_EQ(el.nodes.size(), expected);
  auto r = cofilteredness_check(el);
  EXPECT_TRUE(r.ok()) << r.to_string();
  EXPECT_THROW(elements_category(g, fam, {0}, 0), ShapeError);
}

TEST(ElementsCategory, TerminalIndexListUsesEveryMember) {
  auto g = canned("two-curves");
  auto fam = generate_test_family(g, 0);
  auto el = elements_category(g, fam, {}, 4);
  std::size_t expected = 0;
  for (const auto& m : fam.members) expected += m.functor.total_size() <= 4;
  EXPECT_EQ(el.nodes.size(), expected);
  EXPECT_TRUE(cofilteredness_check(el).ok());
}

TEST(FundamentalCategory, Terminal) {
  auto fc = fundamental_category(canned("terminal"));
  EXPECT_EQ(fc.category->object_count(), 1u);
  EXPECT_EQ(fc.category->level(0).hom_size(0, 0), 1u);
  EXPECT_TRUE(fc.cross_validation.ok());
}

TEST(FundamentalCategory, SymmetricGroupHasSixArrows) {
  auto fc = fundamental_category(canned("bs3"));
  EXPECT_EQ(fc.category->level(0).hom_size(0, 0), 6u);
  EXPECT_TRUE(validate_procat(*fc.category).ok());
  EXPECT_TRUE(fc.cross_validation.ok()) << fc.cross_validation.to_string();
  EXPECT_GT(fc.cross_validation.checked, 0u);
}

TEST(FundamentalCategory, TwoCurvesFormAPreorderThatIsNotAPoset) {
  // Two curves meeting in two points, each stratum being one curve minus a
  // meeting point: specialisation goes both ways.
  auto fc = fundamental_category(canned("two-curves"));
  const auto& c = fc.category->level(0);
  ASSERT_EQ(c.object_count(), 2u);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) EXPECT_EQ(c.hom_size(x, y), 1u);
  bool antisymmetric = true;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      if (x != y && c.hom_size(x, y) > 0 && c.hom_size(y, x) > 0) antisymmetric = false;
  EXPECT_FALSE(antisymmetric);
}

TEST(FundamentalCategory, RestrictsToTheFibrePoints) {
  auto fc = fundamental_category(canned("two-curves-one-point"));
  EXPECT_EQ(fc.category->object_count(), 1u);
  EXPECT_EQ(fc.fibre_points, (std::vector<std::size_t>{0}));
  EXPECT_EQ(fc.category->objects.labels, (std::vector<std::string>{"X0"}));
}

TEST(FundamentalCategory, InvalidPresentationThrows) {
  auto g = canned("bz2");
  g.fibre_points = {};
  EXPECT_THROW(fundamental_category(g), ValidationError);
}

TEST(Reconstruction, FromEvaluationsAloneMatchesHomSizes) {
  for (const auto& name : {"bz2", "bzhat", "three-stratum", "z2-exit"}) {
    auto g = canned(name);
    auto rebuilt = reconstruct_from_evaluations(g, evaluation_data(g));
    EXPECT_TRUE(validate_procat(rebuilt).ok()) << name;
    ASSERT_EQ(rebuilt.depth(), g.base->depth());
    for (std::size_t k = 0; k < rebuilt.depth(); ++k)
      for (std::size_t i = 0; i < g.fibre_count(); ++i)
        for (std::size_t j = 0; j < g.fibre_count(); ++j)
          EXPECT_EQ(rebuilt.level(k).hom_size(i, j), g.base->level(k).hom_size(g.fibre_points[i], g.fibre_points[j]));
  }
}
