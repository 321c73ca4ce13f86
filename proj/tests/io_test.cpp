#include "exodromy/io.hpp"
#include "exodromy/random.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace exo;

namespace {

Document round_trip(const Document& d) {
  auto text = serialize(d);
  auto back = parse_document(text);
  EXPECT_EQ(serialize(back), text);
  return back;
}

std::string parse_failure(const std::string& text) {
  try {
    parse_document(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Io, CannedPresentationsRoundTrip) {
  for (const auto& ex : canned_examples()) {
    auto doc = make_document(io::PresentationSource{ex.spec, ex.presentation});
    auto back = round_trip(doc);
    EXPECT_EQ(back.kind, "presentation");
    const auto& src = std::get<io::PresentationSource>(back.value);
    EXPECT_EQ(*src.presentation.base, *ex.presentation.base) << ex.name;
    EXPECT_EQ(src.presentation.fibre_points, ex.presentation.fibre_points);
    EXPECT_EQ(src.presentation.generator_bound, ex.presentation.generator_bound);
    EXPECT_EQ(src.strata.has_value(), ex.spec.has_value());
  }
}

TEST(Io, ProCatAndStrataRoundTrip) {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = random_procat(rng);
    auto back = round_trip(make_document(p));
    EXPECT_EQ(std::get<ProCat>(back.value), p);
  }
  auto spec = z2_exit_spec();
  auto back = round_trip(make_document(spec));
  EXPECT_EQ(build_strata(std::get<StrataSpec>(back.value)), build_strata(spec));
}

TEST(Io, FunctorAndNatTransRoundTrip) {
  Rng rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    auto base = std::make_shared<const ProCat>(random_procat(rng));
    auto a = random_functor(rng, base, draw(rng, base->depth()), 3);
    auto b = random_functor(rng, base, draw(rng, base->depth()), 3);
    auto fa = std::get<CtsFunctor>(round_trip(make_document(a)).value);
    EXPECT_EQ(fa, a);
    auto maps = nat_trans_set(a, b);
    if (maps.empty()) continue;
    auto t = std::get<NatTrans>(round_trip(make_document(maps.back())).value);
    EXPECT_EQ(t, maps.back());
  }
}

TEST(Io, LabelledSetsUseLabelArrays) {
  auto j = io::finset(FinSet(2, {"U", "Z"}));
  EXPECT_EQ(j, Json::parse(R"(["U", "Z"])"));
  EXPECT_EQ(io::finset(FinSet(3)), Json(3));
}

TEST(Io, DocumentEnvelope) {
  auto j = to_json(make_document(build_bg(cyclic_group(2))));
  EXPECT_EQ(j["version"], "1");
  EXPECT_EQ(j["kind"], "procat");
  EXPECT_TRUE(j["body"].contains("levels"));
}

TEST(Io, ScalarArraysStayOnOneLine) {
  auto text = serialize(make_document(build_bg(cyclic_group(3))));
  EXPECT_NE(text.find("[0,1,2,1,2,0,2,0,1]"), std::string::npos) << text;
}

TEST(Io, ParseErrorsCarryAPath) {
  EXPECT_NE(parse_failure("{").find("malformed JSON"), std::string::npos);
  EXPECT_NE(parse_failure(R"({"version": "2", "kind": "procat", "body": {}})").find("unsupported version"),
            std::string::npos);
  EXPECT_NE(parse_failure(R"({"version": "1", "kind": "widget", "body": {}})").find("unknown kind"), std::string::npos);
  auto missing = parse_failure(R"({"version": "1", "kind": "procat", "body": {"objects": 1}})");
  EXPECT_NE(missing.find("$.body"), std::string::npos) << missing;
  EXPECT_NE(missing.find("levels"), std::string::npos) << missing;

  auto j = to_json(make_document(build_bg(cyclic_group(2))));
  j["body"]["transitions"] = Json::array({Json::array()});
  EXPECT_NE(parse_failure(j.dump()).find("$.body.transitions"), std::string::npos);
}

TEST(Io, NegativeIndicesAreRejected) {
  auto j = to_json(make_document(io::PresentationSource{std::nullopt, canned_example("bz2")->presentation}));
  j["body"]["generator_bound"] = -1;
  EXPECT_NE(parse_failure(j.dump()).find("non-negative"), std::string::npos);
}

TEST(Io, MissingFileIsAParseError) {
  try {
    read_document("/nonexistent/path.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("cannot read"), std::string::npos);
  }
}

TEST(Io, PresentationDefaultsToAllFibrePoints) {
  auto j = to_json(make_document(io::PresentationSource{std::nullopt, canned_example("open-closed")->presentation}));
  j["body"].erase("fibre_points");
  auto src = std::get<io::PresentationSource>(from_json(j).value);
  EXPECT_EQ(src.presentation.fibre_points, (std::vector<std::size_t>{0, 1}));
}

TEST(Io, ReadsTheBundledDocuments) {
  const std::string dir = EXODROMY_TEST_DATA;
  auto bs3 = read_document(dir + "/bs3.json");
  EXPECT_EQ(bs3.kind, "presentation");
  EXPECT_EQ(std::get<io::PresentationSource>(bs3.value).presentation.base->level(0).hom_size(0, 0), 6u);
  auto cosets = read_document(dir + "/bs3_cosets.json");
  EXPECT_EQ(cosets.kind, "functor");
  EXPECT_EQ(std::get<CtsFunctor>(cosets.value).total_size(), 3u);
  EXPECT_THROW(read_document(dir + "/malformed.json"), ParseError);
}
