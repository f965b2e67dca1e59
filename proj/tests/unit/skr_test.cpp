#include "test_support.hpp"

#include "ttpx/errors.hpp"
#include "ttpx/skr.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

using namespace ttpx;
using ttpx_test::tid;

TEST(Skr, ListingParsesToExpectedInstance) {
    auto parsed = parse_skr(ttpx_test::kListingVerbatim);
    EXPECT_EQ(parsed, ttpx_test::listing_instance());
    std::set<std::string> keys;
    for (const auto& [id, _] : parsed.actions) keys.insert(id.str());
    EXPECT_EQ(keys, (std::set<std::string>{"T1001", "T1008", "T1071", "T1132"}));
}

TEST(Skr, CanonicalSerializationIsExact) {
    EXPECT_EQ(serialize_skr(ttpx_test::listing_instance()), ttpx_test::kListingCanonical);
}

TEST(Skr, RoundTrip) {
    auto inst = ttpx_test::listing_instance();
    EXPECT_EQ(parse_skr(serialize_skr(inst)), inst);
    inst.examples[tid("T1132")] = {"dns label aGVsbG8 carried the payload"};
    EXPECT_EQ(parse_skr(serialize_skr(inst)), inst);
    EXPECT_EQ(skr_from_json(skr_to_json(inst)), inst);
}

TEST(Skr, KeysAreNormalized) {
    auto s = parse_skr(R"({"state":"s","action":{" t1132 ":"a"}})");
    EXPECT_EQ(s.actions.begin()->first.str(), "T1132");
}

TEST(Skr, StructuralErrors) {
    EXPECT_THROW(parse_skr("not json"), ParseError);
    EXPECT_THROW(parse_skr(R"({"action":{"T1132":"a"}})"), ParseError);
    EXPECT_THROW(parse_skr(R"({"state":"s"})"), ParseError);
    EXPECT_THROW(parse_skr(R"({"state":1,"action":{}})"), ParseError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":[]})"), ParseError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{"T1132":5}})"), ParseError);
}

TEST(Skr, InvariantViolations) {
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{"bogus":"a"}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"","action":{"T1132":"a"}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"uses T1132","action":{"T1132":"a"}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{"T1132":""}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{"T1132":"a","T1071":"a"}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{"T1132":"a","t1132":"b"}})"), ValidationError);
    EXPECT_THROW(parse_skr(R"({"state":"s","action":{"T1132":"a"},"examples":{"T1071":["x"]}})"), ValidationError);
}

TEST(Skr, StrictCatalogCheck) {
    auto inst = ttpx_test::listing_instance();
    inst.actions.emplace(tid("T9999"), "made up");
    EXPECT_TRUE(validate_skr(inst).empty());
    auto v = validate_skr(inst, &ttpx_test::fixture_catalog(), true);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("T9999"), std::string::npos);
}
