#include "test_support.hpp"

#include "ttpx/dataset.hpp"
#include "ttpx/errors.hpp"

#include <gtest/gtest.h>

using namespace ttpx;

TEST(Dataset, FixtureLoads) {
    auto ds = load_dataset(ttpx_test::data_path("dataset.jsonl"));
    ASSERT_EQ(ds.size(), 20u);
    EXPECT_EQ(ds[0].id, "s01");
    EXPECT_EQ(ds[0].labels.size(), 4u);
}

TEST(Dataset, ThreeValidLines) {
    auto ds = parse_dataset("{\"id\":\"a\",\"text\":\"x\",\"labels\":[\"T1132\"]}\n"
                            "\n"
                            "{\"id\":2,\"text\":\"y\",\"labels\":[\"t1071\"]}\n"
                            "{\"id\":\"c\",\"text\":\"z\",\"labels\":[\"T1003.001\"]}\n");
    ASSERT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds[1].id, "2");
    EXPECT_EQ(ds[1].labels.begin()->str(), "T1071");
}

TEST(Dataset, EmptyLabelsReportLine) {
    try {
        parse_dataset("{\"id\":\"a\",\"text\":\"x\",\"labels\":[\"T1132\"]}\n{\"id\":\"b\",\"text\":\"y\",\"labels\":[]}\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Dataset, DuplicateIdRejected) {
    try {
        parse_dataset("{\"id\":\"a\",\"text\":\"x\",\"labels\":[\"T1132\"]}\n{\"id\":\"a\",\"text\":\"y\",\"labels\":[\"T1132\"]}\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    }
}

TEST(Dataset, BadIdAndMalformedJson) {
    EXPECT_THROW(parse_dataset("{\"id\":\"a\",\"text\":\"x\",\"labels\":[\"T11\"]}\n"), ParseError);
    EXPECT_THROW(parse_dataset("{\"id\":\"a\",\n"), ParseError);
}

TEST(Dataset, StrictCatalogMembership) {
    DatasetOptions opts{true, &ttpx_test::fixture_catalog(), true};
    EXPECT_THROW(parse_dataset("{\"id\":\"a\",\"text\":\"x\",\"labels\":[\"T9999\"]}\n", opts), ParseError);
    opts.strict = false;
    EXPECT_NO_THROW(parse_dataset("{\"id\":\"a\",\"text\":\"x\",\"labels\":[\"T9999\"]}\n", opts));
}

TEST(Dataset, UnlabeledInputAllowedWhenRequested) {
    DatasetOptions opts;
    opts.require_labels = false;
    auto ds = parse_dataset("{\"id\":\"a\",\"text\":\"x\"}\n", opts);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_TRUE(ds[0].labels.empty());
}

TEST(Dataset, JsonlLineRoundTrips) {
    auto ds = load_dataset(ttpx_test::data_path("dataset.jsonl"));
    std::string text;
    for (const auto& s : ds) text += to_jsonl_line(s) + "\n";
    EXPECT_EQ(parse_dataset(text), ds);
}
