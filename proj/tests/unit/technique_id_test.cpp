#include "ttpx/errors.hpp"
#include "ttpx/technique_id.hpp"

#include <gtest/gtest.h>

#include <random>

using ttpx::TechniqueId;

TEST(TechniqueId, ParsesTechniqueAndSubtechnique) {
    EXPECT_EQ(TechniqueId::parse("T1132").str(), "T1132");
    auto sub = TechniqueId::parse("T1003.001");
    EXPECT_TRUE(sub.is_subtechnique());
    EXPECT_EQ(sub.parent_or_self().str(), "T1003");
    EXPECT_FALSE(TechniqueId::parse("T1003").parent().has_value());
}

TEST(TechniqueId, ExactParseRejectsNonCanonical) {
    for (const char* bad : {"t1132", " T1132", "T113", "T11322", "T1003.01", "T1003.0011", "X1132", "T1003.", ""})
        EXPECT_THROW(TechniqueId::parse(bad), ttpx::GrammarError) << bad;
}

TEST(TechniqueId, NormalizeTrimsAndUppercases) {
    EXPECT_EQ(TechniqueId::normalize("  t1003.001\t").str(), "T1003.001");
    EXPECT_FALSE(TechniqueId::try_normalize("T99").has_value());
    EXPECT_TRUE(TechniqueId::is_valid("T1059"));
    EXPECT_FALSE(TechniqueId::is_valid("t1059"));
}

TEST(TechniqueId, GrammarErrorKeepsRawText) {
    try {
        TechniqueId::parse("T12");
        FAIL();
    } catch (const ttpx::GrammarError& e) {
        EXPECT_EQ(e.raw(), "T12");
    }
}

TEST(TechniqueId, ResolveParentIsIdempotent) {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        char buf[16];
        if (rng() % 2)
            std::snprintf(buf, sizeof buf, "T%04u.%03u", unsigned(rng() % 10000), unsigned(rng() % 1000));
        else
            std::snprintf(buf, sizeof buf, "T%04u", unsigned(rng() % 10000));
        auto id = TechniqueId::parse(buf);
        auto once = ttpx::resolve_parent(id);
        EXPECT_EQ(ttpx::resolve_parent(once), once);
        EXPECT_FALSE(once.is_subtechnique());
    }
}

TEST(TechniqueId, ParentChildRelation) {
    auto p = TechniqueId::parse("T1003");
    auto c = TechniqueId::parse("T1003.001");
    auto s = TechniqueId::parse("T1003.002");
    EXPECT_TRUE(ttpx::parent_child_related(p, c));
    EXPECT_TRUE(ttpx::parent_child_related(c, p));
    EXPECT_TRUE(ttpx::parent_child_related(c, c));
    EXPECT_FALSE(ttpx::parent_child_related(c, s));
    EXPECT_FALSE(ttpx::parent_child_related(p, TechniqueId::parse("T1004")));
}

TEST(TechniqueId, ScanFindsWordBoundedTokens) {
    auto toks = ttpx::scan_id_tokens("uses t1132 and T1003.001; not XT1071 or T10711");
    ASSERT_EQ(toks.size(), 2u);
    EXPECT_EQ(toks[0].id.str(), "T1132");
    EXPECT_EQ(toks[0].offset, 5u);
    EXPECT_EQ(toks[1].id.str(), "T1003.001");
    EXPECT_EQ(toks[1].length, 9u);
}

TEST(TechniqueId, OrderingIsLexicographic) {
    EXPECT_LT(TechniqueId::parse("T1003"), TechniqueId::parse("T1003.001"));
    EXPECT_LT(TechniqueId::parse("T1003.001"), TechniqueId::parse("T1004"));
}
