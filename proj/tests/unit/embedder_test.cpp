#include "test_support.hpp"

#include "ttpx/errors.hpp"
#include "ttpx/io.hpp"
#include "ttpx/llm/embedder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using ttpx::llm::HashingEmbedder;

namespace {

// Independent FNV-1a and feature map, summed in a sparse map.
std::uint64_t fnv(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> oracle_embed(const std::vector<std::string>& toks, std::size_t dim) {
    std::vector<double> v(dim, 0.0);
    auto add = [&](const std::string& f) {
        auto h = fnv(f);
        v[h % dim] += (h >> 63) ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        add("u:" + toks[i]);
        if (i + 1 < toks.size()) add("b:" + toks[i] + " " + toks[i + 1]);
    }
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

} // namespace

TEST(HashingEmbedder, KnownFnvVectors) {
    EXPECT_EQ(fnv(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(ttpx::io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(HashingEmbedder, Tokenizer) {
    auto t = HashingEmbedder::tokenize("Base32-encoded DNS, via HTTP/2!");
    EXPECT_EQ(t, (std::vector<std::string>{"base32", "encoded", "dns", "via", "http", "2"}));
}

TEST(HashingEmbedder, MatchesOracle) {
    HashingEmbedder e(64);
    auto v = e.embed_one("The loader decodes base64 payloads");
    auto want = oracle_embed({"the", "loader", "decodes", "base64", "payloads"}, 64);
    ASSERT_EQ(v.size(), 64u);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(v[i], want[i], 1e-6);
}

TEST(HashingEmbedder, UnitNormAndDeterminism) {
    HashingEmbedder e(256);
    auto a = e.embed({"some text here", "other text", "!!!"});
    for (const auto& v : a) EXPECT_NEAR(ttpx_test::naive_dot(v, v), 1.0, 1e-6);
    EXPECT_EQ(a, e.embed({"some text here", "other text", "!!!"}));
    EXPECT_EQ(e.fingerprint().name, "hashing-fnv1a-unibigram-v1");
    EXPECT_EQ(e.fingerprint().dim, 256u);
}

TEST(HashingEmbedder, NearDuplicatesAreClose) {
    HashingEmbedder e(256);
    // One trailing token appended to a long sentence: 14 of 16 features shared.
    std::string base = "the implant encodes stolen data in base32 dns subdomains and sends";
    auto a = e.embed_one(base);
    auto b = e.embed_one(base + " it");
    EXPECT_GE(ttpx_test::naive_dot(a, b), 0.9);
    auto c = e.embed_one("scheduled task persistence created at logon by the dropper");
    EXPECT_LT(ttpx_test::naive_dot(a, c), 0.5);
}

TEST(HashingEmbedder, RejectsEmptyText) {
    HashingEmbedder e(16);
    EXPECT_THROW(e.embed_one(""), ttpx::ValidationError);
    EXPECT_THROW(HashingEmbedder(0), ttpx::ValidationError);
}
