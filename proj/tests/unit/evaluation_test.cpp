#include "test_support.hpp"

#include "ttpx/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace ttpx;
using ttpx_test::tid;

namespace {

const char* const kIds[] = {"T1001", "T1003", "T1003.001", "T1071", "T1071.004", "T1132", "T1486", "T1566"};

std::set<TechniqueId> random_set(std::mt19937_64& rng) {
    std::set<TechniqueId> s;
    std::size_t n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) s.insert(tid(kIds[rng() % std::size(kIds)]));
    return s;
}

// Brute force over the string forms, independent of the library.
struct Oracle {
    double p, r, f;
    bool hit;
};

Oracle oracle(const std::set<TechniqueId>& pred, const std::set<TechniqueId>& gold) {
    std::vector<std::string> P, G;
    for (const auto& x : pred) P.push_back(x.str());
    for (const auto& x : gold) G.push_back(x.str());
    int tp = 0;
    for (const auto& a : P)
        for (const auto& b : G)
            if (a == b) ++tp;
    if (P.empty() && G.empty()) return {1, 1, 1, false};
    double p = P.empty() ? 0 : double(tp) / P.size();
    double r = G.empty() ? 0 : double(tp) / G.size();
    double f = (p + r) > 0 ? 2 * p * r / (p + r) : 0;
    return {p, r, f, tp > 0};
}

} // namespace

TEST(Evaluation, SampleMetricsMatchBruteForce) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        auto pred = random_set(rng);
        auto gold = random_set(rng);
        auto s = score_sample("x", pred, gold, false);
        auto o = oracle(pred, gold);
        EXPECT_NEAR(s.precision, o.p, 1e-12);
        EXPECT_NEAR(s.recall, o.r, 1e-12);
        EXPECT_NEAR(s.f1, o.f, 1e-12);
        EXPECT_EQ(s.hit, o.hit);
    }
}

TEST(Evaluation, PartialMatchExample) {
    auto s = score_sample("x", {tid("T1132")}, {tid("T1132"), tid("T1071")}, false);
    EXPECT_DOUBLE_EQ(s.precision, 1.0);
    EXPECT_DOUBLE_EQ(s.recall, 0.5);
    EXPECT_NEAR(s.f1, 0.667, 1e-3);
    EXPECT_TRUE(s.hit);
}

TEST(Evaluation, EmptySides) {
    auto both = score_sample("x", {}, {}, false);
    EXPECT_EQ(both.precision, 1.0);
    EXPECT_EQ(both.recall, 1.0);
    EXPECT_EQ(both.f1, 1.0);
    auto no_pred = score_sample("x", {}, {tid("T1132")}, false);
    EXPECT_EQ(no_pred.precision, 0.0);
    EXPECT_EQ(no_pred.f1, 0.0);
    EXPECT_FALSE(no_pred.hit);
}

TEST(Evaluation, ParentResolution) {
    auto on = score_sample("x", {tid("T1003.001")}, {tid("T1003")}, true);
    EXPECT_EQ(on.f1, 1.0);
    EXPECT_TRUE(on.hit);
    EXPECT_EQ(on.pred, std::set<TechniqueId>{tid("T1003")});
    auto off = score_sample("x", {tid("T1003.001")}, {tid("T1003")}, false);
    EXPECT_EQ(off.f1, 0.0);
    EXPECT_FALSE(off.hit);
}

TEST(Evaluation, AggregatesAreMeans) {
    std::vector<EvalSample> samples{{"a", "t", {tid("T1132"), tid("T1071")}}, {"b", "t", {tid("T1486")}}};
    Predictions preds{{"a", {tid("T1132")}}, {"b", {tid("T1566")}}};
    auto r = score(preds, samples, false);
    EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
    EXPECT_DOUBLE_EQ(r.precision, 0.5);
    EXPECT_DOUBLE_EQ(r.recall, 0.25);
    EXPECT_NEAR(r.f1, (2.0 / 3.0) / 2, 1e-12);
    // micro: tp 1, |P| 2, |G| 3
    EXPECT_DOUBLE_EQ(r.micro_precision, 0.5);
    EXPECT_DOUBLE_EQ(r.micro_recall, 1.0 / 3.0);
    EXPECT_EQ(r.per_sample.size(), 2u);
}

TEST(Evaluation, OrderInvariance) {
    std::mt19937_64 rng(32);
    std::vector<EvalSample> samples;
    Predictions preds;
    for (int i = 0; i < 200; ++i) {
        auto gold = random_set(rng);
        if (gold.empty()) gold.insert(tid("T1001"));
        samples.push_back({"s" + std::to_string(i), "t", gold});
        preds[samples.back().id] = random_set(rng);
    }
    auto base = score(preds, samples, true);
    for (int rep = 0; rep < 5; ++rep) {
        std::shuffle(samples.begin(), samples.end(), rng);
        auto r = score(preds, samples, true);
        EXPECT_EQ(r.accuracy, base.accuracy);
        EXPECT_EQ(r.precision, base.precision);
        EXPECT_EQ(r.recall, base.recall);
        EXPECT_EQ(r.f1, base.f1);
    }
}

TEST(Evaluation, MissingAndUnknownPredictions) {
    std::vector<EvalSample> samples{{"a", "t", {tid("T1132")}}, {"b", "t", {tid("T1486")}}};
    auto r = score({{"a", {tid("T1132")}}}, samples, false);
    EXPECT_EQ(r.warnings.size(), 1u);
    EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
    EXPECT_THROW(score({{"zzz", {}}}, samples, false), ValidationError);
}

TEST(Evaluation, OrderFreeMean) {
    EXPECT_EQ(order_free_mean({}), 0.0);
    EXPECT_EQ(order_free_mean({0.1, 0.7, 0.2}), order_free_mean({0.7, 0.2, 0.1}));
}

TEST(Evaluation, TableFormat) {
    EvalReport r;
    r.accuracy = 1;
    r.precision = 0.5;
    r.recall = 0.25;
    r.f1 = 1.0 / 3.0;
    auto t = format_table({{"full", &r}});
    EXPECT_NE(t.find("System"), std::string::npos);
    EXPECT_NE(t.find("1.00"), std::string::npos);
    EXPECT_NE(t.find("0.33"), std::string::npos);
}

TEST(Evaluation, ParsePredictions) {
    auto p = parse_predictions("{\"id\":\"a\",\"techniques\":[\"t1132\"]}\n\n{\"id\":\"b\",\"techniques\":[]}\n");
    EXPECT_EQ(p.size(), 2u);
    EXPECT_EQ(p["a"], std::set<TechniqueId>{tid("T1132")});
    try {
        parse_predictions("{\"id\":\"a\",\"techniques\":[]}\n{\"id\":\"b\"}\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Evaluation, FeedbackRecordsOutcomes) {
    std::mt19937_64 rng(33);
    MemoryStore store({"test", 16});
    MemoryEntry e;
    e.id = "m00000001";
    e.skr.state = "s";
    e.skr.actions.emplace(tid("T1132"), "a");
    e.state_embedding = ttpx_test::dyadic_unit(rng, 16);
    e.action_embeddings.emplace(tid("T1132"), ttpx_test::dyadic_unit(rng, 16));
    e.provenance.push_back(ttpx_test::source_ref("p", "text", {tid("T1132")}));
    store.insert(e);

    std::vector<EvalSample> samples{{"a", "t", {tid("T1132")}}, {"b", "t", {tid("T1486")}}};
    auto r = score({{"a", {tid("T1132")}}, {"b", {tid("T1132")}}}, samples, false);
    auto fb = feedback_to_memory(r, {{"a", {"m00000001", "m00000001"}}, {"b", {"m00000001", "m00000009"}}}, store);
    EXPECT_EQ(fb.samples, 2u);
    EXPECT_EQ(fb.outcomes_recorded, 2u);
    EXPECT_EQ(fb.warnings.size(), 1u);
    EXPECT_EQ(store.get("m00000001")->stats, (UsageStats{2, 1}));
}
