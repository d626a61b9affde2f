#include <gtest/gtest.h>

#include "fuseval/fusion.hpp"

#include "test_util.hpp"

using namespace fuseval;
using testutil::make_run;

namespace {

std::vector<DocId> order_of(const Ranking& ranking) {
    std::vector<DocId> docs;
    for (const auto& entry : ranking) docs.push_back(entry.doc_id);
    return docs;
}

}  // namespace

TEST(MinMaxNormalize, MapsRangeToUnitInterval) {
    Ranking ranking{{"d1", 10.0}, {"d2", 5.0}, {"d3", 0.0}};
    min_max_normalize(ranking);
    EXPECT_DOUBLE_EQ(ranking[0].score, 1.0);
    EXPECT_DOUBLE_EQ(ranking[1].score, 0.5);
    EXPECT_DOUBLE_EQ(ranking[2].score, 0.0);
}

TEST(MinMaxNormalize, DegenerateRangeMapsToOne) {
    Ranking ranking{{"d1", 7.0}, {"d2", 7.0}};
    min_max_normalize(ranking);
    EXPECT_DOUBLE_EQ(ranking[0].score, 1.0);
    EXPECT_DOUBLE_EQ(ranking[1].score, 1.0);

    Ranking single{{"d1", -3.0}};
    min_max_normalize(single);
    EXPECT_DOUBLE_EQ(single[0].score, 1.0);
}

TEST(MinMaxNormalize, PositiveAffineInvariance) {
    Ranking a{{"d1", 1.0}, {"d2", 4.0}, {"d3", 2.5}};
    Ranking b = a;
    for (auto& entry : b) entry.score = 2.0 * entry.score + 3.0;
    min_max_normalize(a);
    min_max_normalize(b);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NEAR(a[i].score, b[i].score, 1e-12);
}

TEST(Fuse, HandWorkedTwoMemberExample) {
    fuseval::Run a = make_run("a", {{"q", {{"d1", 10.0}, {"d2", 0.0}}}});
    fuseval::Run b = make_run("b", {{"q", {{"d2", 4.0}, {"d3", 2.0}, {"d1", 0.0}}}});
    fuseval::Run fused = fuse({a, b});
    const Ranking& ranking = fused.entries.at("q");
    ASSERT_EQ(ranking.size(), 3u);
    EXPECT_EQ(ranking[0].doc_id, "d1");
    EXPECT_DOUBLE_EQ(ranking[0].score, 1.0);
    EXPECT_EQ(ranking[1].doc_id, "d2");
    EXPECT_DOUBLE_EQ(ranking[1].score, 1.0);
    EXPECT_EQ(ranking[2].doc_id, "d3");
    EXPECT_DOUBLE_EQ(ranking[2].score, 0.5);
}

TEST(Fuse, SingleMemberPreservesRanking) {
    fuseval::Run a = make_run("a", {{"q1", {{"d1", 12.0}, {"d2", 7.0}, {"d3", -1.0}}}});
    fuseval::Run fused = fuse({a});
    EXPECT_EQ(order_of(fused.entries.at("q1")), order_of(a.entries.at("q1")));
}

TEST(Fuse, QueriesAreTheUnionAcrossMembers) {
    fuseval::Run a = make_run("a", {{"q1", {{"d1", 1.0}}}});
    fuseval::Run b = make_run("b", {{"q1", {{"d2", 1.0}}}, {"q2", {{"d3", 1.0}}}});
    fuseval::Run fused = fuse({a, b});
    EXPECT_EQ(fused.entries.size(), 2u);
    EXPECT_TRUE(fused.entries.count("q1"));
    EXPECT_TRUE(fused.entries.count("q2"));
}

TEST(Fuse, NoSharedQueriesAcrossMembersIsAnError) {
    fuseval::Run a = make_run("a", {{"q1", {{"d1", 1.0}}}});
    fuseval::Run b = make_run("b", {{"q2", {{"d2", 1.0}}}});
    EXPECT_THROW(fuse({a, b}), std::invalid_argument);
    EXPECT_THROW(fuse(std::vector<const fuseval::Run*>{}), std::invalid_argument);
}

TEST(Fuse, WeightsScaleMemberVotes) {
    fuseval::Run a = make_run("a", {{"q", {{"d1", 1.0}, {"d2", 0.0}}}});
    fuseval::Run b = make_run("b", {{"q", {{"d2", 1.0}, {"d1", 0.0}}}});
    FusionSpec spec;
    spec.weights = {2.0, 1.0};
    fuseval::Run fused = fuse({a, b}, spec);
    const Ranking& ranking = fused.entries.at("q");
    EXPECT_EQ(ranking[0].doc_id, "d1");
    EXPECT_DOUBLE_EQ(ranking[0].score, 2.0);
    EXPECT_DOUBLE_EQ(ranking[1].score, 1.0);

    spec.weights = {1.0};
    EXPECT_THROW(fuse({a, b}, spec), std::invalid_argument);
}

TEST(Fuse, OutputDepthTruncatesPerQuery) {
    fuseval::Run a = make_run("a", {{"q", {{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}}}});
    FusionSpec spec;
    spec.depth = 2;
    fuseval::Run fused = fuse({a}, spec);
    EXPECT_EQ(fused.entries.at("q").size(), 2u);
}

TEST(Fuse, MissingDocContributesZero) {
    fuseval::Run a = make_run("a", {{"q", {{"d1", 5.0}, {"d2", 1.0}}}});
    fuseval::Run b = make_run("b", {{"q", {{"d2", 9.0}}}});
    fuseval::Run fused = fuse({a, b});
    const Ranking& ranking = fused.entries.at("q");
    EXPECT_DOUBLE_EQ(ranking[0].score, 1.0);
    EXPECT_DOUBLE_EQ(ranking[1].score, 1.0);
    EXPECT_EQ(ranking[0].doc_id, "d1");
    EXPECT_EQ(ranking[1].doc_id, "d2");
}

TEST(Fuse, ScoresBoundedBySumOfWeights) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        fuseval::Run a = testutil::random_run(rng, 3, 10, "a");
        fuseval::Run b = testutil::random_run(rng, 3, 10, "b");
        fuseval::Run c = testutil::random_run(rng, 3, 10, "c");
        fuseval::Run fused = fuse({a, b, c});
        for (const auto& [query, ranking] : fused.entries)
            for (const auto& entry : ranking) {
                EXPECT_GE(entry.score, 0.0);
                EXPECT_LE(entry.score, 3.0 + 1e-12);
            }
    }
}

TEST(Fuse, RankingInvariantUnderMemberAffineTransforms) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 20; ++i) {
        fuseval::Run a = testutil::random_run(rng, 3, 12, "a");
        fuseval::Run b = testutil::random_run(rng, 3, 12, "b");
        fuseval::Run scaled = a;
        for (auto& [query, ranking] : scaled.entries)
            for (auto& entry : ranking) entry.score = 5.5 * entry.score + 100.0;
        fuseval::Run fused_raw = fuse({a, b});
        fuseval::Run fused_scaled = fuse({scaled, b});
        for (const auto& [query, ranking] : fused_raw.entries)
            EXPECT_EQ(order_of(ranking), order_of(fused_scaled.entries.at(query)));
    }
}
