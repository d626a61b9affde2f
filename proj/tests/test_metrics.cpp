#include <cmath>

#include <gtest/gtest.h>

#include "fuseval/metrics.hpp"

#include "test_util.hpp"

using namespace fuseval;
using testutil::make_qrels;
using testutil::make_run;

TEST(ParseMetric, AcceptsNameAtK) {
    EXPECT_EQ(parse_metric("ndcg@10").kind, MetricKind::ndcg);
    EXPECT_EQ(parse_metric("ndcg@10").k, 10u);
    EXPECT_EQ(parse_metric("recall@100").kind, MetricKind::recall);
    EXPECT_EQ(parse_metric("judged@20").kind, MetricKind::judged);
    EXPECT_THROW(parse_metric("ndcg"), std::invalid_argument);
    EXPECT_THROW(parse_metric("map@10"), std::invalid_argument);
    EXPECT_THROW(parse_metric("ndcg@0"), std::invalid_argument);
    EXPECT_THROW(parse_metric("ndcg@x"), std::invalid_argument);
}

TEST(Ndcg, PerfectRankingIsOne) {
    auto judgments = std::map<DocId, int>{{"d1", 1}};
    Ranking ranking{{"d1", 9.0}};
    EXPECT_DOUBLE_EQ(ndcg_at_k(ranking, judgments, 10), 1.0);
}

TEST(Ndcg, HandWorkedTwoRelevantExample) {
    auto judgments = std::map<DocId, int>{{"d1", 1}, {"d2", 1}};
    Ranking ranking{{"d3", 4.0}, {"d1", 3.0}, {"d4", 2.0}, {"d2", 1.0}};
    double dcg = 1.0 / std::log2(3.0) + 1.0 / std::log2(5.0);
    double idcg = 1.0 + 1.0 / std::log2(3.0);
    EXPECT_NEAR(ndcg_at_k(ranking, judgments, 10), dcg / idcg, 1e-12);
    EXPECT_NEAR(ndcg_at_k(ranking, judgments, 10), 0.651, 5e-4);
}

TEST(Ndcg, NoJudgedDocsRetrievedIsZero) {
    auto judgments = std::map<DocId, int>{{"d1", 2}};
    Ranking ranking{{"d8", 2.0}, {"d9", 1.0}};
    EXPECT_DOUBLE_EQ(ndcg_at_k(ranking, judgments, 10), 0.0);
}

TEST(Ndcg, QueryWithoutRelevantDocsIsExcluded) {
    auto judgments = std::map<DocId, int>{{"d1", 0}};
    Ranking ranking{{"d1", 1.0}};
    EXPECT_LT(ndcg_at_k(ranking, judgments, 10), 0.0);
}

TEST(Ndcg, ExponentialGainWeighsHighGrades) {
    auto judgments = std::map<DocId, int>{{"d1", 3}, {"d2", 1}};
    Ranking wrong_order{{"d2", 2.0}, {"d1", 1.0}};
    double linear = ndcg_at_k(wrong_order, judgments, 10, GainMode::linear);
    double exponential = ndcg_at_k(wrong_order, judgments, 10, GainMode::exponential);
    double exp_dcg = 1.0 + 7.0 / std::log2(3.0);
    double exp_idcg = 7.0 + 1.0 / std::log2(3.0);
    EXPECT_NEAR(exponential, exp_dcg / exp_idcg, 1e-12);
    EXPECT_LT(exponential, linear);
}

TEST(Recall, CountsRelevantInTopK) {
    auto judgments = std::map<DocId, int>{{"d1", 1}, {"d2", 2}, {"d3", 0}};
    Ranking ranking{{"d1", 3.0}, {"d3", 2.0}, {"d9", 1.5}, {"d2", 1.0}};
    EXPECT_DOUBLE_EQ(recall_at_k(ranking, judgments, 2), 0.5);
    EXPECT_DOUBLE_EQ(recall_at_k(ranking, judgments, 10), 1.0);
    EXPECT_DOUBLE_EQ(recall_at_k(ranking, judgments, 100), 1.0);
    EXPECT_LT(recall_at_k(ranking, std::map<DocId, int>{{"d1", 0}}, 10), 0.0);
}

TEST(Recall, MonotoneInK) {
    auto judgments = std::map<DocId, int>{{"d1", 1}, {"d4", 1}, {"d6", 2}};
    Ranking ranking{{"d6", 6.0}, {"d2", 5.0}, {"d4", 4.0},
                    {"d3", 3.0}, {"d1", 2.0}, {"d5", 1.0}};
    double previous = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) {
        double value = recall_at_k(ranking, judgments, k);
        EXPECT_GE(value, previous);
        previous = value;
    }
}

TEST(Judged, DenominatorTruncatesToRetrieved) {
    auto judgments = std::map<DocId, int>{{"d1", 0}, {"d2", 1}, {"d3", 2}};
    Ranking five{{"d1", 5.0}, {"d2", 4.0}, {"d9", 3.0}, {"d8", 2.0}, {"d3", 1.0}};
    EXPECT_DOUBLE_EQ(judged_at_k(five, judgments, 10), 3.0 / 5.0);

    Ranking three{{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}};
    EXPECT_DOUBLE_EQ(judged_at_k(three, judgments, 10), 1.0);
    EXPECT_DOUBLE_EQ(judged_at_k({}, judgments, 10), 0.0);
}

TEST(Judged, GradeZeroCountsAsJudged) {
    auto judgments = std::map<DocId, int>{{"d1", 0}};
    Ranking ranking{{"d1", 1.0}, {"d2", 0.5}};
    EXPECT_DOUBLE_EQ(judged_at_k(ranking, judgments, 2), 0.5);
}

TEST(MacroAverage, UnweightedMean) {
    EXPECT_DOUBLE_EQ(macro_average({74.4, 94.8}), 84.6);
    EXPECT_DOUBLE_EQ(macro_average({0.5}), 0.5);
    EXPECT_THROW(macro_average({}), std::invalid_argument);
}

TEST(Evaluate, UsesIntersectionOfQuerySets) {
    fuseval::Run run = make_run("t", {{"q2", {{"d1", 2.0}, {"d2", 1.0}}},
                             {"q3", {{"d1", 1.0}}}});
    Qrels qrels = make_qrels({{"q1", {{"d1", 1}}}, {"q2", {{"d1", 1}}}});
    EvalReport report = evaluate(run, qrels, {parse_metric("ndcg@10")});
    EXPECT_EQ(report.n_queries_evaluated, 1u);
    ASSERT_EQ(report.per_query.at("ndcg@10").size(), 1u);
    EXPECT_DOUBLE_EQ(report.per_query.at("ndcg@10").at("q2"), 1.0);
    EXPECT_DOUBLE_EQ(report.aggregates.at("ndcg@10"), 1.0);
}

TEST(Evaluate, DisjointQuerySetsIsAnError) {
    fuseval::Run run = make_run("t", {{"q9", {{"d1", 1.0}}}});
    Qrels qrels = make_qrels({{"q1", {{"d1", 1}}}});
    try {
        evaluate(run, qrels, {parse_metric("ndcg@10")});
        FAIL() << "expected error";
    } catch (const std::invalid_argument& error) {
        EXPECT_NE(std::string(error.what()).find("disjoint query sets"),
                  std::string::npos);
    }
}

TEST(Evaluate, AggregateIsMeanOverEvaluatedQueries) {
    fuseval::Run run = make_run("t", {{"q1", {{"d1", 1.0}}},
                             {"q2", {{"d9", 1.0}}},
                             {"q3", {{"d1", 1.0}}}});
    Qrels qrels = make_qrels(
        {{"q1", {{"d1", 1}}}, {"q2", {{"d1", 1}}}, {"q3", {{"d1", 0}}}});
    EvalReport report =
        evaluate(run, qrels, {parse_metric("ndcg@10"), parse_metric("judged@10")});
    EXPECT_EQ(report.n_evaluated.at("ndcg@10"), 2u);
    EXPECT_DOUBLE_EQ(report.aggregates.at("ndcg@10"), 0.5);
    EXPECT_EQ(report.n_evaluated.at("judged@10"), 3u);
}

TEST(Evaluate, InvariantUnderOrderPreservingScoreTransforms) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        fuseval::Run run = testutil::random_run(rng, 4, 12);
        Qrels qrels = testutil::random_qrels(rng, 4, 12);
        fuseval::Run scaled = run;
        for (auto& [query, ranking] : scaled.entries)
            for (auto& entry : ranking) entry.score = 3.0 * entry.score + 7.0;
        std::vector<MetricSpec> metrics{parse_metric("ndcg@5"), parse_metric("recall@5"),
                                        parse_metric("judged@5")};
        EvalReport a = evaluate(run, qrels, metrics);
        EvalReport b = evaluate(scaled, qrels, metrics);
        EXPECT_EQ(a.per_query, b.per_query);
    }
}

TEST(Evaluate, ValuesAlwaysWithinUnitInterval) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 20; ++i) {
        fuseval::Run run = testutil::random_run(rng, 5, 15);
        Qrels qrels = testutil::random_qrels(rng, 5, 15);
        EvalReport report = evaluate(
            run, qrels,
            {parse_metric("ndcg@5"), parse_metric("recall@20"), parse_metric("judged@10")});
        for (const auto& [metric, rows] : report.per_query)
            for (const auto& [query, value] : rows) {
                EXPECT_GE(value, 0.0);
                EXPECT_LE(value, 1.0 + 1e-12);
            }
    }
}

TEST(Report, ExportsTsvAndJson) {
    testutil::TempDir dir;
    fuseval::Run run = make_run("t", {{"q1", {{"d1", 1.0}}}});
    Qrels qrels = make_qrels({{"q1", {{"d1", 1}}}});
    EvalReport report = evaluate(run, qrels, {parse_metric("ndcg@10")});

    auto tsv = dir.file("r.tsv");
    write_report_tsv(report, tsv);
    std::string text = testutil::read_text(tsv);
    EXPECT_NE(text.find("ndcg@10\tq1\t1.000000"), std::string::npos);
    EXPECT_NE(text.find("ndcg@10\tall\t1.000000"), std::string::npos);

    auto json_path = dir.file("r.json");
    write_report_json(report, json_path);
    auto doc = nlohmann::json::parse(testutil::read_text(json_path));
    EXPECT_DOUBLE_EQ(doc.at("aggregates").at("ndcg@10").get<double>(), 1.0);
    EXPECT_EQ(doc.at("gain").get<std::string>(), "linear");
}

TEST(Percent1, OneDecimalDisplayRounding) {
    EXPECT_EQ(percent1(0.73268), "73.3");
    EXPECT_EQ(percent1(0.501), "50.1");
    EXPECT_EQ(percent1(1.0), "100.0");
}
