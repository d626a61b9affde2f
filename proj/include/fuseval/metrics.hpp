#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fuseval/io.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

enum class GainMode { linear, exponential };

inline GainMode parse_gain_mode(const std::string& name) {
    if (name == "linear") return GainMode::linear;
    if (name == "exponential") return GainMode::exponential;
    throw std::invalid_argument("unknown gain mode: " + name);
}

inline double gain(int grade, GainMode mode) {
    if (mode == GainMode::linear) return static_cast<double>(grade);
    return std::pow(2.0, static_cast<double>(grade)) - 1.0;
}

enum class MetricKind { ndcg, recall, judged };

struct MetricSpec {
    MetricKind kind = MetricKind::ndcg;
    std::size_t k = 10;

    std::string name() const {
        const char* base = kind == MetricKind::ndcg     ? "ndcg"
                           : kind == MetricKind::recall ? "recall"
                                                        : "judged";
        return std::string(base) + "@" + std::to_string(k);
    }

    bool operator==(const MetricSpec& other) const = default;
    auto operator<=>(const MetricSpec& other) const = default;
};

/// Parses "ndcg@10", "recall@100", "judged@20".
inline MetricSpec parse_metric(const std::string& text) {
    auto at = text.find('@');
    if (at == std::string::npos)
        throw std::invalid_argument("invalid metric '" + text + "': expected name@k");
    std::string base = text.substr(0, at);
    std::string depth = text.substr(at + 1);
    MetricSpec spec;
    if (base == "ndcg")
        spec.kind = MetricKind::ndcg;
    else if (base == "recall")
        spec.kind = MetricKind::recall;
    else if (base == "judged")
        spec.kind = MetricKind::judged;
    else
        throw std::invalid_argument("unknown metric '" + base + "'");
    long k = 0;
    auto [ptr, ec] = std::from_chars(depth.data(), depth.data() + depth.size(), k);
    if (ec != std::errc() || ptr != depth.data() + depth.size() || k <= 0)
        throw std::invalid_argument("invalid metric depth '" + depth + "'");
    spec.k = static_cast<std::size_t>(k);
    return spec;
}

inline double macro_average(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("macro_average of empty set");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

namespace detail {

inline bool has_relevant(const std::map<DocId, int>& judgments) {
    for (const auto& [doc, grade] : judgments)
        if (grade > 0) return true;
    return false;
}

inline double dcg(const Ranking& ranking, const std::map<DocId, int>& judgments,
                  std::size_t k, GainMode mode) {
    double total = 0.0;
    std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto it = judgments.find(ranking[i].doc_id);
        if (it == judgments.end() || it->second <= 0) continue;
        total += gain(it->second, mode) / std::log2(static_cast<double>(i) + 2.0);
    }
    return total;
}

inline double ideal_dcg(const std::map<DocId, int>& judgments, std::size_t k,
                        GainMode mode) {
    std::vector<int> grades;
    for (const auto& [doc, grade] : judgments)
        if (grade > 0) grades.push_back(grade);
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double total = 0.0;
    std::size_t depth = std::min(k, grades.size());
    for (std::size_t i = 0; i < depth; ++i)
        total += gain(grades[i], mode) / std::log2(static_cast<double>(i) + 2.0);
    return total;
}

}  // namespace detail

/// nDCG@k for one query. Returns -1 when the query has no relevant docs
/// (such queries are excluded from aggregates).
inline double ndcg_at_k(const Ranking& ranking, const std::map<DocId, int>& judgments,
                        std::size_t k, GainMode mode = GainMode::linear) {
    if (!detail::has_relevant(judgments)) return -1.0;
    double ideal = detail::ideal_dcg(judgments, k, mode);
    return detail::dcg(ranking, judgments, k, mode) / ideal;
}

/// Recall@k for one query. Returns -1 when the query has no relevant docs.
inline double recall_at_k(const Ranking& ranking, const std::map<DocId, int>& judgments,
                          std::size_t k) {
    std::size_t relevant = 0;
    for (const auto& [doc, grade] : judgments)
        if (grade > 0) ++relevant;
    if (relevant == 0) return -1.0;
    std::size_t hits = 0;
    std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto it = judgments.find(ranking[i].doc_id);
        if (it != judgments.end() && it->second > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(relevant);
}

/// Fraction of the top-k retrieved docs that carry any judgment. The
/// denominator is min(k, retrieved); an empty ranking scores 0.
inline double judged_at_k(const Ranking& ranking, const std::map<DocId, int>& judgments,
                          std::size_t k) {
    std::size_t depth = std::min(k, ranking.size());
    if (depth == 0) return 0.0;
    std::size_t judged = 0;
    for (std::size_t i = 0; i < depth; ++i)
        if (judgments.count(ranking[i].doc_id)) ++judged;
    return static_cast<double>(judged) / static_cast<double>(depth);
}

struct EvalReport {
    /// per_query[metric_name][query_id]; queries excluded from a metric do
    /// not appear under that metric.
    std::map<std::string, std::map<QueryId, double>> per_query;
    std::map<std::string, double> aggregates;
    std::map<std::string, std::size_t> n_evaluated;
    GainMode gain_mode = GainMode::linear;
    std::size_t n_queries_evaluated = 0;
};

/// Evaluates a run against qrels over the intersection of their query
/// sets. Queries present in only one side are skipped; a fully disjoint
/// pair is an error.
inline EvalReport evaluate(const Run& run, const Qrels& qrels,
                           const std::vector<MetricSpec>& metrics,
                           GainMode mode = GainMode::linear) {
    if (metrics.empty()) throw std::invalid_argument("no metrics requested");
    EvalReport report;
    report.gain_mode = mode;
    std::size_t common = 0;
    for (const auto& [query, judgments] : qrels.judgments) {
        auto it = run.entries.find(query);
        if (it == run.entries.end()) continue;
        const Ranking& ranking = it->second;
        ++common;
        for (const auto& metric : metrics) {
            double value = 0.0;
            switch (metric.kind) {
                case MetricKind::ndcg:
                    value = ndcg_at_k(ranking, judgments, metric.k, mode);
                    break;
                case MetricKind::recall:
                    value = recall_at_k(ranking, judgments, metric.k);
                    break;
                case MetricKind::judged:
                    value = judged_at_k(ranking, judgments, metric.k);
                    break;
            }
            if (value < 0.0) continue;
            report.per_query[metric.name()][query] = value;
        }
    }
    if (common == 0)
        throw std::invalid_argument("disjoint query sets: run and qrels share no query");
    report.n_queries_evaluated = common;
    for (const auto& metric : metrics) {
        const auto& rows = report.per_query[metric.name()];
        report.n_evaluated[metric.name()] = rows.size();
        if (rows.empty()) continue;
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& [query, value] : rows) values.push_back(value);
        report.aggregates[metric.name()] = macro_average(values);
    }
    return report;
}

/// One-decimal percent rendering used in reports and tables.
inline std::string percent1(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value * 100.0);
    return buf;
}

inline void write_report_tsv(const EvalReport& report, const std::string& path) {
    auto out = detail::open_output(path);
    out << "metric\tquery\tvalue\n";
    for (const auto& [metric, rows] : report.per_query)
        for (const auto& [query, value] : rows)
            out << metric << '\t' << query << '\t' << detail::format_score(value) << '\n';
    for (const auto& [metric, value] : report.aggregates)
        out << metric << "\tall\t" << detail::format_score(value) << '\n';
}

inline nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["gain"] = report.gain_mode == GainMode::linear ? "linear" : "exponential";
    doc["n_queries_evaluated"] = report.n_queries_evaluated;
    doc["aggregates"] = report.aggregates;
    doc["n_evaluated"] = report.n_evaluated;
    doc["per_query"] = report.per_query;
    return doc;
}

inline void write_report_json(const EvalReport& report, const std::string& path) {
    auto out = detail::open_output(path);
    out << report_to_json(report).dump(2) << '\n';
}

}  // namespace fuseval
