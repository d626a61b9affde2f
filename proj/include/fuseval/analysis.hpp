#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/io.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

struct JudgedProfileRow {
    std::string name;
    double judged = 0.0;
    double ndcg = 0.0;
    double recall = 0.0;
    std::size_t n_queries = 0;
};

/// Per run: mean judged@k next to nDCG@k and recall@recall_k, so coverage
/// and quality can move in opposite directions visibly.
inline std::vector<JudgedProfileRow> judged_profile(
    const std::map<std::string, const Run*>& runs, const Qrels& qrels, std::size_t k,
    std::size_t recall_k = 100, GainMode gain = GainMode::linear) {
    if (runs.empty()) throw std::invalid_argument("judged_profile: no runs");
    std::vector<JudgedProfileRow> rows;
    for (const auto& [name, run] : runs) {
        std::vector<MetricSpec> metrics{{MetricKind::judged, k},
                                        {MetricKind::ndcg, k},
                                        {MetricKind::recall, recall_k}};
        EvalReport report = evaluate(*run, qrels, metrics, gain);
        JudgedProfileRow row;
        row.name = name;
        row.n_queries = report.n_queries_evaluated;
        auto pick = [&](const MetricSpec& metric) {
            auto it = report.aggregates.find(metric.name());
            return it == report.aggregates.end() ? 0.0 : it->second;
        };
        row.judged = pick(metrics[0]);
        row.ndcg = pick(metrics[1]);
        row.recall = pick(metrics[2]);
        rows.push_back(std::move(row));
    }
    return rows;
}

enum class Top1Class { judged_positive, known_negative, unjudged };

struct UnjudgedEntry {
    DocId doc_id;
    std::size_t rank = 0;  ///< 1-based rank in the source run
    double score = 0.0;
};

struct UnjudgedReport {
    std::size_t n_top = 0;
    /// Queries with at least one unjudged doc in their top-n_top.
    std::map<QueryId, std::vector<UnjudgedEntry>> unjudged;
    std::map<QueryId, Top1Class> top1;
    std::size_t n_top1_positive = 0;
    std::size_t n_top1_negative = 0;
    std::size_t n_top1_unjudged = 0;
};

/// Classifies each query's top-1 doc (judged positive / known negative /
/// unjudged) and lists every unjudged doc in the top-n_top. Queries are
/// those present in both the run and the qrels.
inline UnjudgedReport extract_unjudged_top(const Run& run, const Qrels& qrels,
                                           std::size_t n_top) {
    if (n_top < 1) throw std::invalid_argument("extract_unjudged_top: n_top < 1");
    UnjudgedReport report;
    report.n_top = n_top;
    for (const auto& [query, judgments] : qrels.judgments) {
        auto it = run.entries.find(query);
        if (it == run.entries.end()) continue;
        const Ranking& ranking = it->second;
        if (ranking.empty()) continue;

        auto top1 = judgments.find(ranking.front().doc_id);
        Top1Class cls = top1 == judgments.end() ? Top1Class::unjudged
                        : top1->second > 0     ? Top1Class::judged_positive
                                               : Top1Class::known_negative;
        report.top1[query] = cls;
        switch (cls) {
            case Top1Class::judged_positive: ++report.n_top1_positive; break;
            case Top1Class::known_negative: ++report.n_top1_negative; break;
            case Top1Class::unjudged: ++report.n_top1_unjudged; break;
        }

        std::size_t depth = std::min(n_top, ranking.size());
        for (std::size_t i = 0; i < depth; ++i) {
            if (judgments.count(ranking[i].doc_id)) continue;
            report.unjudged[query].push_back(
                {ranking[i].doc_id, i + 1, ranking[i].score});
        }
    }
    return report;
}

enum class Presence { present, absent, query_absent };

struct AnnotatedUnjudged {
    UnjudgedEntry entry;
    Presence presence = Presence::absent;
};

struct CrossRunReport {
    std::size_t depth = 0;
    std::map<QueryId, std::vector<AnnotatedUnjudged>> entries;
    std::size_t n_present = 0;
    std::size_t n_absent = 0;
    std::size_t n_query_absent = 0;
};

/// Flags every unjudged (query, doc) as present or absent in the reference
/// run's top-depth; queries the reference never ran are flagged apart.
inline CrossRunReport cross_run_presence(const UnjudgedReport& report,
                                         const Run& reference, std::size_t depth) {
    if (depth < 1) throw std::invalid_argument("cross_run_presence: depth < 1");
    CrossRunReport annotated;
    annotated.depth = depth;
    for (const auto& [query, entries] : report.unjudged) {
        auto it = reference.entries.find(query);
        for (const auto& entry : entries) {
            AnnotatedUnjudged row{entry, Presence::absent};
            if (it == reference.entries.end()) {
                row.presence = Presence::query_absent;
                ++annotated.n_query_absent;
            } else {
                const Ranking& ranking = it->second;
                std::size_t scan = std::min(depth, ranking.size());
                for (std::size_t i = 0; i < scan; ++i) {
                    if (ranking[i].doc_id == entry.doc_id) {
                        row.presence = Presence::present;
                        break;
                    }
                }
                if (row.presence == Presence::present)
                    ++annotated.n_present;
                else
                    ++annotated.n_absent;
            }
            annotated.entries[query].push_back(std::move(row));
        }
    }
    return annotated;
}

namespace detail {

/// First `limit` code points, cut at a UTF-8 boundary; tabs and newlines
/// become spaces so the column layout survives.
inline std::string snippet(const std::string& text, std::size_t limit) {
    std::string out;
    std::size_t points = 0;
    for (std::size_t i = 0; i < text.size() && points < limit;) {
        unsigned char byte = text[i];
        std::size_t len = byte < 0x80 ? 1 : (byte >> 5) == 0x6 ? 2 : (byte >> 4) == 0xE ? 3
                                                                 : (byte >> 3) == 0x1E ? 4 : 1;
        if (i + len > text.size()) len = 1;
        out.append(text, i, len);
        i += len;
        ++points;
    }
    for (char& c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

inline std::string tsv_field(const std::string& text) {
    std::string out = text;
    for (char& c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

}  // namespace detail

/// Writes the pooled unjudged docs as a tab-separated annotation sheet
/// with a trailing empty label column. Docs missing from the corpus get
/// empty text plus a warning.
inline void export_annotation_pool(const UnjudgedReport& report, const Corpus& corpus,
                                   const std::string& path,
                                   const QuerySet* queries = nullptr,
                                   std::vector<std::string>* warnings = nullptr) {
    auto out = detail::open_output(path);
    out << "query_id\tquery_text\tdoc_id\trank\tscore\ttitle\tsnippet\tlabel\n";
    for (const auto& [query, entries] : report.unjudged) {
        std::string query_text;
        if (queries) {
            auto it = queries->queries.find(query);
            if (it != queries->queries.end()) query_text = it->second;
        }
        for (const auto& entry : entries) {
            std::string title, body;
            auto doc = corpus.docs.find(entry.doc_id);
            if (doc == corpus.docs.end()) {
                if (warnings)
                    warnings->push_back("doc '" + entry.doc_id + "' not in corpus");
            } else {
                title = doc->second.title;
                body = doc->second.body;
            }
            out << query << '\t' << detail::tsv_field(query_text) << '\t' << entry.doc_id
                << '\t' << entry.rank << '\t' << detail::format_score(entry.score) << '\t'
                << detail::tsv_field(title) << '\t' << detail::snippet(body, 400)
                << "\t\n";
        }
    }
}

}  // namespace fuseval
