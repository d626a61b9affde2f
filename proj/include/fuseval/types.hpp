#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fuseval {

using QueryId = std::string;
using DocId = std::string;

struct ScoredDoc {
    DocId doc_id;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Ranking order used throughout: score descending, doc_id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

using Ranking = std::vector<ScoredDoc>;

inline void sort_ranking(Ranking& ranking) {
    std::sort(ranking.begin(), ranking.end(), ranks_before);
}

/// One retrieval system's scored document lists per query.
/// Invariants: within a query doc_ids are unique, entries are sorted by
/// (score desc, doc_id asc), and every score is finite.
struct Run {
    std::string system_tag;
    std::string language;  // empty when unset
    std::map<QueryId, Ranking> entries;

    friend bool operator==(const Run&, const Run&) = default;
};

/// Graded relevance judgments. Grades are integers >= 0; grade 0 means
/// judged non-relevant.
struct Qrels {
    std::map<QueryId, std::map<DocId, int>> judgments;
    std::string language;

    friend bool operator==(const Qrels&, const Qrels&) = default;
};

struct Document {
    std::string title;
    std::string body;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
    std::map<DocId, Document> docs;
};

struct QuerySet {
    std::map<QueryId, std::string> queries;
};

/// Term-weight vectors keyed by doc or query id. Weights are strictly
/// positive; the term space is arbitrary text tokens.
struct SparseVectorSet {
    std::map<std::string, std::map<std::string, double>> vectors;
};

/// Fixed-length vectors keyed by id. All vectors have length dim.
struct DenseVectorSet {
    std::map<std::string, std::vector<double>> vectors;
    std::size_t dim = 0;
};

/// Per-token vector sequences keyed by id, for late-interaction scoring.
/// A record may hold zero tokens; every token vector has length dim.
struct MultiVectorSet {
    std::map<std::string, std::vector<std::vector<double>>> vectors;
    std::size_t dim = 0;
};

/// Precomputed (query, doc) -> score table, e.g. reranker outputs.
struct ScoreFile {
    std::map<QueryId, std::map<DocId, double>> scores;

    const double* find(const QueryId& query, const DocId& doc) const {
        auto q = scores.find(query);
        if (q == scores.end()) return nullptr;
        auto d = q->second.find(doc);
        if (d == q->second.end()) return nullptr;
        return &d->second;
    }
};

}  // namespace fuseval
