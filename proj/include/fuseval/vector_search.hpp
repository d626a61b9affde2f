#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/parallel.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

/// Dot product over shared terms of two sparse term-weight vectors.
inline double sparse_dot(const std::map<std::string, double>& a,
                         const std::map<std::string, double>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    double total = 0.0;
    for (const auto& [term, weight] : small) {
        auto it = large.find(term);
        if (it != large.end()) total += weight * it->second;
    }
    return total;
}

/// Top-k docs by sparse dot product. Docs sharing no term with the query
/// are omitted rather than reported with score 0.
inline Ranking sparse_search(const SparseVectorSet& docs,
                             const std::map<std::string, double>& query,
                             std::size_t k) {
    if (k < 1) throw std::invalid_argument("sparse_search: k < 1");
    Ranking ranking;
    for (const auto& [doc_id, vec] : docs.vectors) {
        bool overlap = false;
        for (const auto& [term, weight] : query) {
            if (vec.count(term)) {
                overlap = true;
                break;
            }
        }
        if (!overlap) continue;
        ranking.push_back({doc_id, sparse_dot(query, vec)});
    }
    sort_ranking(ranking);
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

enum class Similarity { dot, cosine };

inline Similarity parse_similarity(const std::string& name) {
    if (name == "dot") return Similarity::dot;
    if (name == "cosine") return Similarity::cosine;
    throw std::invalid_argument("unknown similarity: " + name);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
    return total;
}

/// Exhaustive exact top-k over dense vectors. Cosine of a zero-norm
/// vector is defined as 0.
inline Ranking dense_search(const DenseVectorSet& docs, const std::vector<double>& query,
                            std::size_t k, Similarity similarity = Similarity::dot) {
    if (k < 1) throw std::invalid_argument("dense_search: k < 1");
    if (!docs.vectors.empty() && query.size() != docs.dim)
        throw std::invalid_argument("dense_search: query dim " +
                                    std::to_string(query.size()) + " != doc dim " +
                                    std::to_string(docs.dim));
    double query_norm = std::sqrt(dot(query, query));
    Ranking ranking;
    ranking.reserve(docs.vectors.size());
    for (const auto& [doc_id, vec] : docs.vectors) {
        double score = dot(query, vec);
        if (similarity == Similarity::cosine) {
            double doc_norm = std::sqrt(dot(vec, vec));
            double denom = query_norm * doc_norm;
            score = denom > 0.0 ? score / denom : 0.0;
        }
        ranking.push_back({doc_id, score});
    }
    sort_ranking(ranking);
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

/// Late-interaction score: for each query token take the best-matching doc
/// token by dot product, then sum over query tokens. A doc with no tokens
/// scores 0.
inline double maxsim_score(const std::vector<std::vector<double>>& query_tokens,
                           const std::vector<std::vector<double>>& doc_tokens) {
    double total = 0.0;
    for (const auto& q : query_tokens) {
        double best = 0.0;
        bool first = true;
        for (const auto& d : doc_tokens) {
            double s = dot(q, d);
            if (first || s > best) {
                best = s;
                first = false;
            }
        }
        if (!first) total += best;
    }
    return total;
}

inline Ranking maxsim_search(const MultiVectorSet& docs,
                             const std::vector<std::vector<double>>& query_tokens,
                             std::size_t k) {
    if (k < 1) throw std::invalid_argument("maxsim_search: k < 1");
    for (const auto& q : query_tokens)
        if (docs.dim != 0 && q.size() != docs.dim)
            throw std::invalid_argument("maxsim_search: query token dim " +
                                        std::to_string(q.size()) + " != doc dim " +
                                        std::to_string(docs.dim));
    Ranking ranking;
    ranking.reserve(docs.vectors.size());
    for (const auto& [doc_id, tokens] : docs.vectors)
        ranking.push_back({doc_id, maxsim_score(query_tokens, tokens)});
    sort_ranking(ranking);
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

namespace detail {

/// Runs one search per query id on `threads` workers and assembles a Run.
/// Results are keyed by query id, so the outcome is thread-count
/// independent.
template <typename SearchFn>
Run batch_search(const std::vector<QueryId>& ids, const std::string& tag,
                 unsigned threads, SearchFn&& search) {
    std::vector<Ranking> results(ids.size());
    parallel_for(ids.size(), threads, [&](std::size_t i) { results[i] = search(ids[i]); });
    Run run;
    run.system_tag = tag;
    for (std::size_t i = 0; i < ids.size(); ++i)
        run.entries[ids[i]] = std::move(results[i]);
    return run;
}

}  // namespace detail

inline Run sparse_search_run(const SparseVectorSet& docs, const SparseVectorSet& queries,
                             std::size_t k, const std::string& tag = "sparse",
                             unsigned threads = 1) {
    std::vector<QueryId> ids;
    for (const auto& [id, vec] : queries.vectors) ids.push_back(id);
    return detail::batch_search(ids, tag, threads, [&](const QueryId& id) {
        return sparse_search(docs, queries.vectors.at(id), k);
    });
}

inline Run dense_search_run(const DenseVectorSet& docs, const DenseVectorSet& queries,
                            std::size_t k, Similarity similarity = Similarity::dot,
                            const std::string& tag = "dense", unsigned threads = 1) {
    std::vector<QueryId> ids;
    for (const auto& [id, vec] : queries.vectors) ids.push_back(id);
    return detail::batch_search(ids, tag, threads, [&](const QueryId& id) {
        return dense_search(docs, queries.vectors.at(id), k, similarity);
    });
}

inline Run maxsim_search_run(const MultiVectorSet& docs, const MultiVectorSet& queries,
                             std::size_t k, const std::string& tag = "maxsim",
                             unsigned threads = 1) {
    std::vector<QueryId> ids;
    for (const auto& [id, vec] : queries.vectors) ids.push_back(id);
    return detail::batch_search(ids, tag, threads, [&](const QueryId& id) {
        return maxsim_search(docs, queries.vectors.at(id), k);
    });
}

}  // namespace fuseval
