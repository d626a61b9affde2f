#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fuseval/analyzer.hpp"
#include "fuseval/io.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

struct Posting {
    DocId doc_id;
    uint32_t tf = 0;
};

struct InvertedIndex {
    std::map<std::string, std::vector<Posting>> postings;  ///< sorted by doc_id
    std::map<DocId, uint32_t> doc_lengths;
    uint64_t total_tokens = 0;
    std::size_t doc_count = 0;

    double avg_doc_length() const {
        return doc_count ? static_cast<double>(total_tokens) / static_cast<double>(doc_count)
                         : 0.0;
    }
};

/// Indexes title and body concatenated, using the naive analyzer.
inline InvertedIndex build_index(const Corpus& corpus) {
    if (corpus.docs.empty()) throw std::invalid_argument("build_index: empty corpus");
    InvertedIndex index;
    for (const auto& [doc_id, doc] : corpus.docs) {
        auto tokens = tokenize(doc.title + " " + doc.body);
        index.doc_lengths[doc_id] = static_cast<uint32_t>(tokens.size());
        index.total_tokens += tokens.size();
        std::map<std::string, uint32_t> tfs;
        for (const auto& token : tokens) ++tfs[token];
        for (const auto& [term, tf] : tfs) index.postings[term].push_back({doc_id, tf});
    }
    index.doc_count = corpus.docs.size();
    return index;
}

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

inline double bm25_idf(std::size_t doc_count, std::size_t df) {
    double n = static_cast<double>(doc_count);
    double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

/// Scores score(d) = Σ_t idf(t) · tf·(k1+1) / (tf + k1·(1−b+b·len/avgdl))
/// over the query's tokens (repeated tokens count once per occurrence)
/// and returns the top-k by (score desc, doc_id asc).
inline Ranking bm25_search(const InvertedIndex& index, const std::string& query_text,
                           const Bm25Params& params, std::size_t k) {
    if (k < 1) throw std::invalid_argument("bm25_search: k < 1");
    if (params.k1 <= 0.0) throw std::invalid_argument("bm25_search: k1 must be positive");
    if (params.b < 0.0 || params.b > 1.0)
        throw std::invalid_argument("bm25_search: b must lie in [0, 1]");
    double avgdl = index.avg_doc_length();
    std::map<DocId, double> scores;
    for (const auto& token : tokenize(query_text)) {
        auto it = index.postings.find(token);
        if (it == index.postings.end()) continue;
        double idf = bm25_idf(index.doc_count, it->second.size());
        for (const auto& posting : it->second) {
            double len = index.doc_lengths.at(posting.doc_id);
            double norm = params.k1 * (1.0 - params.b +
                                       (avgdl > 0.0 ? params.b * len / avgdl : 0.0));
            double tf = posting.tf;
            scores[posting.doc_id] += idf * tf * (params.k1 + 1.0) / (tf + norm);
        }
    }
    Ranking ranking;
    ranking.reserve(scores.size());
    for (const auto& [doc, score] : scores) ranking.push_back({doc, score});
    sort_ranking(ranking);
    if (ranking.size() > k) ranking.resize(k);
    return ranking;
}

inline Run bm25_search_run(const InvertedIndex& index, const QuerySet& queries,
                           const Bm25Params& params, std::size_t k,
                           const std::string& tag = "bm25") {
    Run run;
    run.system_tag = tag;
    for (const auto& [query_id, text] : queries.queries)
        run.entries[query_id] = bm25_search(index, text, params, k);
    return run;
}

inline void save_index(const InvertedIndex& index, const std::string& dir) {
    nlohmann::json doc;
    doc["doc_count"] = index.doc_count;
    doc["total_tokens"] = index.total_tokens;
    doc["doc_lengths"] = index.doc_lengths;
    auto& postings = doc["postings"] = nlohmann::json::object();
    for (const auto& [term, list] : index.postings) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& posting : list)
            rows.push_back({posting.doc_id, posting.tf});
        postings[term] = std::move(rows);
    }
    auto out = detail::open_output((std::filesystem::path(dir) / "index.json").string());
    out << doc.dump() << '\n';
}

inline InvertedIndex load_index(const std::string& dir) {
    std::string path = (std::filesystem::path(dir) / "index.json").string();
    auto in = detail::open_input(path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw std::runtime_error("invalid index file: " + path);
    InvertedIndex index;
    index.doc_count = doc.at("doc_count").get<std::size_t>();
    index.total_tokens = doc.at("total_tokens").get<uint64_t>();
    index.doc_lengths = doc.at("doc_lengths").get<std::map<DocId, uint32_t>>();
    for (const auto& [term, rows] : doc.at("postings").items()) {
        auto& list = index.postings[term];
        for (const auto& row : rows)
            list.push_back({row.at(0).get<DocId>(), row.at(1).get<uint32_t>()});
    }
    return index;
}

}  // namespace fuseval
