#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/types.hpp"

namespace fuseval {

/// Rescales one query's scores to [0, 1] by min-max. A degenerate range
/// (all scores equal, or a single doc) maps every score to 1.0.
inline void min_max_normalize(Ranking& ranking) {
    if (ranking.empty()) return;
    double lo = ranking.front().score;
    double hi = ranking.front().score;
    for (const auto& entry : ranking) {
        lo = std::min(lo, entry.score);
        hi = std::max(hi, entry.score);
    }
    double range = hi - lo;
    for (auto& entry : ranking)
        entry.score = range > 0.0 ? (entry.score - lo) / range : 1.0;
}

struct FusionSpec {
    std::vector<double> weights;  ///< one per member; empty means all 1.0
    std::string output_tag = "fused";
    std::size_t depth = 1000;
};

/// Min-max normalized weighted sum fusion. Queries are the union across
/// members; a doc absent from a member contributes 0 from that member.
/// With two or more members, at least one query must appear in at least
/// two of them, otherwise the inputs are considered mismatched.
inline Run fuse(const std::vector<const Run*>& members, const FusionSpec& spec = {}) {
    if (members.empty()) throw std::invalid_argument("fuse: no member runs");
    for (const Run* member : members)
        if (!member) throw std::invalid_argument("fuse: null member run");
    std::vector<double> weights = spec.weights;
    if (weights.empty()) weights.assign(members.size(), 1.0);
    if (weights.size() != members.size())
        throw std::invalid_argument("fuse: expected " + std::to_string(members.size()) +
                                    " weights, got " + std::to_string(weights.size()));

    std::set<QueryId> queries;
    for (const Run* member : members)
        for (const auto& [query, ranking] : member->entries) queries.insert(query);

    if (members.size() >= 2) {
        bool overlap = false;
        for (const auto& query : queries) {
            std::size_t holders = 0;
            for (const Run* member : members)
                if (member->entries.count(query)) ++holders;
            if (holders >= 2) {
                overlap = true;
                break;
            }
        }
        if (!overlap)
            throw std::invalid_argument(
                "fuse: no query is shared by two or more member runs");
    }

    Run fused;
    fused.system_tag = spec.output_tag;
    for (const auto& query : queries) {
        std::map<DocId, double> combined;
        for (std::size_t m = 0; m < members.size(); ++m) {
            auto it = members[m]->entries.find(query);
            if (it == members[m]->entries.end()) continue;
            Ranking normalized = it->second;
            min_max_normalize(normalized);
            for (const auto& entry : normalized)
                combined[entry.doc_id] += weights[m] * entry.score;
        }
        Ranking ranking;
        ranking.reserve(combined.size());
        for (const auto& [doc, score] : combined) ranking.push_back({doc, score});
        sort_ranking(ranking);
        if (ranking.size() > spec.depth) ranking.resize(spec.depth);
        fused.entries[query] = std::move(ranking);
    }
    return fused;
}

inline Run fuse(const std::vector<Run>& members, const FusionSpec& spec = {}) {
    std::vector<const Run*> ptrs;
    ptrs.reserve(members.size());
    for (const Run& member : members) ptrs.push_back(&member);
    return fuse(ptrs, spec);
}

}  // namespace fuseval
