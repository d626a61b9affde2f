#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/fusion.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

namespace detail {

/// Min-max to [0,1] over raw values, then affine into [lo, lo+scale].
/// A degenerate range maps everything to the top of the band.
inline void band_scores(Ranking& ranking, double lo, double scale) {
    min_max_normalize(ranking);
    for (auto& entry : ranking) entry.score = lo + scale * entry.score;
}

}  // namespace detail

/// Reorders each query's top-`depth` docs by reranker score. Head docs
/// without a score drop below all scored head docs, keeping their
/// first-stage order; docs beyond the depth keep first-stage order below
/// the whole head. Output scores land in [1,2] for the head and [0,0.99]
/// for the tail so reranked runs stay fusible with first-stage runs.
inline Run apply_reranker(const Run& first_stage, const ScoreFile& scores,
                          std::size_t depth) {
    if (depth < 1) throw std::invalid_argument("apply_reranker: depth < 1");
    Run reranked;
    reranked.system_tag = first_stage.system_tag;
    for (const auto& [query, ranking] : first_stage.entries) {
        std::size_t head_size = std::min(depth, ranking.size());

        Ranking head;
        std::vector<const ScoredDoc*> unscored;
        double min_scored = 0.0;
        bool any_scored = false;
        for (std::size_t i = 0; i < head_size; ++i) {
            const double* score = scores.find(query, ranking[i].doc_id);
            if (score) {
                head.push_back({ranking[i].doc_id, *score});
                min_scored = any_scored ? std::min(min_scored, *score) : *score;
                any_scored = true;
            } else {
                unscored.push_back(&ranking[i]);
            }
        }
        if (!any_scored)
            throw std::runtime_error(
                "apply_reranker: no reranker score for any top-" +
                std::to_string(depth) + " doc of query " + query);
        for (std::size_t i = 0; i < unscored.size(); ++i)
            head.push_back({unscored[i]->doc_id,
                            min_scored - 1.0 - static_cast<double>(i)});
        detail::band_scores(head, 1.0, 1.0);

        Ranking tail(ranking.begin() + static_cast<std::ptrdiff_t>(head_size),
                     ranking.end());
        detail::band_scores(tail, 0.0, 0.99);

        Ranking merged = std::move(head);
        merged.insert(merged.end(), tail.begin(), tail.end());
        sort_ranking(merged);
        reranked.entries[query] = std::move(merged);
    }
    return reranked;
}

struct DepthSweepResult {
    std::size_t best_depth = 0;
    Run run;
    EvalReport report;
    std::map<std::size_t, double> value_by_depth;
};

/// Applies the reranker at each depth, evaluates on dev qrels, and keeps
/// the depth that maximizes the metric. Ties go to the smallest depth.
inline DepthSweepResult sweep_depth(const Run& first_stage, const ScoreFile& scores,
                                    const Qrels& qrels,
                                    const std::vector<std::size_t>& depths,
                                    const MetricSpec& metric,
                                    GainMode gain = GainMode::linear) {
    if (depths.empty()) throw std::invalid_argument("sweep_depth: no depths");
    std::vector<std::size_t> ordered = depths;
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    DepthSweepResult result;
    bool have_best = false;
    double best_value = 0.0;
    for (std::size_t depth : ordered) {
        Run run = apply_reranker(first_stage, scores, depth);
        EvalReport report = evaluate(run, qrels, {metric}, gain);
        auto it = report.aggregates.find(metric.name());
        if (it == report.aggregates.end())
            throw std::runtime_error("sweep_depth: metric " + metric.name() +
                                     " evaluated no queries");
        double value = it->second;
        result.value_by_depth[depth] = value;
        if (!have_best || value > best_value) {
            have_best = true;
            best_value = value;
            result.best_depth = depth;
            result.run = std::move(run);
            result.report = std::move(report);
        }
    }
    return result;
}

}  // namespace fuseval
