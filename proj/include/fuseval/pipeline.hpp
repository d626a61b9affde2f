#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fuseval/experiment.hpp"
#include "fuseval/fusion.hpp"
#include "fuseval/inverted_index.hpp"
#include "fuseval/io.hpp"
#include "fuseval/leaderboard.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/rerank.hpp"
#include "fuseval/subset_search.hpp"
#include "fuseval/vector_search.hpp"

namespace fuseval {

struct PipelineResult {
    PerLanguageSelection selection;
    Leaderboard dev_board;
    std::map<std::string, double> final_by_language;
    std::map<std::string, double> final_holdout_by_language;
    std::vector<std::string> artifacts;
};

namespace detail {

template <typename Fn>
auto pipeline_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& error) {
        throw std::runtime_error(std::string("stage ") + name + ": " + error.what());
    }
}

inline std::string safe_tag(std::string tag) {
    for (char& c : tag)
        if (c == ' ' || c == '\t') c = '_';
    return tag;
}

inline std::string join_names(const std::vector<std::string>& names) {
    std::string joined;
    for (const auto& name : names) {
        if (!joined.empty()) joined += '+';
        joined += name;
    }
    return joined;
}

/// Sidecar provenance next to every artifact: producing command, stage,
/// and config hash. No timestamps, so reruns are byte-identical.
inline void write_meta(const std::string& path, const std::string& stage,
                       const std::string& hash, std::vector<std::string>& artifacts) {
    nlohmann::json meta{{"command", "pipeline"}, {"stage", stage}, {"config_hash", hash}};
    auto out = open_output(path + ".meta.json");
    out << meta.dump(2) << '\n';
    artifacts.push_back(path);
}

inline double metric_value(const Run& run, const Qrels& qrels, const MetricSpec& metric,
                           GainMode gain) {
    EvalReport report = evaluate(run, qrels, {metric}, gain);
    auto it = report.aggregates.find(metric.name());
    if (it == report.aggregates.end())
        throw std::runtime_error("metric " + metric.name() + " evaluated no queries");
    return it->second;
}

inline Run build_retriever_run(const RetrieverSpec& spec, const LanguageConfig& lang,
                               unsigned threads) {
    switch (spec.type) {
        case RetrieverType::bm25: {
            InvertedIndex index = build_index(parse_corpus(lang.corpus));
            return bm25_search_run(index, parse_queries(lang.queries),
                                   {spec.k1, spec.b}, spec.k, spec.name);
        }
        case RetrieverType::sparse:
            return sparse_search_run(parse_sparse_vectors(spec.doc_vectors),
                                     parse_sparse_vectors(spec.query_vectors), spec.k,
                                     spec.name, threads);
        case RetrieverType::dense:
            return dense_search_run(parse_dense_vectors(spec.doc_vectors),
                                    parse_dense_vectors(spec.query_vectors), spec.k,
                                    spec.similarity, spec.name, threads);
        case RetrieverType::maxsim:
            return maxsim_search_run(parse_multi_vectors(spec.doc_vectors),
                                     parse_multi_vectors(spec.query_vectors), spec.k,
                                     spec.name, threads);
    }
    throw std::logic_error("unreachable retriever type");
}

}  // namespace detail

/// Executes the full flow: retrieve (when retriever specs are given),
/// fuse the all-members hybrid, search the best subset per language,
/// sweep each reranker's depth over the best hybrid, search the final
/// reranking hybrid, and render the leaderboard. Every artifact lands
/// under the config's output_dir with a provenance sidecar.
inline PipelineResult run_pipeline(const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    const std::string hash = config_hash(config);
    const fs::path out_root(config.output_dir);
    PipelineResult result;

    std::map<std::string, std::map<std::string, Run>> candidates;
    std::map<std::string, Qrels> dev_qrels;
    std::map<std::string, Qrels> holdout_qrels;

    detail::pipeline_stage("retrieve", [&] {
        for (const auto& [language, lang] : config.languages) {
            dev_qrels[language] = parse_qrels(lang.dev_qrels);
            if (!lang.holdout_qrels.empty())
                holdout_qrels[language] = parse_qrels(lang.holdout_qrels);
            auto& named = candidates[language];
            for (const auto& [name, path] : lang.runs) {
                Run run = parse_run(path);
                run.system_tag = name;
                named[name] = std::move(run);
            }
            for (const RetrieverSpec& spec : lang.retrievers) {
                if (named.count(spec.name))
                    throw std::runtime_error("language '" + language +
                                             "': duplicate run name '" + spec.name + "'");
                Run run = detail::build_retriever_run(spec, lang, config.threads);
                std::string path =
                    (out_root / language / "runs" / (spec.name + ".trec")).string();
                write_run(run, path, detail::safe_tag(spec.name + "." + hash));
                detail::write_meta(path, "retrieve", hash, result.artifacts);
                named[spec.name] = std::move(run);
            }
        }
        return 0;
    });

    std::map<std::string, Run> hybrid_all;
    detail::pipeline_stage("fuse", [&] {
        for (const auto& [language, named] : candidates) {
            std::vector<const Run*> members;
            for (const auto& [name, run] : named) members.push_back(&run);
            FusionSpec spec;
            spec.depth = config.fusion_depth;
            spec.output_tag = detail::safe_tag("hybrid-all." + hash);
            Run hybrid = members.size() == 1 ? *members.front() : fuse(members, spec);
            hybrid.system_tag = spec.output_tag;
            std::string path = (out_root / language / "hybrid_all.trec").string();
            write_run(hybrid, path);
            detail::write_meta(path, "fuse", hash, result.artifacts);
            hybrid_all[language] = std::move(hybrid);
        }
        return 0;
    });

    std::map<std::string, std::map<std::string, const Run*>> candidate_ptrs;
    std::map<std::string, const Qrels*> dev_ptrs;
    std::map<std::string, const Qrels*> holdout_ptrs;
    for (const auto& [language, named] : candidates) {
        for (const auto& [name, run] : named) candidate_ptrs[language][name] = &run;
        dev_ptrs[language] = &dev_qrels.at(language);
        auto it = holdout_qrels.find(language);
        if (it != holdout_qrels.end()) holdout_ptrs[language] = &it->second;
    }

    detail::pipeline_stage("select", [&] {
        SelectionConfig selection;
        selection.mode = config.selection_mode;
        selection.metric = config.metric;
        selection.gain = config.gain;
        selection.fusion_depth = config.fusion_depth;
        selection.global = config.global_selection;
        selection.threads = config.threads;
        result.selection =
            per_language_selection(candidate_ptrs, dev_ptrs, selection, holdout_ptrs);

        nlohmann::json doc;
        doc["metric"] = config.metric.name();
        doc["macro_dev"] = result.selection.macro_value;
        if (result.selection.macro_holdout)
            doc["macro_holdout"] = *result.selection.macro_holdout;
        doc["membership"] = result.selection.membership;
        doc["warnings"] = result.selection.warnings;
        for (const auto& [language, chosen] : result.selection.by_language) {
            nlohmann::json row{{"members", chosen.members},
                               {"value", chosen.value},
                               {"mode", chosen.mode}};
            auto held = result.selection.holdout_by_language.find(language);
            if (held != result.selection.holdout_by_language.end())
                row["holdout_value"] = held->second;
            doc["languages"][language] = std::move(row);
        }
        std::string path = (out_root / "selection.json").string();
        auto out = detail::open_output(path);
        out << doc.dump(2) << '\n';
        detail::write_meta(path, "select", hash, result.artifacts);

        for (auto& [language, chosen] : result.selection.by_language) {
            chosen.fused.system_tag = detail::safe_tag(
                "hybrid-best[" + detail::join_names(chosen.members) + "]." + hash);
            std::string run_path = (out_root / language / "hybrid_best.trec").string();
            write_run(chosen.fused, run_path);
            detail::write_meta(run_path, "select", hash, result.artifacts);
        }
        return 0;
    });

    std::map<std::string, std::map<std::string, Run>> reranked;
    detail::pipeline_stage("rerank", [&] {
        for (const auto& [language, chosen] : result.selection.by_language) {
            const LanguageConfig& lang = config.languages.at(language);
            if (lang.rerankers.empty()) continue;
            nlohmann::json sweeps;
            for (const auto& [name, score_path] : lang.rerankers) {
                ScoreFile scores = parse_scorefile(score_path);
                DepthSweepResult sweep =
                    sweep_depth(chosen.fused, scores, dev_qrels.at(language),
                                config.rerank_depths, config.metric, config.gain);
                Run run = std::move(sweep.run);
                run.system_tag = detail::safe_tag(
                    "rr-" + name + "@" + std::to_string(sweep.best_depth) + "." + hash);
                std::string path =
                    (out_root / language / ("rerank_" + name + ".trec")).string();
                write_run(run, path);
                detail::write_meta(path, "rerank", hash, result.artifacts);
                nlohmann::json row{{"best_depth", sweep.best_depth}};
                for (const auto& [depth, value] : sweep.value_by_depth)
                    row["values"][std::to_string(depth)] = value;
                sweeps[name] = std::move(row);
                reranked[language]["rr-" + name] = std::move(run);
            }
            std::string path = (out_root / language / "rerank_sweeps.json").string();
            auto out = detail::open_output(path);
            out << sweeps.dump(2) << '\n';
            detail::write_meta(path, "rerank", hash, result.artifacts);
        }
        return 0;
    });

    std::map<std::string, Run> final_runs;
    detail::pipeline_stage("final", [&] {
        for (const auto& [language, chosen] : result.selection.by_language) {
            std::map<std::string, const Run*> finalists;
            finalists["hybrid-best"] = &chosen.fused;
            auto it = reranked.find(language);
            if (it != reranked.end())
                for (const auto& [name, run] : it->second) finalists[name] = &run;

            Run final_run;
            if (finalists.size() == 1) {
                final_run = chosen.fused;
            } else {
                SubsetResult best = exhaustive_best_subset(
                    finalists, dev_qrels.at(language), config.metric, config.gain,
                    config.fusion_depth, config.threads);
                final_run = std::move(best.fused);
                final_run.system_tag = detail::safe_tag(
                    "final[" + detail::join_names(best.members) + "]." + hash);
            }
            std::string path = (out_root / language / "final.trec").string();
            write_run(final_run, path);
            detail::write_meta(path, "final", hash, result.artifacts);

            std::vector<MetricSpec> metrics{config.metric,
                                            {MetricKind::judged, config.metric.k},
                                            {MetricKind::recall, 100}};
            EvalReport report =
                evaluate(final_run, dev_qrels.at(language), metrics, config.gain);
            std::string eval_path = (out_root / language / "final_eval.json").string();
            write_report_json(report, eval_path);
            detail::write_meta(eval_path, "final", hash, result.artifacts);
            result.final_by_language[language] =
                report.aggregates.at(config.metric.name());

            auto held = holdout_qrels.find(language);
            if (held != holdout_qrels.end()) {
                EvalReport holdout_report =
                    evaluate(final_run, held->second, metrics, config.gain);
                std::string holdout_path =
                    (out_root / language / "final_holdout_eval.json").string();
                write_report_json(holdout_report, holdout_path);
                detail::write_meta(holdout_path, "final", hash, result.artifacts);
                result.final_holdout_by_language[language] =
                    holdout_report.aggregates.at(config.metric.name());
            }
            final_runs[language] = std::move(final_run);
        }
        return 0;
    });

    detail::pipeline_stage("leaderboard", [&] {
        std::map<std::string, std::map<std::string, double>> values;
        for (const auto& [language, named] : candidates) {
            if (!result.selection.by_language.count(language)) continue;
            const Qrels& qrels = dev_qrels.at(language);
            for (const auto& [name, run] : named)
                values[name][language] =
                    detail::metric_value(run, qrels, config.metric, config.gain);
            values["hybrid-all"][language] = detail::metric_value(
                hybrid_all.at(language), qrels, config.metric, config.gain);
            values["hybrid-best"][language] = result.selection.by_language.at(language).value;
            auto it = reranked.find(language);
            if (it != reranked.end())
                for (const auto& [name, run] : it->second)
                    values[name][language] =
                        detail::metric_value(run, qrels, config.metric, config.gain);
            values["final"][language] = result.final_by_language.at(language);
        }
        result.dev_board = make_leaderboard(values, config.metric.name());
        std::string path = (out_root / "leaderboard.txt").string();
        auto out = detail::open_output(path);
        out << render_leaderboard(result.dev_board);
        if (!result.final_holdout_by_language.empty()) {
            std::map<std::string, std::map<std::string, double>> holdout_values;
            for (const auto& [language, value] : result.final_holdout_by_language)
                holdout_values["final"][language] = value;
            out << "\n# held-out split\n"
                << render_leaderboard(make_leaderboard(holdout_values, config.metric.name()));
        }
        detail::write_meta(path, "leaderboard", hash, result.artifacts);
        return 0;
    });

    return result;
}

}  // namespace fuseval
