#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/fusion.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/parallel.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

/// 2^20 - 1 fusions is the most the exhaustive mode will attempt.
inline constexpr std::size_t kExhaustiveCap = 20;

struct SubsetResult {
    std::vector<std::string> members;  ///< sorted candidate names
    double value = 0.0;
    Run fused;
    std::string metric;
    std::string mode;
};

enum class SearchMode { exhaustive, greedy, automatic };

inline SearchMode parse_search_mode(const std::string& name) {
    if (name == "exhaustive") return SearchMode::exhaustive;
    if (name == "greedy") return SearchMode::greedy;
    if (name == "auto") return SearchMode::automatic;
    throw std::invalid_argument("unknown search mode: " + name);
}

namespace detail {

inline double subset_value(const std::vector<const Run*>& members, const Qrels& qrels,
                           const MetricSpec& metric, GainMode gain,
                           std::size_t fusion_depth, Run* fused_out) {
    FusionSpec spec;
    spec.depth = fusion_depth;
    Run fused = fuse(members, spec);
    EvalReport report = evaluate(fused, qrels, {metric}, gain);
    auto it = report.aggregates.find(metric.name());
    if (it == report.aggregates.end())
        throw std::runtime_error("subset search: metric " + metric.name() +
                                 " evaluated no queries");
    if (fused_out) *fused_out = std::move(fused);
    return it->second;
}

/// Tie order: higher value, then fewer members, then lexicographically
/// smaller member list.
inline bool subset_beats(double value, const std::vector<std::string>& members,
                         double best_value, const std::vector<std::string>& best_members) {
    if (value != best_value) return value > best_value;
    if (members.size() != best_members.size()) return members.size() < best_members.size();
    return members < best_members;
}

}  // namespace detail

/// Evaluates every non-empty subset of the candidates with unweighted
/// min-max sum fusion and returns the argmax.
inline SubsetResult exhaustive_best_subset(const std::map<std::string, const Run*>& candidates,
                                           const Qrels& qrels, const MetricSpec& metric,
                                           GainMode gain = GainMode::linear,
                                           std::size_t fusion_depth = 1000,
                                           unsigned threads = 1) {
    if (candidates.empty())
        throw std::invalid_argument("exhaustive_best_subset: no candidates");
    if (candidates.size() > kExhaustiveCap)
        throw std::invalid_argument("exhaustive_best_subset: " +
                                    std::to_string(candidates.size()) + " candidates exceed the cap of " +
                                    std::to_string(kExhaustiveCap) + "; use greedy mode");
    std::vector<std::string> names;
    std::vector<const Run*> runs;
    for (const auto& [name, run] : candidates) {
        names.push_back(name);
        runs.push_back(run);
    }
    std::size_t n = names.size();
    std::size_t n_subsets = (std::size_t{1} << n) - 1;

    std::vector<double> values(n_subsets);
    parallel_for(n_subsets, threads, [&](std::size_t i) {
        std::size_t mask = i + 1;
        std::vector<const Run*> members;
        for (std::size_t bit = 0; bit < n; ++bit)
            if (mask & (std::size_t{1} << bit)) members.push_back(runs[bit]);
        values[i] = detail::subset_value(members, qrels, metric, gain, fusion_depth,
                                         nullptr);
    });

    std::size_t best_mask = 0;
    std::vector<std::string> best_members;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n_subsets; ++i) {
        std::size_t mask = i + 1;
        std::vector<std::string> members;
        for (std::size_t bit = 0; bit < n; ++bit)
            if (mask & (std::size_t{1} << bit)) members.push_back(names[bit]);
        if (best_mask == 0 ||
            detail::subset_beats(values[i], members, best_value, best_members)) {
            best_mask = mask;
            best_value = values[i];
            best_members = std::move(members);
        }
    }

    SubsetResult result;
    result.members = best_members;
    result.metric = metric.name();
    result.mode = "exhaustive";
    std::vector<const Run*> members;
    for (std::size_t bit = 0; bit < n; ++bit)
        if (best_mask & (std::size_t{1} << bit)) members.push_back(runs[bit]);
    result.value = detail::subset_value(members, qrels, metric, gain, fusion_depth,
                                        &result.fused);
    return result;
}

/// Starts from the best singleton and keeps adding the candidate that most
/// improves the metric; stops at the first round with no strict
/// improvement. Ties break by candidate name.
inline SubsetResult greedy_best_subset(const std::map<std::string, const Run*>& candidates,
                                       const Qrels& qrels, const MetricSpec& metric,
                                       GainMode gain = GainMode::linear,
                                       std::size_t fusion_depth = 1000) {
    if (candidates.empty())
        throw std::invalid_argument("greedy_best_subset: no candidates");

    std::vector<std::string> chosen;
    double chosen_value = 0.0;
    auto evaluate_set = [&](const std::vector<std::string>& names, Run* fused_out) {
        std::vector<const Run*> members;
        for (const auto& name : names) members.push_back(candidates.at(name));
        return detail::subset_value(members, qrels, metric, gain, fusion_depth, fused_out);
    };

    for (const auto& [name, run] : candidates) {
        double value = evaluate_set({name}, nullptr);
        if (chosen.empty() || value > chosen_value) {
            chosen = {name};
            chosen_value = value;
        }
    }

    while (chosen.size() < candidates.size()) {
        std::string best_addition;
        double best_value = chosen_value;
        for (const auto& [name, run] : candidates) {
            if (std::find(chosen.begin(), chosen.end(), name) != chosen.end()) continue;
            std::vector<std::string> trial = chosen;
            trial.push_back(name);
            double value = evaluate_set(trial, nullptr);
            if (value > best_value) {
                best_value = value;
                best_addition = name;
            }
        }
        if (best_addition.empty()) break;
        chosen.push_back(best_addition);
        chosen_value = best_value;
    }

    std::sort(chosen.begin(), chosen.end());
    SubsetResult result;
    result.members = chosen;
    result.metric = metric.name();
    result.mode = "greedy";
    result.value = evaluate_set(chosen, &result.fused);
    return result;
}

struct SelectionConfig {
    SearchMode mode = SearchMode::automatic;
    MetricSpec metric{MetricKind::ndcg, 10};
    GainMode gain = GainMode::linear;
    std::size_t fusion_depth = 1000;
    /// Select one shared member set maximizing the cross-language macro
    /// average instead of selecting per language.
    bool global = false;
    unsigned threads = 1;
};

struct PerLanguageSelection {
    std::map<std::string, SubsetResult> by_language;
    /// candidate name → number of languages whose chosen set contains it
    std::map<std::string, std::size_t> membership;
    double macro_value = 0.0;
    std::map<std::string, double> holdout_by_language;
    std::optional<double> macro_holdout;
    std::vector<std::string> warnings;
};

namespace detail {

inline SearchMode resolve_mode(SearchMode mode, std::size_t n_candidates) {
    if (mode != SearchMode::automatic) return mode;
    return n_candidates <= kExhaustiveCap ? SearchMode::exhaustive : SearchMode::greedy;
}

inline double holdout_value(const Run& fused, const Qrels& holdout,
                            const MetricSpec& metric, GainMode gain) {
    EvalReport report = evaluate(fused, holdout, {metric}, gain);
    auto it = report.aggregates.find(metric.name());
    if (it == report.aggregates.end())
        throw std::runtime_error("holdout evaluation: metric " + metric.name() +
                                 " evaluated no queries");
    return it->second;
}

/// One shared subset across languages, scored by the macro average over
/// languages (members missing in a language are simply not fused there).
inline std::map<std::string, SubsetResult> global_selection(
    const std::map<std::string, std::map<std::string, const Run*>>& runs_by_language,
    const std::map<std::string, const Qrels*>& qrels_by_language,
    const SelectionConfig& config) {
    std::vector<std::string> names;
    for (const auto& [language, candidates] : runs_by_language)
        for (const auto& [name, run] : candidates)
            if (std::find(names.begin(), names.end(), name) == names.end())
                names.push_back(name);
    std::sort(names.begin(), names.end());
    if (names.size() > kExhaustiveCap)
        throw std::invalid_argument("global selection: " + std::to_string(names.size()) +
                                    " candidates exceed the cap of " +
                                    std::to_string(kExhaustiveCap));
    std::size_t n = names.size();
    std::size_t n_subsets = (std::size_t{1} << n) - 1;

    auto macro_for = [&](const std::vector<std::string>& members) {
        std::vector<double> values;
        for (const auto& [language, candidates] : runs_by_language) {
            std::vector<const Run*> present;
            for (const auto& name : members) {
                auto it = candidates.find(name);
                if (it != candidates.end()) present.push_back(it->second);
            }
            if (present.empty()) continue;
            values.push_back(subset_value(present, *qrels_by_language.at(language),
                                          config.metric, config.gain,
                                          config.fusion_depth, nullptr));
        }
        if (values.empty())
            throw std::runtime_error("global selection: subset matches no language");
        return macro_average(values);
    };

    std::vector<std::string> best_members;
    double best_value = 0.0;
    for (std::size_t mask = 1; mask <= n_subsets; ++mask) {
        std::vector<std::string> members;
        for (std::size_t bit = 0; bit < n; ++bit)
            if (mask & (std::size_t{1} << bit)) members.push_back(names[bit]);
        double value = macro_for(members);
        if (best_members.empty() ||
            subset_beats(value, members, best_value, best_members)) {
            best_value = value;
            best_members = std::move(members);
        }
    }

    std::map<std::string, SubsetResult> by_language;
    for (const auto& [language, candidates] : runs_by_language) {
        std::vector<std::string> present_names;
        std::vector<const Run*> present;
        for (const auto& name : best_members) {
            auto it = candidates.find(name);
            if (it == candidates.end()) continue;
            present_names.push_back(name);
            present.push_back(it->second);
        }
        if (present.empty()) continue;
        SubsetResult result;
        result.members = present_names;
        result.metric = config.metric.name();
        result.mode = "global";
        result.value = subset_value(present, *qrels_by_language.at(language),
                                    config.metric, config.gain, config.fusion_depth,
                                    &result.fused);
        by_language[language] = std::move(result);
    }
    return by_language;
}

}  // namespace detail

/// Runs subset search independently per language (or once globally) and
/// reports membership counts, the macro-averaged dev value, and holdout
/// values where holdout qrels are given. Languages without qrels are
/// skipped with a warning.
inline PerLanguageSelection per_language_selection(
    const std::map<std::string, std::map<std::string, const Run*>>& runs_by_language,
    const std::map<std::string, const Qrels*>& qrels_by_language,
    const SelectionConfig& config = {},
    const std::map<std::string, const Qrels*>& holdout_by_language = {}) {
    PerLanguageSelection selection;
    std::map<std::string, std::map<std::string, const Run*>> usable;
    std::map<std::string, const Qrels*> usable_qrels;
    for (const auto& [language, candidates] : runs_by_language) {
        if (candidates.empty())
            throw std::invalid_argument("per_language_selection: language '" + language +
                                        "' has no candidates");
        auto it = qrels_by_language.find(language);
        if (it == qrels_by_language.end() || !it->second) {
            selection.warnings.push_back("language '" + language +
                                         "' skipped: no qrels");
            continue;
        }
        usable[language] = candidates;
        usable_qrels[language] = it->second;
    }
    if (usable.empty())
        throw std::invalid_argument("per_language_selection: no language with qrels");

    if (config.global) {
        selection.by_language = detail::global_selection(usable, usable_qrels, config);
    } else {
        for (const auto& [language, candidates] : usable) {
            SearchMode mode = detail::resolve_mode(config.mode, candidates.size());
            selection.by_language[language] =
                mode == SearchMode::exhaustive
                    ? exhaustive_best_subset(candidates, *usable_qrels.at(language),
                                             config.metric, config.gain,
                                             config.fusion_depth, config.threads)
                    : greedy_best_subset(candidates, *usable_qrels.at(language),
                                         config.metric, config.gain, config.fusion_depth);
        }
    }

    std::vector<double> values;
    for (const auto& [language, result] : selection.by_language) {
        values.push_back(result.value);
        for (const auto& name : result.members) ++selection.membership[name];
        auto holdout = holdout_by_language.find(language);
        if (holdout != holdout_by_language.end() && holdout->second)
            selection.holdout_by_language[language] = detail::holdout_value(
                result.fused, *holdout->second, config.metric, config.gain);
    }
    selection.macro_value = macro_average(values);
    if (!selection.holdout_by_language.empty()) {
        std::vector<double> holdout_values;
        for (const auto& [language, value] : selection.holdout_by_language)
            holdout_values.push_back(value);
        selection.macro_holdout = macro_average(holdout_values);
    }
    return selection;
}

}  // namespace fuseval
