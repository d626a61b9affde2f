#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fuseval/metrics.hpp"
#include "fuseval/subset_search.hpp"
#include "fuseval/vector_search.hpp"

namespace fuseval {

enum class RetrieverType { bm25, sparse, dense, maxsim };

inline RetrieverType parse_retriever_type(const std::string& name) {
    if (name == "bm25") return RetrieverType::bm25;
    if (name == "sparse") return RetrieverType::sparse;
    if (name == "dense") return RetrieverType::dense;
    if (name == "maxsim") return RetrieverType::maxsim;
    throw std::invalid_argument("unknown retriever type: " + name);
}

struct RetrieverSpec {
    std::string name;
    RetrieverType type = RetrieverType::bm25;
    std::size_t k = 1000;
    double k1 = 0.9;  ///< bm25 only
    double b = 0.4;   ///< bm25 only
    Similarity similarity = Similarity::dot;  ///< dense only
    std::string doc_vectors;                  ///< sparse/dense/maxsim
    std::string query_vectors;                ///< sparse/dense/maxsim
};

struct LanguageConfig {
    std::string corpus;
    std::string queries;
    std::string dev_qrels;
    std::string holdout_qrels;                 ///< optional
    std::map<std::string, std::string> runs;   ///< name -> run path
    std::vector<RetrieverSpec> retrievers;
    std::map<std::string, std::string> rerankers;  ///< name -> score file path
};

struct ExperimentConfig {
    std::map<std::string, LanguageConfig> languages;
    std::string output_dir = "out";
    MetricSpec metric{MetricKind::ndcg, 10};
    GainMode gain = GainMode::linear;
    std::size_t fusion_depth = 1000;
    std::vector<std::size_t> rerank_depths{10, 20, 100};
    SearchMode selection_mode = SearchMode::automatic;
    bool global_selection = false;
    uint64_t seed = 42;
    unsigned threads = 1;
    std::string source_text;  ///< raw config document, hashed for provenance
};

inline uint64_t fnv1a_hash(const std::string& text) {
    uint64_t hash = 1469598103934665603ULL;
    for (unsigned char byte : text) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

inline std::string config_hash(const ExperimentConfig& config) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(config.source_text)));
    return buf;
}

namespace detail {

inline std::string require_existing_path(const nlohmann::json& node, const char* key,
                                         const std::string& context, bool required) {
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) {
        if (required)
            throw std::runtime_error(context + ": missing required path '" + key + "'");
        return {};
    }
    if (!it->is_string())
        throw std::runtime_error(context + ": '" + key + "' is not a string");
    std::string path = it->get<std::string>();
    if (!std::filesystem::exists(path))
        throw std::runtime_error(context + ": path does not exist: " + path);
    return path;
}

inline std::map<std::string, std::string> existing_path_map(const nlohmann::json& node,
                                                            const char* key,
                                                            const std::string& context) {
    std::map<std::string, std::string> result;
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) return result;
    if (!it->is_object())
        throw std::runtime_error(context + ": '" + key + "' is not an object");
    for (const auto& [name, value] : it->items()) {
        if (!value.is_string())
            throw std::runtime_error(context + ": '" + key + "." + name +
                                     "' is not a string");
        std::string path = value.get<std::string>();
        if (!std::filesystem::exists(path))
            throw std::runtime_error(context + ": path does not exist: " + path);
        result[name] = path;
    }
    return result;
}

inline RetrieverSpec parse_retriever_spec(const nlohmann::json& node,
                                          const std::string& context) {
    if (!node.is_object()) throw std::runtime_error(context + ": retriever is not an object");
    RetrieverSpec spec;
    if (!node.contains("name") || !node.at("name").is_string())
        throw std::runtime_error(context + ": retriever missing 'name'");
    spec.name = node.at("name").get<std::string>();
    if (!node.contains("type") || !node.at("type").is_string())
        throw std::runtime_error(context + ": retriever '" + spec.name + "' missing 'type'");
    spec.type = parse_retriever_type(node.at("type").get<std::string>());
    if (node.contains("k")) spec.k = node.at("k").get<std::size_t>();
    if (spec.k < 1) throw std::runtime_error(context + ": retriever k < 1");
    if (node.contains("k1")) spec.k1 = node.at("k1").get<double>();
    if (node.contains("b")) spec.b = node.at("b").get<double>();
    if (node.contains("similarity"))
        spec.similarity = parse_similarity(node.at("similarity").get<std::string>());
    std::string ctx = context + ": retriever '" + spec.name + "'";
    if (spec.type != RetrieverType::bm25) {
        spec.doc_vectors = require_existing_path(node, "doc_vectors", ctx, true);
        spec.query_vectors = require_existing_path(node, "query_vectors", ctx, true);
    }
    return spec;
}

}  // namespace detail

/// Loads and validates an experiment config. Every referenced path must
/// exist; failures name the offending path.
inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw std::runtime_error("invalid JSON config: " + path);

    ExperimentConfig config;
    config.source_text = text;
    if (doc.contains("output_dir")) config.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("metric")) config.metric = parse_metric(doc.at("metric").get<std::string>());
    if (doc.contains("gain")) config.gain = parse_gain_mode(doc.at("gain").get<std::string>());
    if (doc.contains("fusion_depth")) {
        config.fusion_depth = doc.at("fusion_depth").get<std::size_t>();
        if (config.fusion_depth < 1)
            throw std::runtime_error(path + ": fusion_depth < 1");
    }
    if (doc.contains("rerank_depths")) {
        config.rerank_depths.clear();
        for (const auto& depth : doc.at("rerank_depths")) {
            std::size_t d = depth.get<std::size_t>();
            if (d < 1) throw std::runtime_error(path + ": rerank depth < 1");
            config.rerank_depths.push_back(d);
        }
        if (config.rerank_depths.empty())
            throw std::runtime_error(path + ": rerank_depths is empty");
    }
    if (doc.contains("selection_mode"))
        config.selection_mode = parse_search_mode(doc.at("selection_mode").get<std::string>());
    if (doc.contains("global_selection"))
        config.global_selection = doc.at("global_selection").get<bool>();
    if (doc.contains("seed")) config.seed = doc.at("seed").get<uint64_t>();
    if (doc.contains("threads")) config.threads = doc.at("threads").get<unsigned>();

    if (!doc.contains("languages") || !doc.at("languages").is_object() ||
        doc.at("languages").empty())
        throw std::runtime_error(path + ": config needs a non-empty 'languages' object");
    for (const auto& [language, node] : doc.at("languages").items()) {
        std::string context = path + ": language '" + language + "'";
        LanguageConfig lang;
        bool needs_corpus = false;
        if (node.contains("retrievers")) {
            if (!node.at("retrievers").is_array())
                throw std::runtime_error(context + ": 'retrievers' is not an array");
            for (const auto& retriever : node.at("retrievers")) {
                lang.retrievers.push_back(detail::parse_retriever_spec(retriever, context));
                if (lang.retrievers.back().type == RetrieverType::bm25) needs_corpus = true;
            }
        }
        lang.corpus = detail::require_existing_path(node, "corpus", context, needs_corpus);
        bool needs_queries = needs_corpus;
        lang.queries = detail::require_existing_path(node, "queries", context, needs_queries);
        lang.dev_qrels = detail::require_existing_path(node, "dev_qrels", context, true);
        lang.holdout_qrels =
            detail::require_existing_path(node, "holdout_qrels", context, false);
        lang.runs = detail::existing_path_map(node, "runs", context);
        lang.rerankers = detail::existing_path_map(node, "rerankers", context);
        if (lang.runs.empty() && lang.retrievers.empty())
            throw std::runtime_error(context + ": needs 'runs' or 'retrievers'");
        config.languages[language] = std::move(lang);
    }
    return config;
}

}  // namespace fuseval
