#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/io.hpp"
#include "fuseval/types.hpp"

namespace fuseval {

/// Quality profile of the generated systems: oracle systems separate
/// grades perfectly; weaker profiles mix more noise into the scores.
enum class SynthProfile { oracle, strong, mixed, weak };

inline SynthProfile parse_profile(const std::string& name) {
    if (name == "oracle") return SynthProfile::oracle;
    if (name == "strong") return SynthProfile::strong;
    if (name == "mixed") return SynthProfile::mixed;
    if (name == "weak") return SynthProfile::weak;
    throw std::invalid_argument("unknown profile: " + name);
}

inline std::string profile_name(SynthProfile profile) {
    switch (profile) {
        case SynthProfile::oracle: return "oracle";
        case SynthProfile::strong: return "strong";
        case SynthProfile::mixed: return "mixed";
        case SynthProfile::weak: return "weak";
    }
    return "mixed";
}

struct SynthSpec {
    uint64_t seed = 42;
    std::size_t n_docs = 1000;
    std::size_t n_queries = 50;
    std::size_t n_systems = 3;
    SynthProfile profile = SynthProfile::mixed;
    std::size_t run_depth = 100;
    std::size_t max_relevant = 4;
    std::size_t max_negatives = 4;
    /// Fraction of queries whose judgments go to a held-out qrels file.
    double holdout_fraction = 0.0;
};

struct SynthData {
    Corpus corpus;
    QuerySet queries;
    Qrels dev;
    Qrels holdout;
    std::vector<Run> runs;
    ScoreFile oracle_scores;  ///< reranker score = judged grade
};

namespace detail {

/// mt19937_64 is fully specified, and these mappings avoid the library
/// distributions whose outputs vary across standard libraries.
struct SynthRng {
    std::mt19937_64 gen;

    explicit SynthRng(uint64_t seed) : gen(seed) {}

    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

    uint64_t below(uint64_t n) { return gen() % n; }
};

inline std::string padded(const char* prefix, std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, value);
    return buf;
}

inline std::string filler_sentence(SynthRng& rng, std::size_t n_words) {
    std::string text;
    for (std::size_t i = 0; i < n_words; ++i) {
        if (!text.empty()) text += ' ';
        text += padded("f", rng.below(200), 3);
    }
    return text;
}

/// Grades are 1..2 and noise is U(0,1), so weights >= 1 separate every
/// grade band perfectly while fractional weights let noise flip docs
/// across bands; the profiles below stay imperfect on purpose except for
/// oracle.
inline std::vector<double> system_weights(SynthProfile profile, std::size_t n_systems) {
    std::vector<double> weights(n_systems);
    for (std::size_t s = 0; s < n_systems; ++s) {
        switch (profile) {
            case SynthProfile::oracle: weights[s] = 10.0; break;
            case SynthProfile::strong: weights[s] = 0.9; break;
            case SynthProfile::weak: weights[s] = 0.15; break;
            case SynthProfile::mixed:
                weights[s] = n_systems > 1
                                 ? 0.3 + 0.65 * static_cast<double>(s) /
                                              static_cast<double>(n_systems - 1)
                                 : 0.75;
                break;
        }
    }
    return weights;
}

}  // namespace detail

/// Builds a topic-term corpus where query i's two topic terms appear in
/// its relevant docs (both terms), its judged negatives (one term), and
/// nowhere else, so lexical retrievers are genuinely informative. System
/// runs score every doc as weight * grade + U(0,1). Deterministic per
/// seed.
inline SynthData make_synthetic(const SynthSpec& spec) {
    if (spec.n_docs < 1 || spec.n_queries < 1 || spec.n_systems < 1)
        throw std::invalid_argument("make_synthetic: sizes must be >= 1");
    if (spec.run_depth < 1) throw std::invalid_argument("make_synthetic: run_depth < 1");
    if (spec.holdout_fraction < 0.0 || spec.holdout_fraction >= 1.0)
        throw std::invalid_argument("make_synthetic: holdout_fraction outside [0, 1)");

    detail::SynthRng rng(spec.seed);
    SynthData data;

    std::size_t next_doc = 0;
    auto new_doc_id = [&] {
        if (next_doc >= spec.n_docs)
            throw std::invalid_argument(
                "make_synthetic: n_docs too small for the judged docs; need more than " +
                std::to_string(spec.n_docs));
        return detail::padded("d", next_doc++, 7);
    };

    std::size_t n_holdout =
        static_cast<std::size_t>(spec.holdout_fraction * static_cast<double>(spec.n_queries));
    std::size_t first_holdout = spec.n_queries - n_holdout;

    for (std::size_t q = 0; q < spec.n_queries; ++q) {
        QueryId query_id = detail::padded("q", q, 4);
        std::string term_a = detail::padded("t", 2 * q, 4);
        std::string term_b = detail::padded("t", 2 * q + 1, 4);
        data.queries.queries[query_id] = term_a + " " + term_b;

        Qrels& qrels = q < first_holdout ? data.dev : data.holdout;
        std::size_t n_relevant = 1 + rng.below(spec.max_relevant);
        for (std::size_t r = 0; r < n_relevant; ++r) {
            DocId doc_id = new_doc_id();
            std::size_t repeats = 2 + rng.below(3);
            std::string body;
            for (std::size_t i = 0; i < repeats; ++i)
                body += term_a + " " + term_b + " ";
            body += detail::filler_sentence(rng, 20 + rng.below(21));
            data.corpus.docs[doc_id] = {detail::filler_sentence(rng, 3), body};
            int grade = 1 + static_cast<int>(rng.below(2));
            qrels.judgments[query_id][doc_id] = grade;
        }
        std::size_t n_negatives = rng.below(spec.max_negatives + 1);
        for (std::size_t m = 0; m < n_negatives; ++m) {
            DocId doc_id = new_doc_id();
            const std::string& term = rng.below(2) ? term_a : term_b;
            std::string body = term + " " + detail::filler_sentence(rng, 20 + rng.below(21));
            data.corpus.docs[doc_id] = {detail::filler_sentence(rng, 3), body};
            qrels.judgments[query_id][doc_id] = 0;
        }
    }
    while (next_doc < spec.n_docs) {
        DocId doc_id = detail::padded("d", next_doc++, 7);
        data.corpus.docs[doc_id] = {detail::filler_sentence(rng, 3),
                                    detail::filler_sentence(rng, 10 + rng.below(41))};
    }

    auto grade_of = [&](const QueryId& query, const DocId& doc) -> int {
        for (const Qrels* qrels : {&data.dev, &data.holdout}) {
            auto row = qrels->judgments.find(query);
            if (row == qrels->judgments.end()) continue;
            auto it = row->second.find(doc);
            if (it != row->second.end()) return it->second;
        }
        return 0;
    };

    auto weights = detail::system_weights(spec.profile, spec.n_systems);
    for (std::size_t s = 0; s < spec.n_systems; ++s) {
        Run run;
        run.system_tag = detail::padded("sys", s, 2);
        for (const auto& [query_id, text] : data.queries.queries) {
            Ranking ranking;
            ranking.reserve(data.corpus.docs.size());
            for (const auto& [doc_id, doc] : data.corpus.docs)
                ranking.push_back(
                    {doc_id, weights[s] * grade_of(query_id, doc_id) + rng.uniform()});
            sort_ranking(ranking);
            if (ranking.size() > spec.run_depth) ranking.resize(spec.run_depth);
            run.entries[query_id] = std::move(ranking);
        }
        data.runs.push_back(std::move(run));
    }

    for (const Qrels* qrels : {&data.dev, &data.holdout})
        for (const auto& [query, row] : qrels->judgments)
            for (const auto& [doc, grade] : row)
                data.oracle_scores.scores[query][doc] = static_cast<double>(grade);

    return data;
}

/// Writes corpus.jsonl, queries.tsv, dev.qrels (holdout.qrels when split),
/// runs/<tag>.trec, and rr_oracle.txt under dir.
inline void write_synthetic(const SynthData& data, const std::string& dir) {
    std::filesystem::path root(dir);
    write_corpus(data.corpus, (root / "corpus.jsonl").string());
    write_queries(data.queries, (root / "queries.tsv").string());
    write_qrels(data.dev, (root / "dev.qrels").string());
    if (!data.holdout.judgments.empty())
        write_qrels(data.holdout, (root / "holdout.qrels").string());
    for (const Run& run : data.runs)
        write_run(run, (root / "runs" / (run.system_tag + ".trec")).string());
    write_scorefile(data.oracle_scores, (root / "rr_oracle.txt").string());
}

}  // namespace fuseval
