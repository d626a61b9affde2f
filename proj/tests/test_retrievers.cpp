#include <cmath>

#include <gtest/gtest.h>

#include "fuseval/analyzer.hpp"
#include "fuseval/inverted_index.hpp"
#include "fuseval/vector_search.hpp"

#include "test_util.hpp"

using namespace fuseval;

TEST(Tokenize, LowercasesAsciiAndSplitsOnPunctuation) {
    EXPECT_EQ(tokenize("A b"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(tokenize("Hello, World!"), (std::vector<std::string>{"hello", "world"}));
    EXPECT_EQ(tokenize("  x\t\ny "), (std::vector<std::string>{"x", "y"}));
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize("---").empty());
}

TEST(Tokenize, UnicodePunctuationSeparates) {
    EXPECT_EQ(tokenize("\xE4\xB8\x80\xE3\x80\x82\xE4\xBA\x8C"),
              (std::vector<std::string>{"\xE4\xB8\x80", "\xE4\xBA\x8C"}));  // ideographic period
    EXPECT_EQ(tokenize("a\xE2\x80\x94\x62"), (std::vector<std::string>{"a", "b"}));  // em dash
    EXPECT_EQ(tokenize("a\xC2\xA0\x62"), (std::vector<std::string>{"a", "b"}));      // NBSP
    EXPECT_EQ(tokenize("x\xEF\xBC\x81y"), (std::vector<std::string>{"x", "y"}));     // fullwidth !
}

TEST(Tokenize, NonAsciiLettersKeepTheirCase) {
    EXPECT_EQ(tokenize("Caf\xC3\xA9"), (std::vector<std::string>{"caf\xC3\xA9"}));
    EXPECT_EQ(tokenize("\xE5\x8C\x97\xE4\xBA\xAC"),
              (std::vector<std::string>{"\xE5\x8C\x97\xE4\xBA\xAC"}));
}

TEST(Tokenize, MalformedBytesAreNotDropped) {
    // A stray 0xFF decodes as code point U+00FF and is re-emitted as valid
    // UTF-8, so the token survives and tokenizing is idempotent.
    auto tokens = tokenize("ab\xFF\x63");
    ASSERT_EQ(tokens.size(), 1u);
    EXPECT_EQ(tokens[0], "ab\xC3\xBF\x63");
    EXPECT_EQ(tokenize(tokens[0]), tokens);
}

TEST(BuildIndex, PostingsLengthsAndAverage) {
    Corpus corpus;
    corpus.docs["d1"] = {"", "A b"};
    corpus.docs["d2"] = {"", "a"};
    InvertedIndex index = build_index(corpus);
    ASSERT_EQ(index.postings.at("a").size(), 2u);
    EXPECT_EQ(index.postings.at("a")[0].doc_id, "d1");
    EXPECT_EQ(index.postings.at("a")[1].doc_id, "d2");
    ASSERT_EQ(index.postings.at("b").size(), 1u);
    EXPECT_DOUBLE_EQ(index.avg_doc_length(), 1.5);
    EXPECT_EQ(index.doc_count, 2u);
}

TEST(BuildIndex, EmptyDocAndRepeatedTerms) {
    Corpus corpus;
    corpus.docs["d1"] = {"", ""};
    corpus.docs["d2"] = {"", "a a a"};
    InvertedIndex index = build_index(corpus);
    EXPECT_EQ(index.doc_lengths.at("d1"), 0u);
    EXPECT_EQ(index.postings.at("a")[0].tf, 3u);
    EXPECT_THROW(build_index(Corpus{}), std::invalid_argument);
}

TEST(BuildIndex, TitleAndBodyAreConcatenated) {
    Corpus corpus;
    corpus.docs["d1"] = {"cat", "dog"};
    InvertedIndex index = build_index(corpus);
    EXPECT_TRUE(index.postings.count("cat"));
    EXPECT_TRUE(index.postings.count("dog"));
    EXPECT_EQ(index.doc_lengths.at("d1"), 2u);
}

TEST(Bm25, ClosedFormOnWorkedCorpus) {
    Corpus corpus;
    corpus.docs["d1"] = {"", "a b"};
    corpus.docs["d2"] = {"", "a"};
    corpus.docs["d3"] = {"", "c c c"};
    InvertedIndex index = build_index(corpus);

    double idf = std::log(1.0 + (3.0 - 2.0 + 0.5) / (2.0 + 0.5));
    double avgdl = 2.0;
    auto closed_form = [&](double tf, double len) {
        return idf * tf * (0.9 + 1.0) /
               (tf + 0.9 * (1.0 - 0.4 + 0.4 * len / avgdl));
    };
    Ranking ranking = bm25_search(index, "a", {0.9, 0.4}, 10);
    ASSERT_EQ(ranking.size(), 2u);
    EXPECT_EQ(ranking[0].doc_id, "d2");
    EXPECT_EQ(ranking[1].doc_id, "d1");
    EXPECT_NEAR(ranking[0].score, closed_form(1.0, 1.0), 1e-12);
    EXPECT_NEAR(ranking[1].score, closed_form(1.0, 2.0), 1e-12);
}

TEST(Bm25, UnseenTermsAndBadArguments) {
    Corpus corpus;
    corpus.docs["d1"] = {"", "a"};
    InvertedIndex index = build_index(corpus);
    EXPECT_TRUE(bm25_search(index, "zz qq", {0.9, 0.4}, 10).empty());
    EXPECT_THROW(bm25_search(index, "a", {0.9, 0.4}, 0), std::invalid_argument);
    EXPECT_THROW(bm25_search(index, "a", {-1.0, 0.4}, 5), std::invalid_argument);
    EXPECT_THROW(bm25_search(index, "a", {0.9, 1.5}, 5), std::invalid_argument);
}

TEST(Bm25, RepeatedQueryTokensAccumulate) {
    Corpus corpus;
    corpus.docs["d1"] = {"", "a b"};
    corpus.docs["d2"] = {"", "b"};
    InvertedIndex index = build_index(corpus);
    double once = bm25_search(index, "a", {0.9, 0.4}, 10)[0].score;
    double twice = bm25_search(index, "a a", {0.9, 0.4}, 10)[0].score;
    EXPECT_NEAR(twice, 2.0 * once, 1e-12);
}

TEST(Bm25, IdfPositiveForAllDocumentFrequencies) {
    for (std::size_t n = 1; n <= 10; ++n)
        for (std::size_t df = 1; df <= n; ++df) EXPECT_GT(bm25_idf(n, df), 0.0);
}

TEST(Bm25, MatchesBruteForceScorerOnRandomCorpora) {
    std::mt19937_64 rng(31);
    const char* vocab[] = {"red", "blue", "green", "dog", "cat", "fish", "sun", "moon"};
    for (int trial = 0; trial < 10; ++trial) {
        Corpus corpus;
        std::size_t n_docs = 2 + rng() % 20;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string body;
            std::size_t len = 1 + rng() % 12;
            for (std::size_t w = 0; w < len; ++w) {
                if (!body.empty()) body += ' ';
                body += vocab[rng() % 8];
            }
            corpus.docs[testutil::doc_name(d)] = {"", body};
        }
        InvertedIndex index = build_index(corpus);
        std::string query = std::string(vocab[rng() % 8]) + " " + vocab[rng() % 8];
        Bm25Params params{0.9, 0.4};
        Ranking got = bm25_search(index, query, params, n_docs);

        std::map<DocId, double> expected;
        for (const auto& [doc_id, doc] : corpus.docs) {
            auto tokens = tokenize(doc.body);
            double score = 0.0;
            for (const auto& term : tokenize(query)) {
                double tf = 0.0;
                for (const auto& token : tokens)
                    if (token == term) tf += 1.0;
                if (tf == 0.0) continue;
                std::size_t df = 0;
                for (const auto& [other_id, other] : corpus.docs) {
                    auto other_tokens = tokenize(other.body);
                    for (const auto& token : other_tokens)
                        if (token == term) {
                            ++df;
                            break;
                        }
                }
                double idf = std::log(
                    1.0 + (static_cast<double>(corpus.docs.size()) - df + 0.5) / (df + 0.5));
                double len = static_cast<double>(tokens.size());
                score += idf * tf * (params.k1 + 1.0) /
                         (tf + params.k1 * (1.0 - params.b +
                                            params.b * len / index.avg_doc_length()));
            }
            if (score > 0.0) expected[doc_id] = score;
        }
        ASSERT_EQ(got.size(), expected.size());
        for (const auto& entry : got)
            EXPECT_NEAR(entry.score, expected.at(entry.doc_id), 1e-9);
    }
}

TEST(IndexPersistence, SaveLoadRoundTrip) {
    testutil::TempDir dir;
    Corpus corpus;
    corpus.docs["d1"] = {"title words", "a b c a"};
    corpus.docs["d2"] = {"", "b"};
    InvertedIndex index = build_index(corpus);
    save_index(index, dir.path.string());
    InvertedIndex loaded = load_index(dir.path.string());
    EXPECT_EQ(loaded.doc_count, index.doc_count);
    EXPECT_EQ(loaded.total_tokens, index.total_tokens);
    EXPECT_EQ(loaded.doc_lengths, index.doc_lengths);
    ASSERT_EQ(loaded.postings.size(), index.postings.size());
    Ranking a = bm25_search(index, "a b", {0.9, 0.4}, 5);
    Ranking b = bm25_search(loaded, "a b", {0.9, 0.4}, 5);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].doc_id, b[i].doc_id);
        EXPECT_DOUBLE_EQ(a[i].score, b[i].score);
    }
}

TEST(SparseSearch, DotProductOverSharedTerms) {
    SparseVectorSet docs;
    docs.vectors["d1"] = {{"cat", 1.5}, {"dog", 9.0}};
    docs.vectors["d2"] = {{"bird", 4.0}};
    Ranking ranking = sparse_search(docs, {{"cat", 2.0}}, 10);
    ASSERT_EQ(ranking.size(), 1u);
    EXPECT_EQ(ranking[0].doc_id, "d1");
    EXPECT_DOUBLE_EQ(ranking[0].score, 3.0);
}

TEST(SparseSearch, EqualScoresBreakByDocId) {
    SparseVectorSet docs;
    docs.vectors["db"] = {{"x", 1.0}};
    docs.vectors["da"] = {{"x", 1.0}};
    Ranking ranking = sparse_search(docs, {{"x", 1.0}}, 10);
    ASSERT_EQ(ranking.size(), 2u);
    EXPECT_EQ(ranking[0].doc_id, "da");
    EXPECT_EQ(ranking[1].doc_id, "db");
}

TEST(DenseSearch, DotAndCosine) {
    DenseVectorSet docs;
    docs.dim = 2;
    docs.vectors["d1"] = {1.0, 0.0};
    docs.vectors["d2"] = {0.0, 1.0};
    Ranking dot_ranking = dense_search(docs, {1.0, 0.0}, 10, Similarity::dot);
    EXPECT_EQ(dot_ranking[0].doc_id, "d1");
    EXPECT_DOUBLE_EQ(dot_ranking[0].score, 1.0);
    EXPECT_DOUBLE_EQ(dot_ranking[1].score, 0.0);

    DenseVectorSet scaled = docs;
    for (auto& component : scaled.vectors["d1"]) component *= 3.0;
    Ranking cos_a = dense_search(docs, {0.6, 0.8}, 10, Similarity::cosine);
    Ranking cos_b = dense_search(scaled, {0.6, 0.8}, 10, Similarity::cosine);
    ASSERT_EQ(cos_a.size(), cos_b.size());
    for (std::size_t i = 0; i < cos_a.size(); ++i) {
        EXPECT_EQ(cos_a[i].doc_id, cos_b[i].doc_id);
        EXPECT_NEAR(cos_a[i].score, cos_b[i].score, 1e-12);
    }

    EXPECT_THROW(dense_search(docs, {1.0, 0.0, 0.0}, 10), std::invalid_argument);
    EXPECT_EQ(dense_search(docs, {1.0, 1.0}, 99).size(), 2u);
}

TEST(DenseSearch, DotOnUnitVectorsEqualsCosine) {
    std::mt19937_64 rng(32);
    DenseVectorSet docs;
    docs.dim = 4;
    for (std::size_t d = 0; d < 12; ++d) {
        std::vector<double> vec(4);
        double norm = 0.0;
        for (double& component : vec) {
            component = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
            norm += component * component;
        }
        norm = std::sqrt(norm);
        for (double& component : vec) component /= norm;
        docs.vectors[testutil::doc_name(d)] = vec;
    }
    std::vector<double> query{0.5, 0.5, 0.5, 0.5};
    Ranking dot_ranking = dense_search(docs, query, 12, Similarity::dot);
    Ranking cos_ranking = dense_search(docs, query, 12, Similarity::cosine);
    std::map<DocId, double> cos_by_doc;
    for (const auto& entry : cos_ranking) cos_by_doc[entry.doc_id] = entry.score;
    for (const auto& entry : dot_ranking)
        EXPECT_NEAR(entry.score, cos_by_doc.at(entry.doc_id), 1e-9);
}

TEST(MaxSim, SumOfBestTokenMatches) {
    MultiVectorSet docs;
    docs.dim = 2;
    docs.vectors["A"] = {{1.0, 0.0}};
    docs.vectors["B"] = {{1.0, 0.0}, {0.0, 1.0}};
    std::vector<std::vector<double>> query{{1.0, 0.0}, {0.0, 1.0}};
    Ranking ranking = maxsim_search(docs, query, 10);
    ASSERT_EQ(ranking.size(), 2u);
    EXPECT_EQ(ranking[0].doc_id, "B");
    EXPECT_DOUBLE_EQ(ranking[0].score, 2.0);
    EXPECT_EQ(ranking[1].doc_id, "A");
    EXPECT_DOUBLE_EQ(ranking[1].score, 1.0);
}

TEST(MaxSim, DuplicateDocTokenChangesNothing) {
    MultiVectorSet docs;
    docs.dim = 2;
    docs.vectors["A"] = {{0.3, 0.7}, {0.9, 0.1}};
    MultiVectorSet duplicated = docs;
    duplicated.vectors["A"].push_back({0.9, 0.1});
    std::vector<std::vector<double>> query{{1.0, 0.0}, {0.5, 0.5}};
    EXPECT_DOUBLE_EQ(maxsim_search(docs, query, 1)[0].score,
                     maxsim_search(duplicated, query, 1)[0].score);
}

TEST(MaxSim, ZeroTokenDocScoresZero) {
    MultiVectorSet docs;
    docs.dim = 2;
    docs.vectors["empty"] = {};
    docs.vectors["full"] = {{1.0, 0.0}};
    Ranking ranking = maxsim_search(docs, {{1.0, 0.0}}, 10);
    ASSERT_EQ(ranking.size(), 2u);
    EXPECT_EQ(ranking[0].doc_id, "full");
    EXPECT_EQ(ranking[1].doc_id, "empty");
    EXPECT_DOUBLE_EQ(ranking[1].score, 0.0);
}

TEST(MaxSim, MatchesDirectEnumerationOnRandomInstances) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        MultiVectorSet docs;
        docs.dim = 3;
        std::size_t n_docs = 2 + rng() % 8;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::vector<std::vector<double>> tokens;
            std::size_t n_tokens = rng() % 5;
            for (std::size_t t = 0; t < n_tokens; ++t)
                tokens.push_back({static_cast<double>(rng() >> 11) * 0x1.0p-53,
                                  static_cast<double>(rng() >> 11) * 0x1.0p-53,
                                  static_cast<double>(rng() >> 11) * 0x1.0p-53});
            docs.vectors[testutil::doc_name(d)] = std::move(tokens);
        }
        std::vector<std::vector<double>> query;
        std::size_t n_query = 1 + rng() % 4;
        for (std::size_t t = 0; t < n_query; ++t)
            query.push_back({static_cast<double>(rng() >> 11) * 0x1.0p-53,
                             static_cast<double>(rng() >> 11) * 0x1.0p-53,
                             static_cast<double>(rng() >> 11) * 0x1.0p-53});

        Ranking got = maxsim_search(docs, query, n_docs);
        for (const auto& entry : got) {
            const auto& tokens = docs.vectors.at(entry.doc_id);
            double expected = 0.0;
            for (const auto& q : query) {
                double best = -1e300;
                for (const auto& d : tokens) {
                    double s = q[0] * d[0] + q[1] * d[1] + q[2] * d[2];
                    best = std::max(best, s);
                }
                if (!tokens.empty()) expected += best;
            }
            EXPECT_NEAR(entry.score, expected, 1e-9);
        }
    }
}

TEST(BatchSearch, ThreadCountDoesNotChangeResults) {
    SparseVectorSet docs, queries;
    std::mt19937_64 rng(34);
    const char* terms[] = {"a", "b", "c", "d"};
    for (std::size_t d = 0; d < 30; ++d) {
        auto& vec = docs.vectors[testutil::doc_name(d)];
        for (const char* term : terms)
            if (rng() % 2) vec[term] = 1.0 + static_cast<double>(rng() % 5);
        if (vec.empty()) vec["a"] = 1.0;
    }
    for (std::size_t q = 0; q < 8; ++q)
        queries.vectors[testutil::query_name(q)] = {{terms[rng() % 4], 2.0}};
    fuseval::Run serial = sparse_search_run(docs, queries, 10, "s", 1);
    fuseval::Run parallel = sparse_search_run(docs, queries, 10, "s", 4);
    EXPECT_EQ(serial, parallel);
}
