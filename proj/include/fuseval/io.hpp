#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "fuseval/types.hpp"

namespace fuseval {

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& file, std::size_t line_no, const std::string& message)
        : std::runtime_error(file + ":" + std::to_string(line_no) + ": " + message) {}
    explicit ParseError(const std::string& message) : std::runtime_error(message) {}
};

struct ParseOptions {
    /// Keep the first occurrence of a duplicate (query, doc) pair in run
    /// files instead of failing.
    bool keep_first_duplicate = false;
    std::vector<std::string>* warnings = nullptr;
};

namespace detail {

inline void strip_bom(std::string& line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
}

inline void chomp_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) cols.emplace_back(line.substr(start, i - start));
    }
    return cols;
}

inline double parse_finite(const std::string& token, const std::string& file,
                           std::size_t line_no, const char* field) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(file, line_no,
                         std::string("invalid ") + field + " '" + token + "'");
    if (!std::isfinite(value))
        throw ParseError(file, line_no,
                         std::string("non-finite ") + field + " '" + token + "'");
    return value;
}

inline long parse_integer(const std::string& token, const std::string& file,
                          std::size_t line_no, const char* field) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(file, line_no,
                         std::string("invalid ") + field + " '" + token + "'");
    return value;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

/// Scores are serialized with 6 decimal places everywhere.
inline std::string format_score(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

inline void warn(const ParseOptions& opt, const std::string& message) {
    if (opt.warnings) opt.warnings->push_back(message);
}

inline nlohmann::json parse_json_line(const std::string& line, const std::string& file,
                                      std::size_t line_no) {
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded())
        throw ParseError(file, line_no, "invalid JSON");
    if (!record.is_object())
        throw ParseError(file, line_no, "expected a JSON object");
    return record;
}

inline std::string require_string(const nlohmann::json& record, const char* key,
                                  const std::string& file, std::size_t line_no) {
    auto it = record.find(key);
    if (it == record.end())
        throw ParseError(file, line_no, std::string("missing key '") + key + "'");
    if (!it->is_string())
        throw ParseError(file, line_no, std::string("key '") + key + "' is not a string");
    return it->get<std::string>();
}

inline double require_finite_number(const nlohmann::json& value, const std::string& file,
                                    std::size_t line_no, const char* what) {
    if (!value.is_number())
        throw ParseError(file, line_no, std::string(what) + " is not a number");
    double v = value.get<double>();
    if (!std::isfinite(v))
        throw ParseError(file, line_no, std::string("non-finite ") + what);
    return v;
}

}  // namespace detail

inline void validate_run(const Run& run) {
    for (const auto& [query, ranking] : run.entries) {
        std::set<DocId> seen;
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            if (!std::isfinite(ranking[i].score))
                throw std::invalid_argument("run '" + run.system_tag + "': non-finite score for query " + query);
            if (!seen.insert(ranking[i].doc_id).second)
                throw std::invalid_argument("run '" + run.system_tag + "': duplicate doc '" +
                                            ranking[i].doc_id + "' for query " + query);
            if (i > 0 && !ranks_before(ranking[i - 1], ranking[i]))
                throw std::invalid_argument("run '" + run.system_tag + "': entries not sorted for query " + query);
        }
    }
}

/// Reads a TREC 6-column run file: `qid Q0 docid rank score tag`.
/// The rank column is ignored; entries are re-sorted by (score desc,
/// doc_id asc). The system tag is taken from the first data line.
inline Run parse_run(const std::string& path, const ParseOptions& opt = {}) {
    auto in = detail::open_input(path);
    Run run;
    std::map<QueryId, std::set<DocId>> seen;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        auto cols = detail::split_ws(line);
        if (cols.empty()) continue;
        if (cols.size() != 6)
            throw ParseError(path, line_no,
                             "expected 6 columns, got " + std::to_string(cols.size()));
        double score = detail::parse_finite(cols[4], path, line_no, "score");
        if (!seen[cols[0]].insert(cols[2]).second) {
            if (opt.keep_first_duplicate) {
                detail::warn(opt, path + ":" + std::to_string(line_no) +
                                      ": duplicate (" + cols[0] + ", " + cols[2] +
                                      ") kept first occurrence");
                continue;
            }
            throw ParseError(path, line_no,
                             "duplicate (" + cols[0] + ", " + cols[2] + ")");
        }
        run.entries[cols[0]].push_back({cols[2], score});
        if (run.system_tag.empty()) run.system_tag = cols[5];
    }
    for (auto& [query, ranking] : run.entries) sort_ranking(ranking);
    return run;
}

/// Writes a run in TREC 6-column format with ranks recomputed 1..n per
/// query and queries in ascending query_id order.
inline void write_run(const Run& run, const std::string& path, const std::string& tag) {
    validate_run(run);
    auto out = detail::open_output(path);
    for (const auto& [query, ranking] : run.entries) {
        std::size_t rank = 1;
        for (const auto& entry : ranking) {
            out << query << " Q0 " << entry.doc_id << ' ' << rank++ << ' '
                << detail::format_score(entry.score) << ' ' << tag << '\n';
        }
    }
}

inline void write_run(const Run& run, const std::string& path) {
    write_run(run, path, run.system_tag.empty() ? "run" : run.system_tag);
}

/// Reads 4-column qrels: `qid iteration docid grade`. Negative grades are
/// clamped to 0 with a warning; duplicate pairs are accepted when the
/// stored grade agrees and rejected otherwise.
inline Qrels parse_qrels(const std::string& path, const ParseOptions& opt = {}) {
    auto in = detail::open_input(path);
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        auto cols = detail::split_ws(line);
        if (cols.empty()) continue;
        if (cols.size() != 4)
            throw ParseError(path, line_no,
                             "expected 4 columns, got " + std::to_string(cols.size()));
        long grade = detail::parse_integer(cols[3], path, line_no, "grade");
        if (grade < 0) {
            detail::warn(opt, path + ":" + std::to_string(line_no) +
                                  ": negative grade clamped to 0");
            grade = 0;
        }
        auto& row = qrels.judgments[cols[0]];
        auto [it, inserted] = row.emplace(cols[2], static_cast<int>(grade));
        if (!inserted && it->second != grade)
            throw ParseError(path, line_no,
                             "conflicting grades for (" + cols[0] + ", " + cols[2] + ")");
    }
    return qrels;
}

inline void write_qrels(const Qrels& qrels, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [query, row] : qrels.judgments)
        for (const auto& [doc, grade] : row)
            out << query << " 0 " << doc << ' ' << grade << '\n';
}

/// Corpus is JSON-lines with keys `docid`, `title`, `text`.
inline Corpus parse_corpus(const std::string& path) {
    auto in = detail::open_input(path);
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        if (line.empty()) continue;
        auto record = detail::parse_json_line(line, path, line_no);
        DocId id = detail::require_string(record, "docid", path, line_no);
        Document doc{detail::require_string(record, "title", path, line_no),
                     detail::require_string(record, "text", path, line_no)};
        if (!corpus.docs.emplace(id, std::move(doc)).second)
            throw ParseError(path, line_no, "duplicate docid '" + id + "'");
    }
    return corpus;
}

inline void write_corpus(const Corpus& corpus, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [id, doc] : corpus.docs) {
        nlohmann::json record{{"docid", id}, {"title", doc.title}, {"text", doc.body}};
        out << record.dump() << '\n';
    }
}

/// Queries are tab-separated `qid<TAB>text`; the first tab separates the
/// two fields.
inline QuerySet parse_queries(const std::string& path) {
    auto in = detail::open_input(path);
    QuerySet queries;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw ParseError(path, line_no, "expected `qid<TAB>text`");
        QueryId id = line.substr(0, tab);
        if (!queries.queries.emplace(id, line.substr(tab + 1)).second)
            throw ParseError(path, line_no, "duplicate query id '" + id + "'");
    }
    return queries;
}

inline void write_queries(const QuerySet& queries, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [id, text] : queries.queries) out << id << '\t' << text << '\n';
}

/// Sparse vectors are JSON-lines `{"id": ..., "vector": {term: weight}}`
/// with strictly positive finite weights.
inline SparseVectorSet parse_sparse_vectors(const std::string& path) {
    auto in = detail::open_input(path);
    SparseVectorSet set;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        if (line.empty()) continue;
        auto record = detail::parse_json_line(line, path, line_no);
        std::string id = detail::require_string(record, "id", path, line_no);
        auto it = record.find("vector");
        if (it == record.end() || !it->is_object())
            throw ParseError(path, line_no, "missing or non-object 'vector'");
        std::map<std::string, double> vec;
        for (const auto& [term, weight] : it->items()) {
            double w = detail::require_finite_number(weight, path, line_no, "weight");
            if (w <= 0.0)
                throw ParseError(path, line_no,
                                 "non-positive weight for term '" + term + "'");
            vec[term] = w;
        }
        if (!set.vectors.emplace(id, std::move(vec)).second)
            throw ParseError(path, line_no, "duplicate id '" + id + "'");
    }
    return set;
}

inline void write_sparse_vectors(const SparseVectorSet& set, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [id, vec] : set.vectors) {
        nlohmann::json record{{"id", id}, {"vector", vec}};
        out << record.dump() << '\n';
    }
}

/// Dense vectors are JSON-lines `{"id": ..., "vector": [f, ...]}`. The
/// dimension comes from the first record; later records must match.
inline DenseVectorSet parse_dense_vectors(const std::string& path) {
    auto in = detail::open_input(path);
    DenseVectorSet set;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        if (line.empty()) continue;
        auto record = detail::parse_json_line(line, path, line_no);
        std::string id = detail::require_string(record, "id", path, line_no);
        auto it = record.find("vector");
        if (it == record.end() || !it->is_array())
            throw ParseError(path, line_no, "missing or non-array 'vector'");
        std::vector<double> vec;
        vec.reserve(it->size());
        for (const auto& component : *it)
            vec.push_back(detail::require_finite_number(component, path, line_no, "component"));
        if (vec.empty()) throw ParseError(path, line_no, "empty vector");
        if (set.vectors.empty()) {
            set.dim = vec.size();
        } else if (vec.size() != set.dim) {
            throw ParseError(path, line_no,
                             "dimension mismatch: expected " + std::to_string(set.dim) +
                                 ", got " + std::to_string(vec.size()));
        }
        if (!set.vectors.emplace(id, std::move(vec)).second)
            throw ParseError(path, line_no, "duplicate id '" + id + "'");
    }
    return set;
}

inline void write_dense_vectors(const DenseVectorSet& set, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [id, vec] : set.vectors) {
        nlohmann::json record{{"id", id}, {"vector", vec}};
        out << record.dump() << '\n';
    }
}

/// Per-token vectors are JSON-lines `{"id": ..., "vectors": [[...], ...]}`.
/// A record may hold zero tokens; the shared dimension comes from the
/// first non-empty record.
inline MultiVectorSet parse_multi_vectors(const std::string& path) {
    auto in = detail::open_input(path);
    MultiVectorSet set;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    bool dim_known = false;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        if (line.empty()) continue;
        auto record = detail::parse_json_line(line, path, line_no);
        std::string id = detail::require_string(record, "id", path, line_no);
        auto it = record.find("vectors");
        if (it == record.end() || !it->is_array())
            throw ParseError(path, line_no, "missing or non-array 'vectors'");
        std::vector<std::vector<double>> tokens;
        tokens.reserve(it->size());
        for (const auto& token : *it) {
            if (!token.is_array())
                throw ParseError(path, line_no, "token vector is not an array");
            std::vector<double> vec;
            vec.reserve(token.size());
            for (const auto& component : token)
                vec.push_back(
                    detail::require_finite_number(component, path, line_no, "component"));
            if (vec.empty()) throw ParseError(path, line_no, "empty token vector");
            if (!dim_known) {
                set.dim = vec.size();
                dim_known = true;
            } else if (vec.size() != set.dim) {
                throw ParseError(path, line_no,
                                 "dimension mismatch: expected " + std::to_string(set.dim) +
                                     ", got " + std::to_string(vec.size()));
            }
            tokens.push_back(std::move(vec));
        }
        if (!set.vectors.emplace(id, std::move(tokens)).second)
            throw ParseError(path, line_no, "duplicate id '" + id + "'");
    }
    return set;
}

inline void write_multi_vectors(const MultiVectorSet& set, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [id, tokens] : set.vectors) {
        nlohmann::json record{{"id", id}, {"vectors", tokens}};
        out << record.dump() << '\n';
    }
}

/// Score files are 3-column text: `qid docid score`.
inline ScoreFile parse_scorefile(const std::string& path) {
    auto in = detail::open_input(path);
    ScoreFile scores;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp_cr(line);
        if (first) {
            detail::strip_bom(line);
            first = false;
        }
        auto cols = detail::split_ws(line);
        if (cols.empty()) continue;
        if (cols.size() != 3)
            throw ParseError(path, line_no,
                             "expected 3 columns, got " + std::to_string(cols.size()));
        double score = detail::parse_finite(cols[2], path, line_no, "score");
        if (!scores.scores[cols[0]].emplace(cols[1], score).second)
            throw ParseError(path, line_no,
                             "duplicate pair (" + cols[0] + ", " + cols[1] + ")");
    }
    return scores;
}

inline void write_scorefile(const ScoreFile& scores, const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [query, row] : scores.scores)
        for (const auto& [doc, score] : row)
            out << query << ' ' << doc << ' ' << detail::format_score(score) << '\n';
}

}  // namespace fuseval
