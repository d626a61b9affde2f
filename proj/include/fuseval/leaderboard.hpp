#pragma once

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuseval/metrics.hpp"

namespace fuseval {

struct LeaderboardRow {
    std::string name;
    std::map<std::string, double> by_language;
    double average = 0.0;  ///< unweighted mean over this row's languages
};

struct Leaderboard {
    std::string metric;
    std::vector<std::string> languages;
    std::vector<LeaderboardRow> rows;
};

/// values[system][language] -> metric value in [0,1].
inline Leaderboard make_leaderboard(
    const std::map<std::string, std::map<std::string, double>>& values,
    const std::string& metric) {
    if (values.empty()) throw std::invalid_argument("make_leaderboard: no systems");
    Leaderboard board;
    board.metric = metric;
    std::set<std::string> languages;
    for (const auto& [system, by_language] : values) {
        if (by_language.empty())
            throw std::invalid_argument("make_leaderboard: system '" + system +
                                        "' has no languages");
        for (const auto& [language, value] : by_language) languages.insert(language);
    }
    board.languages.assign(languages.begin(), languages.end());
    for (const auto& [system, by_language] : values) {
        LeaderboardRow row;
        row.name = system;
        row.by_language = by_language;
        std::vector<double> row_values;
        for (const auto& [language, value] : by_language) row_values.push_back(value);
        row.average = macro_average(row_values);
        board.rows.push_back(std::move(row));
    }
    return board;
}

/// Plain-text table: one row per system, one column per language plus an
/// Average column, values rendered as percents with one decimal.
inline std::string render_leaderboard(const Leaderboard& board) {
    std::size_t name_width = 6;
    for (const auto& row : board.rows) name_width = std::max(name_width, row.name.size());
    std::vector<std::size_t> widths;
    for (const auto& language : board.languages)
        widths.push_back(std::max<std::size_t>(language.size(), 5));

    std::ostringstream out;
    out << "# metric: " << board.metric << '\n';
    out << std::string(name_width, ' ');
    for (std::size_t i = 0; i < board.languages.size(); ++i)
        out << "  " << std::string(widths[i] - board.languages[i].size(), ' ')
            << board.languages[i];
    out << "    Avg\n";
    for (const auto& row : board.rows) {
        out << row.name << std::string(name_width - row.name.size(), ' ');
        for (std::size_t i = 0; i < board.languages.size(); ++i) {
            auto it = row.by_language.find(board.languages[i]);
            std::string cell = it == row.by_language.end() ? "-" : percent1(it->second);
            out << "  " << std::string(widths[i] - cell.size(), ' ') << cell;
        }
        std::string avg = percent1(row.average);
        out << "  " << std::string(5 - std::min<std::size_t>(5, avg.size()), ' ') << avg
            << '\n';
    }
    return out.str();
}

}  // namespace fuseval
