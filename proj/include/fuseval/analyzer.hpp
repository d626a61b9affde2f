#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fuseval {

namespace detail {

/// Decodes one UTF-8 code point at `i`, advancing `i`. Malformed bytes
/// decode as themselves so no input is ever dropped.
inline uint32_t next_code_point(std::string_view text, std::size_t& i) {
    unsigned char lead = text[i];
    std::size_t len = lead < 0x80 ? 1 : (lead >> 5) == 0x6 ? 2 : (lead >> 4) == 0xE ? 3
                                                                : (lead >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > text.size()) {
        ++i;
        return lead;
    }
    uint32_t cp = len == 1 ? lead : lead & (0x7F >> len);
    for (std::size_t j = 1; j < len; ++j) {
        unsigned char cont = text[i + j];
        if ((cont >> 6) != 0x2) {
            ++i;
            return lead;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    i += len;
    return cp;
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

}  // namespace detail

/// Separator set for the naive analyzer: ASCII non-alphanumerics plus the
/// common Unicode whitespace and punctuation blocks. Letters and digits of
/// any script are token characters.
inline bool is_token_separator(uint32_t cp) {
    if (cp < 0x80) {
        bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
                     (cp >= 'A' && cp <= 'Z');
        return !alnum;
    }
    if (cp == 0x85 || cp == 0xA0) return true;                    // NEL, NBSP
    if (cp == 0xA1 || cp == 0xAB || cp == 0xB7 || cp == 0xBB || cp == 0xBF)
        return true;                                              // Latin-1 punctuation
    if (cp == 0x1680) return true;                                // Ogham space
    if (cp >= 0x2000 && cp <= 0x206F) return true;                // general punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return true;                // CJK punctuation
    if (cp >= 0xFE50 && cp <= 0xFE6F) return true;                // small form variants
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
        (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65))
        return true;                                              // fullwidth punctuation
    return false;
}

/// Splits text into tokens on separators and lowercases ASCII letters.
/// Non-ASCII letters keep their case; no stemming or segmentation.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = detail::next_code_point(text, i);
        if (is_token_separator(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
        detail::append_utf8(current, cp);
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace fuseval
