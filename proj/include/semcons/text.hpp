#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semcons {

inline bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    return std::string(s.substr(begin, end - begin));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Runs of whitespace collapse to a single space; leading/trailing removed.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (is_space(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Splits on a delimiter, trims each piece, drops empties.
inline std::vector<std::string> split_and_trim(std::string_view s, char delim) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t pos = s.find(delim, start);
        if (pos == std::string_view::npos) pos = s.size();
        std::string piece = trim(s.substr(start, pos - start));
        if (!piece.empty()) parts.push_back(std::move(piece));
        start = pos + 1;
    }
    return parts;
}

// Lowercase identifier-safe slug: alphanumerics kept, everything else
// collapsed to single dashes.
inline std::string slugify(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_dash = false;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            if (pending_dash && !out.empty()) out.push_back('-');
            pending_dash = false;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            pending_dash = true;
        }
    }
    return out;
}

// Lowercased tokens split at whitespace and punctuation (anything
// non-alphanumeric). Used by the retrieval index.
inline std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string fnv1a64_hex(std::string_view s) { return hex64(fnv1a64(s)); }

// Answer normalization used by the normalized-match judge: casefold,
// collapse whitespace, strip terminal '.', '!', '?'.
inline std::string normalize_answer(std::string_view s) {
    std::string out = collapse_whitespace(to_lower(s));
    while (!out.empty()) {
        char last = out.back();
        if (last == '.' || last == '!' || last == '?') {
            out.pop_back();
        } else {
            break;
        }
    }
    while (!out.empty() && is_space(out.back())) out.pop_back();
    return out;
}

namespace detail {

inline void append_entity_decoded(std::string& out, std::string_view entity) {
    if (entity == "amp") out.push_back('&');
    else if (entity == "lt") out.push_back('<');
    else if (entity == "gt") out.push_back('>');
    else if (entity == "quot") out.push_back('"');
    else if (entity == "apos") out.push_back('\'');
    else if (entity == "nbsp") out.push_back(' ');
    else if (!entity.empty() && entity[0] == '#') {
        long code = 0;
        bool ok = true;
        for (std::size_t i = 1; i < entity.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(entity[i]))) { ok = false; break; }
            code = code * 10 + (entity[i] - '0');
        }
        if (ok && code > 0 && code < 128) out.push_back(static_cast<char>(code));
        else out.push_back(' ');
    } else {
        // Unknown entity: keep it readable rather than dropping text.
        out.push_back('&');
        out.append(entity);
        out.push_back(';');
    }
}

inline bool iequals_at(std::string_view haystack, std::size_t pos, std::string_view needle) {
    if (pos + needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i < needle.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(haystack[pos + i])) !=
            std::tolower(static_cast<unsigned char>(needle[i]))) {
            return false;
        }
    }
    return true;
}

} // namespace detail

// Strips an HTML page to its visible text: script/style blocks removed,
// tags dropped, common entities decoded, whitespace collapsed.
inline std::string html_to_text(std::string_view html) {
    std::string out;
    out.reserve(html.size() / 2);
    std::size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c == '<') {
            if (detail::iequals_at(html, i, "<script")) {
                std::size_t close = i;
                while (close < html.size() && !detail::iequals_at(html, close, "</script")) ++close;
                i = html.find('>', close);
                i = (i == std::string_view::npos) ? html.size() : i + 1;
                continue;
            }
            if (detail::iequals_at(html, i, "<style")) {
                std::size_t close = i;
                while (close < html.size() && !detail::iequals_at(html, close, "</style")) ++close;
                i = html.find('>', close);
                i = (i == std::string_view::npos) ? html.size() : i + 1;
                continue;
            }
            if (detail::iequals_at(html, i, "<!--")) {
                std::size_t close = html.find("-->", i);
                i = (close == std::string_view::npos) ? html.size() : close + 3;
                continue;
            }
            std::size_t close = html.find('>', i);
            if (close == std::string_view::npos) break;
            out.push_back(' ');
            i = close + 1;
            continue;
        }
        if (c == '&') {
            std::size_t semi = html.find(';', i);
            if (semi != std::string_view::npos && semi - i <= 10) {
                detail::append_entity_decoded(out, html.substr(i + 1, semi - i - 1));
                i = semi + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return collapse_whitespace(out);
}

inline bool looks_like_html(std::string_view content_type, std::string_view body) {
    if (to_lower(content_type).find("html") != std::string::npos) return true;
    std::size_t i = 0;
    while (i < body.size() && is_space(body[i])) ++i;
    return detail::iequals_at(body, i, "<!doctype") || detail::iequals_at(body, i, "<html");
}

} // namespace semcons
