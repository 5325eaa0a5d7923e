#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semcons/errors.hpp"

namespace semcons {

// RFC 4180 style parsing: quoted fields may contain commas, newlines and
// doubled quotes. Records are physical rows (1-based, header included),
// which is what MalformedCsv errors report.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    std::size_t record = 1;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool row_has_content = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
        ++record;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            field.push_back(c);
            ++i;
            continue;
        }
        switch (c) {
        case '"':
            if (field.empty() && !field_was_quoted) {
                in_quotes = true;
                field_was_quoted = true;
                row_has_content = true;
            } else if (field_was_quoted) {
                throw MalformedCsvError(record, "unexpected character after closing quote");
            } else {
                field.push_back(c); // bare quote inside unquoted field, keep it
            }
            ++i;
            break;
        case ',':
            end_field();
            row_has_content = true;
            ++i;
            break;
        case '\r':
            ++i;
            break;
        case '\n':
            if (row_has_content || !field.empty() || !row.empty()) end_row();
            else ++record; // blank line between records
            ++i;
            break;
        default:
            if (field_was_quoted) {
                throw MalformedCsvError(record, "unexpected character after closing quote");
            }
            field.push_back(c);
            row_has_content = true;
            ++i;
            break;
        }
    }
    if (in_quotes) throw MalformedCsvError(record, "unterminated quoted field");
    if (row_has_content || !field.empty() || !row.empty()) end_row();
    return rows;
}

inline std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingFileError(path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

inline std::string csv_escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace semcons
