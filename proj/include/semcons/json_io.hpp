#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semcons/errors.hpp"
#include "semcons/text.hpp"

namespace semcons {

using json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingFileError(path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError(path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Write-to-temp then rename, so readers never observe partial files and
// interrupted runs leave no half-written artifacts to resume over.
inline void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("IoError", "cannot open for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("IoError", "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline json read_json_file(const std::filesystem::path& path) {
    return json::parse(read_text_file(path));
}

inline void write_json_file_atomic(const std::filesystem::path& path, const json& value) {
    write_text_file_atomic(path, value.dump(2) + "\n");
}

inline std::vector<json> read_jsonl_file(const std::filesystem::path& path) {
    std::vector<json> lines;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        lines.push_back(json::parse(trimmed));
    }
    return lines;
}

inline void append_jsonl_line(const std::filesystem::path& path, const json& value) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("IoError", "cannot open for append: " + path.string());
    out << value.dump() << "\n";
}

inline std::string file_checksum_hex(const std::filesystem::path& path) {
    return fnv1a64_hex(read_text_file(path));
}

inline std::string utc_timestamp_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string format_decimal6(double v) {
    if (v == 0.0) v = 0.0; // normalize signed zero
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace semcons
