#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semcons/dataset.hpp"
#include "semcons/errors.hpp"
#include "semcons/json_io.hpp"
#include "semcons/metrics.hpp"

namespace semcons {

struct RenderedTable {
    std::string text;
    std::string csv;
};

namespace detail {

inline std::string format_boundary(const Rational& r) {
    if (r.den == 1) return std::to_string(r.num);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", r.to_double());
    return buf;
}

inline std::string bin_label(const BinBoundaries& boundaries, std::size_t bin) {
    std::string lower = bin == 0 ? "0" : format_boundary(boundaries[bin - 1]);
    return "(" + lower + "," + format_boundary(boundaries[bin]) + "]";
}

inline std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

// Fixed-width text table: first column left-aligned, the rest right-aligned.
inline std::string render_text_table(const std::vector<std::vector<std::string>>& rows) {
    if (rows.empty()) return "";
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += "  ";
            out += c == 0 ? pad_right(row[c], widths[c]) : pad_left(row[c], widths[c]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out.push_back('\n');
    }
    return out;
}

inline std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out.push_back(',');
            out += csv_escape(row[c]);
        }
        out.push_back('\n');
    }
    return out;
}

} // namespace detail

// Increase/decrease/unchanged counts, one column per variant strategy.
inline RenderedTable emit_table1(const std::vector<ComparisonReport>& reports) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"semantic_consistency"};
    for (const auto& r : reports) header.push_back(r.variant);
    rows.push_back(header);

    const char* row_names[] = {"increase", "decrease", "unchanged"};
    for (int which = 0; which < 3; ++which) {
        std::vector<std::string> row{row_names[which]};
        for (const auto& r : reports) {
            int count = which == 0 ? r.increased : which == 1 ? r.decreased : r.unchanged;
            row.push_back(std::to_string(count));
        }
        rows.push_back(std::move(row));
    }
    return {detail::render_text_table(rows), detail::render_csv(rows)};
}

// Category counts per consistency bin, one column per strategy, with the
// column sums as a final row.
inline RenderedTable emit_table2(const std::vector<StrategyBins>& bins) {
    for (const auto& b : bins) {
        for (std::size_t i = 0; i < b.boundaries.size(); ++i) {
            if (b.boundaries[i] != bins.front().boundaries[i]) {
                throw BinMismatchError("strategies binned with different boundaries");
            }
        }
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"bin"};
    for (const auto& b : bins) header.push_back(b.strategy);
    rows.push_back(header);

    const BinBoundaries boundaries =
        bins.empty() ? default_bin_boundaries() : bins.front().boundaries;
    for (std::size_t bin = 0; bin < boundaries.size(); ++bin) {
        std::vector<std::string> row{detail::bin_label(boundaries, bin)};
        for (const auto& b : bins) row.push_back(std::to_string(b.counts[bin]));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> totals{"total"};
    for (const auto& b : bins) totals.push_back(std::to_string(b.total()));
    rows.push_back(std::move(totals));
    return {detail::render_text_table(rows), detail::render_csv(rows)};
}

// Plot-ready per-category deltas, one row per (category, variant), with
// footer rows carrying each variant's mean improvement.
inline std::string emit_delta_plot_data(const std::vector<ComparisonReport>& reports) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"category", "variant", "delta", "delta_fraction"});

    std::vector<std::vector<std::string>> body;
    for (const auto& r : reports) {
        for (const auto& d : r.per_category) {
            body.push_back(
                {d.category, r.variant, format_decimal6(d.delta.to_double()), d.delta.to_string()});
        }
    }
    std::sort(body.begin(), body.end());
    rows.insert(rows.end(), body.begin(), body.end());

    for (const auto& r : reports) {
        rows.push_back({"mean_improvement", r.variant, format_decimal6(r.mean_improvement),
                        r.mean_improvement_exact.to_string()});
    }
    return detail::render_csv(rows);
}

struct RunManifest {
    std::string run_id;
    std::string created_at;
    std::string judge_id;
    json config; // run_config.json snapshot, or null
    std::map<std::string, std::string> artifact_checksums; // relative path -> fnv64
};

inline void to_json(json& j, const RunManifest& m) {
    j = json{{"run_id", m.run_id},
             {"created_at", m.created_at},
             {"judge_id", m.judge_id},
             {"config", m.config},
             {"artifacts", m.artifact_checksums}};
}

// Builds and writes report/manifest.json. Every file in the run directory
// is checksummed; the response->cluster->score chain implied by the
// artifacts that DO exist is verified first, so a deleted intermediate is
// reported instead of silently checksummed around.
inline RunManifest write_manifest(const std::filesystem::path& run_dir) {
    namespace fs = std::filesystem;
    const fs::path dataset_path = run_dir / "sampled_dataset.json";
    if (!fs::exists(dataset_path)) throw MissingArtifactError("sampled_dataset.json");
    SampledDataset dataset = read_json_file(dataset_path).get<SampledDataset>();

    // Strategies that reached scoring must still have their upstream artifacts.
    std::vector<std::string> scored;
    if (fs::is_directory(run_dir / "scores")) {
        for (const auto& entry : fs::directory_iterator(run_dir / "scores")) {
            if (entry.path().extension() == ".csv") scored.push_back(entry.path().stem().string());
        }
    }
    std::sort(scored.begin(), scored.end());
    for (const auto& strategy : scored) {
        for (const auto& [category, records] : dataset.categories) {
            for (const auto& record : records) {
                for (const char* stage : {"responses", "clusters"}) {
                    fs::path artifact = run_dir / stage / strategy / (record.id + ".json");
                    if (!fs::exists(artifact)) {
                        throw MissingArtifactError(
                            fs::relative(artifact, run_dir).generic_string());
                    }
                }
            }
        }
    }

    RunManifest manifest;
    manifest.run_id = run_dir.filename().string();
    manifest.created_at = utc_timestamp_iso8601();
    if (fs::exists(run_dir / "run_config.json")) {
        manifest.config = read_json_file(run_dir / "run_config.json");
    }

    const fs::path manifest_path = run_dir / "report" / "manifest.json";
    for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path() == manifest_path) continue;
        std::string rel = fs::relative(entry.path(), run_dir).generic_string();
        manifest.artifact_checksums[rel] = file_checksum_hex(entry.path());
    }

    // Judge identity, read from the lexicographically first clustering.
    for (const auto& [rel, checksum] : manifest.artifact_checksums) {
        if (rel.rfind("clusters/", 0) == 0) {
            manifest.judge_id = read_json_file(run_dir / rel).at("judge_id").get<std::string>();
            break;
        }
    }

    write_json_file_atomic(manifest_path, json(manifest));
    return manifest;
}

} // namespace semcons
