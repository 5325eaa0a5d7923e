#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "semcons/csv.hpp"
#include "semcons/errors.hpp"
#include "semcons/json_io.hpp"
#include "semcons/text.hpp"

namespace semcons {

// One TruthfulQA row. Reference answers are carried for provenance; the
// consistency metric never reads them.
struct QuestionRecord {
    std::string id; // "<category-slug>/<row-index>", stable across runs
    std::string category;
    std::string question;
    std::string best_answer;
    std::vector<std::string> correct_answers;
    std::vector<std::string> incorrect_answers;
    std::vector<std::string> source_urls;
};

struct SampledDataset {
    int per_category = 0;
    int min_category_size = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::vector<QuestionRecord>> categories;
    std::vector<std::pair<std::string, int>> dropped_categories; // (category, original count)

    std::size_t question_count() const {
        std::size_t total = 0;
        for (const auto& [_, records] : categories) total += records.size();
        return total;
    }
};

inline void to_json(json& j, const QuestionRecord& r) {
    j = json{{"id", r.id},
             {"category", r.category},
             {"question", r.question},
             {"best_answer", r.best_answer},
             {"correct_answers", r.correct_answers},
             {"incorrect_answers", r.incorrect_answers},
             {"source_urls", r.source_urls}};
}

inline void from_json(const json& j, QuestionRecord& r) {
    j.at("id").get_to(r.id);
    j.at("category").get_to(r.category);
    j.at("question").get_to(r.question);
    j.at("best_answer").get_to(r.best_answer);
    j.at("correct_answers").get_to(r.correct_answers);
    j.at("incorrect_answers").get_to(r.incorrect_answers);
    j.at("source_urls").get_to(r.source_urls);
}

inline void to_json(json& j, const SampledDataset& d) {
    j = json{{"per_category", d.per_category},
             {"min_category_size", d.min_category_size},
             {"seed", d.seed},
             {"categories", d.categories},
             {"dropped_categories", d.dropped_categories}};
}

inline void from_json(const json& j, SampledDataset& d) {
    j.at("per_category").get_to(d.per_category);
    j.at("min_category_size").get_to(d.min_category_size);
    j.at("seed").get_to(d.seed);
    j.at("categories").get_to(d.categories);
    j.at("dropped_categories").get_to(d.dropped_categories);
}

// Loads a TruthfulQA-format CSV. Any malformed row aborts the load: silent
// row loss would corrupt per-category counts downstream.
inline std::vector<QuestionRecord> load_truthfulqa(const std::filesystem::path& path) {
    auto rows = read_csv_file(path);
    if (rows.empty()) throw MalformedCsvError(1, "missing header row");

    static const char* kRequired[] = {"Type",           "Category",        "Question",
                                      "Best Answer",    "Correct Answers", "Incorrect Answers",
                                      "Source"};
    std::unordered_map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < rows[0].size(); ++i) columns[trim(rows[0][i])] = i;
    for (const char* name : kRequired) {
        if (!columns.count(name)) {
            throw MalformedCsvError(1, std::string("header missing required column '") + name + "'");
        }
    }

    std::vector<QuestionRecord> records;
    records.reserve(rows.size() - 1);
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t record_number = r + 1; // 1-based physical row
        if (row.size() != rows[0].size()) {
            throw MalformedCsvError(record_number,
                                    "expected " + std::to_string(rows[0].size()) + " fields, got " +
                                        std::to_string(row.size()));
        }
        auto field = [&](const char* name) { return row[columns.at(name)]; };

        QuestionRecord rec;
        rec.category = trim(field("Category"));
        rec.question = trim(field("Question"));
        if (rec.question.empty()) throw MalformedCsvError(record_number, "empty Question");
        if (rec.category.empty()) throw MalformedCsvError(record_number, "empty Category");
        rec.best_answer = trim(field("Best Answer"));
        rec.correct_answers = split_and_trim(field("Correct Answers"), ';');
        rec.incorrect_answers = split_and_trim(field("Incorrect Answers"), ';');
        rec.source_urls = split_whitespace(field("Source"));
        rec.id = slugify(rec.category) + "/" + std::to_string(r - 1);
        if (!seen_ids.insert(rec.id).second) {
            throw MalformedCsvError(record_number, "duplicate question id " + rec.id);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

namespace detail {

// Rejection-sampled bounded draw; together with the fixed mt19937_64
// sequence this makes shuffles reproducible across platforms.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

template <typename T>
inline void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_rand(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace detail

// Draws per_category questions from every category large enough to keep;
// smaller categories land in dropped_categories. Each category shuffles
// with its own seed (global seed mixed with the category name) so results
// do not depend on which other categories are present.
inline SampledDataset sample_questions(const std::vector<QuestionRecord>& records, int per_category,
                                       int min_category_size, std::uint64_t seed) {
    if (per_category < 1) throw ConfigError("per_category must be >= 1");
    if (min_category_size < per_category) {
        throw ConfigError("min_category_size must be >= per_category");
    }

    std::map<std::string, std::vector<QuestionRecord>> by_category;
    for (const auto& rec : records) by_category[rec.category].push_back(rec);

    SampledDataset out;
    out.per_category = per_category;
    out.min_category_size = min_category_size;
    out.seed = seed;
    for (auto& [category, rows] : by_category) {
        if (static_cast<int>(rows.size()) < min_category_size) {
            out.dropped_categories.emplace_back(category, static_cast<int>(rows.size()));
            continue;
        }
        detail::seeded_shuffle(rows, seed ^ fnv1a64(category));
        rows.resize(static_cast<std::size_t>(per_category));
        out.categories.emplace(category, std::move(rows));
    }
    if (out.categories.empty()) {
        throw EmptyDatasetError("no category meets min_category_size=" +
                                std::to_string(min_category_size));
    }
    return out;
}

inline std::vector<std::pair<std::string, int>> list_categories(const SampledDataset& dataset) {
    std::vector<std::pair<std::string, int>> out;
    out.reserve(dataset.categories.size());
    for (const auto& [category, records] : dataset.categories) {
        out.emplace_back(category, static_cast<int>(records.size()));
    }
    return out; // std::map iteration is already lexicographic
}

} // namespace semcons
