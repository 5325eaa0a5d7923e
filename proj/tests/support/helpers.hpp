#pragma once

// Shared test fixtures: scripted judges and backends, a TruthfulQA-format
// CSV writer, set-partition enumeration, and an independent brute-force
// BM25 oracle kept deliberately separate from the library implementation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include "semcons/backends.hpp"
#include "semcons/csv.hpp"
#include "semcons/equivalence.hpp"
#include "semcons/generation.hpp"
#include "semcons/retrieval.hpp"

namespace semcons::test {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("semcons-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// --- dataset fixtures --------------------------------------------------------

struct FixtureRow {
    std::string category;
    std::string question;
    std::string best_answer = "An answer";
    std::string correct = "An answer; Another answer";
    std::string incorrect = "A wrong answer";
    std::string source = "";
};

inline std::string truthfulqa_csv(const std::vector<FixtureRow>& rows) {
    std::string out = "Type,Category,Question,Best Answer,Correct Answers,Incorrect Answers,Source\n";
    for (const auto& r : rows) {
        out += csv_escape("Non-Adversarial") + "," + csv_escape(r.category) + "," +
               csv_escape(r.question) + "," + csv_escape(r.best_answer) + "," +
               csv_escape(r.correct) + "," + csv_escape(r.incorrect) + "," + csv_escape(r.source) +
               "\n";
    }
    return out;
}

// categories: (name, question count) pairs.
inline std::string synthetic_dataset_csv(const std::vector<std::pair<std::string, int>>& categories,
                                         const std::string& source = "") {
    std::vector<FixtureRow> rows;
    for (const auto& [category, count] : categories) {
        for (int i = 0; i < count; ++i) {
            rows.push_back({category, "What is fact " + std::to_string(i) + " about " + category + "?",
                            "answer", "answer; alt", "wrong", source});
        }
    }
    return truthfulqa_csv(rows);
}

// --- scripted judges ---------------------------------------------------------

// Equivalence from an explicit symmetric relation over answer texts;
// everything else is neutral.
class RelationJudge final : public EquivalenceJudge {
public:
    RelationJudge() : RelationJudge(std::set<std::pair<std::string, std::string>>{}) {}
    explicit RelationJudge(std::set<std::pair<std::string, std::string>> equivalent_pairs,
                           std::string id = "scripted-relation:v1")
        : pairs_(std::move(equivalent_pairs)), id_(std::move(id)) {}

    std::string id() const override { return id_; }
    bool lexical() const override { return false; }

    JudgeLabel assess(const std::string&, const std::string& a, const std::string& b) override {
        ++calls_;
        if (a == b) return JudgeLabel::Entailment;
        if (pairs_.count({a, b}) || pairs_.count({b, a})) return JudgeLabel::Entailment;
        return JudgeLabel::Neutral;
    }

    int calls() const { return calls_; }

private:
    std::set<std::pair<std::string, std::string>> pairs_;
    std::string id_;
    int calls_ = 0;
};

// Fully scripted directional labels keyed by (premise answer, hypothesis
// answer); unknown pairs default to neutral.
class DirectionalScriptJudge final : public EquivalenceJudge {
public:
    explicit DirectionalScriptJudge(std::map<std::pair<std::string, std::string>, JudgeLabel> script)
        : script_(std::move(script)) {}

    std::string id() const override { return "scripted-directional:v1"; }
    bool lexical() const override { return false; }

    JudgeLabel assess(const std::string&, const std::string& a, const std::string& b) override {
        ++calls_;
        auto it = script_.find({a, b});
        return it == script_.end() ? JudgeLabel::Neutral : it->second;
    }

    int calls() const { return calls_; }

private:
    std::map<std::pair<std::string, std::string>, JudgeLabel> script_;
    int calls_ = 0;
};

class CountingJudge final : public EquivalenceJudge {
public:
    explicit CountingJudge(EquivalenceJudge& inner) : inner_(inner) {}
    std::string id() const override { return inner_.id(); }
    bool lexical() const override { return inner_.lexical(); }
    JudgeLabel assess(const std::string& q, const std::string& a, const std::string& b) override {
        ++calls_;
        return inner_.assess(q, a, b);
    }
    int calls() const { return calls_; }

private:
    EquivalenceJudge& inner_;
    int calls_ = 0;
};

// --- scripted chat backends --------------------------------------------------

class ConstantBackend final : public ChatBackend {
public:
    explicit ConstantBackend(std::string reply) : reply_(std::move(reply)) {}
    std::string name() const override { return "test:constant"; }
    ChatResult complete(const ChatRequest&) override {
        ++calls_;
        return {reply_, "test-model", false};
    }
    int calls() const { return calls_; }

private:
    std::string reply_;
    std::atomic<int> calls_{0};
};

// Replies with its own call counter: "0", "1", ... so sample ordering is
// observable.
class SequenceBackend final : public ChatBackend {
public:
    std::string name() const override { return "test:sequence"; }
    ChatResult complete(const ChatRequest&) override {
        return {std::to_string(calls_.fetch_add(1)), "test-model", false};
    }

private:
    std::atomic<int> calls_{0};
};

// Two-stage script for CoT: reasoning prompts (ending with the trigger)
// get `reasoning`, everything else gets `answer`.
class CotScriptBackend final : public ChatBackend {
public:
    CotScriptBackend(std::string reasoning, std::string answer)
        : reasoning_(std::move(reasoning)), answer_(std::move(answer)) {}
    std::string name() const override { return "test:cot"; }
    ChatResult complete(const ChatRequest& request) override {
        const std::string& prompt = request.messages.back().content;
        bool stage1 = prompt.size() >= std::string(kCotTrigger).size() &&
                      prompt.compare(prompt.size() - std::string(kCotTrigger).size(),
                                     std::string::npos, kCotTrigger) == 0;
        return {stage1 ? reasoning_ : answer_, "test-model", false};
    }

private:
    std::string reasoning_;
    std::string answer_;
};

// Throws for the first `failures` calls, then behaves like ConstantBackend.
class FlakyBackend final : public ChatBackend {
public:
    FlakyBackend(int failures, std::string reply) : failures_(failures), reply_(std::move(reply)) {}
    std::string name() const override { return "test:flaky"; }
    ChatResult complete(const ChatRequest&) override {
        if (calls_.fetch_add(1) < failures_) throw Error("Boom", "injected failure");
        return {reply_, "test-model", false};
    }
    int calls() const { return calls_; }

private:
    int failures_;
    std::string reply_;
    std::atomic<int> calls_{0};
};

// Always fails for one question id (recognized by its text in the prompt).
class SelectiveFailBackend final : public ChatBackend {
public:
    explicit SelectiveFailBackend(std::string poison) : poison_(std::move(poison)) {}
    std::string name() const override { return "test:selective"; }
    ChatResult complete(const ChatRequest& request) override {
        if (request.messages.back().content.find(poison_) != std::string::npos) {
            throw Error("Boom", "poisoned question");
        }
        return {"ok", "test-model", false};
    }

private:
    std::string poison_;
};

// --- set partitions ----------------------------------------------------------

// All set partitions of {0..n-1} via restricted growth strings.
inline std::vector<std::vector<std::vector<int>>> all_set_partitions(int n) {
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<int> assignment(static_cast<std::size_t>(n), 0);
    auto emit = [&] {
        int groups = *std::max_element(assignment.begin(), assignment.end()) + 1;
        std::vector<std::vector<int>> partition(static_cast<std::size_t>(groups));
        for (int i = 0; i < n; ++i) {
            partition[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])].push_back(i);
        }
        out.push_back(std::move(partition));
    };
    // Recursively extend restricted growth strings: a[0]=0, a[i] <= max(a[0..i-1]) + 1.
    std::function<void(int, int)> recurse = [&](int i, int max_so_far) {
        if (i == n) {
            emit();
            return;
        }
        for (int g = 0; g <= max_so_far + 1; ++g) {
            assignment[static_cast<std::size_t>(i)] = g;
            recurse(i + 1, std::max(max_so_far, g));
        }
    };
    if (n > 0) recurse(1, 0);
    return out;
}

// --- independent BM25 oracle -------------------------------------------------

// Brute-force BM25 scorer: no inverted index, no shared code with the
// library. Statistics are recomputed by scanning the chunk texts.
inline std::vector<std::pair<std::string, double>> bruteforce_bm25(
    const std::vector<Chunk>& chunks, const std::string& query, double k1, double b) {
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(chunks.size());
    double total_len = 0.0;
    for (const auto& chunk : chunks) {
        tokenized.push_back(word_tokens(chunk.text));
        total_len += static_cast<double>(tokenized.back().size());
    }
    const double n_docs = static_cast<double>(chunks.size());
    const double avg_len = total_len / n_docs;

    std::vector<std::string> terms;
    for (const auto& t : word_tokens(query)) {
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }

    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        double score = 0.0;
        for (const auto& term : terms) {
            double tf = static_cast<double>(
                std::count(tokenized[c].begin(), tokenized[c].end(), term));
            if (tf == 0.0) continue;
            double df = 0.0;
            for (const auto& doc : tokenized) {
                if (std::find(doc.begin(), doc.end(), term) != doc.end()) df += 1.0;
            }
            double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            double norm = 1.0 - b + b * (static_cast<double>(tokenized[c].size()) / avg_len);
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * norm);
        }
        if (score > 0.0) scored.emplace_back(chunks[c].chunk_id, score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& lhs, const auto& rhs) {
        if (lhs.second != rhs.second) return lhs.second > rhs.second;
        return lhs.first < rhs.first;
    });
    return scored;
}

} // namespace semcons::test
