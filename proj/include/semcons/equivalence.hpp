#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semcons/errors.hpp"
#include "semcons/json_io.hpp"
#include "semcons/text.hpp"

namespace semcons {

// NLI judges speak entailment/neutral/contradiction; the lexical baseline
// judges speak match/no_match. Two answers are equivalent iff both
// directions come back entailment (or match).
enum class JudgeLabel { Entailment, Neutral, Contradiction, Match, NoMatch };

inline const char* judge_label_name(JudgeLabel label) {
    switch (label) {
    case JudgeLabel::Entailment: return "entailment";
    case JudgeLabel::Neutral: return "neutral";
    case JudgeLabel::Contradiction: return "contradiction";
    case JudgeLabel::Match: return "match";
    case JudgeLabel::NoMatch: return "no_match";
    }
    return "unknown";
}

inline JudgeLabel judge_label_from_name(const std::string& name) {
    if (name == "entailment") return JudgeLabel::Entailment;
    if (name == "neutral") return JudgeLabel::Neutral;
    if (name == "contradiction") return JudgeLabel::Contradiction;
    if (name == "match") return JudgeLabel::Match;
    if (name == "no_match") return JudgeLabel::NoMatch;
    throw Error("BadLabel", "unknown judge label: " + name);
}

// One directional assessment: does (question + answer_a) entail
// (question + answer_b)? Implementations must be deterministic for
// identical inputs; the clustering pass and the cache both rely on it.
class EquivalenceJudge {
public:
    virtual ~EquivalenceJudge() = default;

    // Stable identifier; cached verdicts from different judges never mix.
    virtual std::string id() const = 0;

    // True when the judge emits match/no_match instead of NLI labels.
    virtual bool lexical() const = 0;

    virtual JudgeLabel assess(const std::string& question, const std::string& answer_a,
                              const std::string& answer_b) = 0;

    JudgeLabel positive_label() const {
        return lexical() ? JudgeLabel::Match : JudgeLabel::Entailment;
    }
};

struct EquivalenceJudgment {
    std::string question_id;
    int left_index = -1;
    int right_index = -1;
    JudgeLabel forward_label = JudgeLabel::Neutral;
    JudgeLabel backward_label = JudgeLabel::Neutral;
    bool equivalent = false;
    std::string judge_id;
};

// Persistent map (judge, question, ordered answer pair) -> both direction
// labels. Append-only on disk; safe for concurrent clusterings of
// different questions.
class JudgmentCache {
public:
    JudgmentCache() = default;

    explicit JudgmentCache(std::filesystem::path persist_path)
        : persist_path_(std::move(persist_path)) {
        if (std::filesystem::exists(persist_path_)) {
            for (const auto& line : read_jsonl_file(persist_path_)) {
                entries_[line.at("key").get<std::string>()] = {
                    judge_label_from_name(line.at("forward").get<std::string>()),
                    judge_label_from_name(line.at("backward").get<std::string>())};
            }
        }
    }

    std::optional<std::pair<JudgeLabel, JudgeLabel>> lookup(const std::string& judge_id,
                                                            const std::string& question,
                                                            const std::string& answer_a,
                                                            const std::string& answer_b) const {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(key(judge_id, question, answer_a, answer_b));
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void store(const std::string& judge_id, const std::string& question,
               const std::string& answer_a, const std::string& answer_b, JudgeLabel forward,
               JudgeLabel backward) {
        std::string k = key(judge_id, question, answer_a, answer_b);
        std::unique_lock lock(mutex_);
        auto [it, inserted] = entries_.emplace(k, std::make_pair(forward, backward));
        if (!inserted) return; // identical inputs give identical verdicts by contract
        if (!persist_path_.empty()) {
            append_jsonl_line(persist_path_, json{{"key", k},
                                                  {"forward", judge_label_name(forward)},
                                                  {"backward", judge_label_name(backward)}});
        }
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

private:
    static std::string key(const std::string& judge_id, const std::string& question,
                           const std::string& answer_a, const std::string& answer_b) {
        return judge_id + "|" + fnv1a64_hex(question) + "|" + fnv1a64_hex(answer_a) + "|" +
               fnv1a64_hex(answer_b);
    }

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::pair<JudgeLabel, JudgeLabel>> entries_;
    std::filesystem::path persist_path_;
};

// Bidirectional equivalence decision for one answer pair. Byte-identical
// answers short-circuit without consulting the judge.
inline EquivalenceJudgment judge_pair(const std::string& question, const std::string& answer_a,
                                      const std::string& answer_b, EquivalenceJudge& judge,
                                      JudgmentCache* cache = nullptr) {
    EquivalenceJudgment verdict;
    verdict.judge_id = judge.id();

    if (answer_a == answer_b) {
        verdict.forward_label = verdict.backward_label = judge.positive_label();
        verdict.equivalent = true;
        return verdict;
    }

    if (cache) {
        if (auto hit = cache->lookup(verdict.judge_id, question, answer_a, answer_b)) {
            verdict.forward_label = hit->first;
            verdict.backward_label = hit->second;
        } else {
            verdict.forward_label = judge.assess(question, answer_a, answer_b);
            verdict.backward_label = judge.assess(question, answer_b, answer_a);
            cache->store(verdict.judge_id, question, answer_a, answer_b, verdict.forward_label,
                         verdict.backward_label);
        }
    } else {
        verdict.forward_label = judge.assess(question, answer_a, answer_b);
        verdict.backward_label = judge.assess(question, answer_b, answer_a);
    }

    JudgeLabel positive = judge.positive_label();
    verdict.equivalent = verdict.forward_label == positive && verdict.backward_label == positive;
    return verdict;
}

// A partition of response indices 0..n-1 into semantic-equivalence
// classes. Within a cluster indices ascend; clusters are ordered by their
// smallest index (equivalently, creation order of the greedy pass).
struct Clustering {
    std::string question_id;
    std::string strategy;
    int n = 0;
    std::vector<std::vector<int>> clusters;
    std::string judge_id;
};

inline void to_json(json& j, const Clustering& c) {
    j = json{{"question_id", c.question_id},
             {"strategy", c.strategy},
             {"n", c.n},
             {"clusters", c.clusters},
             {"judge_id", c.judge_id}};
}

inline void from_json(const json& j, Clustering& c) {
    j.at("question_id").get_to(c.question_id);
    j.at("strategy").get_to(c.strategy);
    j.at("n").get_to(c.n);
    j.at("clusters").get_to(c.clusters);
    j.at("judge_id").get_to(c.judge_id);
}

// Greedy single pass in index order: each response is compared against the
// first member of every existing cluster (creation order) and joins the
// first bidirectionally-equivalent one, else opens a new cluster. Issues
// at most n(n-1)/2 pair evaluations.
inline Clustering cluster_responses(const std::string& question,
                                    const std::vector<std::string>& responses,
                                    EquivalenceJudge& judge, JudgmentCache* cache = nullptr,
                                    const std::string& question_id = "",
                                    const std::string& strategy = "") {
    if (responses.size() < 2) {
        throw DegenerateSampleSizeError(static_cast<int>(responses.size()));
    }

    Clustering clustering;
    clustering.question_id = question_id;
    clustering.strategy = strategy;
    clustering.n = static_cast<int>(responses.size());
    clustering.judge_id = judge.id();

    for (int i = 0; i < clustering.n; ++i) {
        bool placed = false;
        for (auto& cluster : clustering.clusters) {
            const std::string& representative = responses[static_cast<std::size_t>(cluster.front())];
            auto verdict = judge_pair(question, representative, responses[static_cast<std::size_t>(i)],
                                      judge, cache);
            if (verdict.equivalent) {
                cluster.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) clustering.clusters.push_back({i});
    }
    return clustering;
}

// --- baseline judges -------------------------------------------------------

class ExactMatchJudge final : public EquivalenceJudge {
public:
    std::string id() const override { return "exact-match:v1"; }
    bool lexical() const override { return true; }
    JudgeLabel assess(const std::string&, const std::string& answer_a,
                      const std::string& answer_b) override {
        return answer_a == answer_b ? JudgeLabel::Match : JudgeLabel::NoMatch;
    }
};

class NormalizedMatchJudge final : public EquivalenceJudge {
public:
    std::string id() const override { return "normalized-match:v1"; }
    bool lexical() const override { return true; }
    JudgeLabel assess(const std::string&, const std::string& answer_a,
                      const std::string& answer_b) override {
        return normalize_answer(answer_a) == normalize_answer(answer_b) ? JudgeLabel::Match
                                                                        : JudgeLabel::NoMatch;
    }
};

inline std::pair<std::unique_ptr<EquivalenceJudge>, std::unique_ptr<EquivalenceJudge>>
baseline_judges() {
    return {std::make_unique<ExactMatchJudge>(), std::make_unique<NormalizedMatchJudge>()};
}

} // namespace semcons
